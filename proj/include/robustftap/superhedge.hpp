#pragma once

// Quasi-sure superhedging by backward minimax recursion, per-prior prices,
// the sensitivity report (quasi-sure vs worst per-prior price) and the
// superhedging duality check against the martingale polytope.

#include "robustftap/lp.hpp"
#include "robustftap/market.hpp"
#include "robustftap/polytope.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rftap {

struct SuperhedgeResult {
    ExtRational price;
    std::map<int, ExtRational> node_prices;  // node index -> conditional price
    Strategy strategy;
    std::optional<Measure> binding_measure;
};

enum class Continuation { QuasiSure, PerPrior };

struct SuperhedgeOptions {
    std::optional<Rational> admissibility_cap;  // lambda: payoff >= -lambda W q.s.
    Continuation continuation = Continuation::QuasiSure;
};

namespace detail {

// Marks nodes with at least one non-polar (resp. charged) leaf below.
inline std::vector<char> alive_nodes(const ScenarioTree& tree,
                                     const std::vector<char>& leaf_alive) {
    std::vector<char> alive(tree.nodes().size(), 0);
    for (size_t i = 0; i < tree.num_leaves(); ++i) {
        if (!leaf_alive[i]) continue;
        for (int ix = tree.leaves()[i];; ix = tree.node(ix).parent) {
            alive[static_cast<size_t>(ix)] = 1;
            if (tree.node(ix).parent < 0) break;
        }
    }
    return alive;
}

inline std::vector<char> leaf_alive_from_polar(const PolarStructure& polar) {
    std::vector<char> a(polar.polar.size());
    for (size_t i = 0; i < polar.polar.size(); ++i) a[i] = polar.polar[i] ? 0 : 1;
    return a;
}

inline std::vector<char> leaf_alive_from_measure(const Measure& m) {
    std::vector<char> a(m.weights.size());
    for (size_t i = 0; i < m.weights.size(); ++i) a[i] = m.weights[i] > 0 ? 1 : 0;
    return a;
}

// One-step LP: min x s.t. x + H . dS(child) >= v_child over the given
// children. -inf continuation rows are vacuous and dropped.
inline ExtRational one_step_price(const ScenarioTree& tree, int node,
                                  const std::vector<std::pair<int, ExtRational>>& kids,
                                  std::vector<Rational>* holding_out) {
    const int d = tree.asset_count();
    LinearProgram<Rational> lp(static_cast<size_t>(d) + 1);
    lp.objective[0] = Rational(1);
    bool any_row = false;
    bool all_neg_inf = true;
    for (const auto& [child, v] : kids) {
        if (v.kind == ExtRational::PosInf) return ExtRational::pos_inf();
        if (!v.finite()) continue;
        all_neg_inf = false;
        std::vector<Rational> row(static_cast<size_t>(d) + 1, Rational(0));
        row[0] = Rational(1);
        for (int j = 0; j < d; ++j)
            row[static_cast<size_t>(j) + 1] =
                tree.node(child).prices[static_cast<size_t>(j)] -
                tree.node(node).prices[static_cast<size_t>(j)];
        lp.add_row(std::move(row), Rel::Ge, v.value);
        any_row = true;
    }
    if (!any_row) {
        if (all_neg_inf && !kids.empty()) return ExtRational::neg_inf();
        return ExtRational::neg_inf();
    }
    const auto out = solve(lp);
    if (out.status == LpStatus::Unbounded) return ExtRational::neg_inf();
    if (out.status != LpStatus::Optimal) throw ModelError("one-step hedge LP failed");
    if (holding_out) {
        holding_out->assign(static_cast<size_t>(d), Rational(0));
        for (int j = 0; j < d; ++j)
            (*holding_out)[static_cast<size_t>(j)] = out.primal[static_cast<size_t>(j) + 1];
    }
    return ExtRational(out.value);
}

// Backward recursion over the alive sub-tree. Fills per-node prices and,
// when finite, the per-node holdings into strategy (if given).
inline std::map<int, ExtRational> backward_recursion(const ScenarioTree& tree,
                                                     const std::vector<char>& alive,
                                                     const Claim& terminal,
                                                     Strategy* strategy) {
    std::map<int, ExtRational> price;
    for (int t = tree.horizon(); t >= 0; --t) {
        for (int nix : tree.nodes_at(t)) {
            if (!alive[static_cast<size_t>(nix)]) continue;
            if (t == tree.horizon()) {
                price[nix] = ExtRational(terminal.values[static_cast<size_t>(tree.leaf_ordinal(nix))]);
                continue;
            }
            std::vector<std::pair<int, ExtRational>> kids;
            for (int c : tree.node(nix).children)
                if (alive[static_cast<size_t>(c)]) kids.push_back({c, price.at(c)});
            std::vector<Rational> holding;
            price[nix] = one_step_price(tree, nix, kids, strategy ? &holding : nullptr);
            if (strategy && price[nix].finite()) strategy->dynamic[nix] = holding;
        }
    }
    return price;
}

// Global LP: min x s.t. x + (H . S)_T + h . Phi >= X on the given leaves,
// with the optional admissibility rows payoff >= -lambda W on cap_leaves.
inline SuperhedgeResult one_shot(const Market& market, const std::vector<char>& row_leaves,
                                 const Claim& X, const std::optional<Rational>& cap,
                                 const std::vector<char>& cap_leaves) {
    const auto& tree = market.tree;
    const int d = tree.asset_count();
    const auto alive = alive_nodes(tree, row_leaves);

    // Variable layout: x, then (alive interior node, asset), then options.
    std::map<std::pair<int, int>, size_t> hvar;
    size_t nv = 1;
    for (int t = 0; t < tree.horizon(); ++t)
        for (int nix : tree.nodes_at(t))
            if (alive[static_cast<size_t>(nix)])
                for (int j = 0; j < d; ++j) hvar[{nix, j}] = nv++;
    const size_t opt0 = nv;
    nv += market.options.size();

    LinearProgram<Rational> lp(nv);
    lp.objective[0] = Rational(1);

    auto payoff_row = [&](size_t leaf_ordinal) {
        std::vector<Rational> row(nv, Rational(0));
        const int leaf = tree.leaves()[leaf_ordinal];
        for (int ix = leaf; tree.node(ix).parent >= 0; ix = tree.node(ix).parent) {
            const int par = tree.node(ix).parent;
            if (!alive[static_cast<size_t>(par)]) continue;
            for (int j = 0; j < d; ++j) {
                auto it = hvar.find({par, j});
                if (it == hvar.end()) continue;
                row[it->second] += tree.node(ix).prices[static_cast<size_t>(j)] -
                                   tree.node(par).prices[static_cast<size_t>(j)];
            }
        }
        for (size_t o = 0; o < market.options.size(); ++o)
            row[opt0 + o] = market.options[o].payoff[leaf_ordinal];
        return row;
    };

    for (size_t i = 0; i < tree.num_leaves(); ++i) {
        if (!row_leaves[i]) continue;
        auto row = payoff_row(i);
        row[0] = Rational(1);
        lp.add_row(std::move(row), Rel::Ge, X.values[i]);
    }
    if (cap) {
        const Claim w = weight_W(tree, market.options);
        for (size_t i = 0; i < tree.num_leaves(); ++i) {
            if (!cap_leaves[i]) continue;
            lp.add_row(payoff_row(i), Rel::Ge, -(*cap) * w.values[i]);
        }
    }

    SuperhedgeResult res;
    res.strategy = Strategy::zero(market.options);
    const auto out = solve(lp);
    if (out.status == LpStatus::Unbounded) {
        res.price = ExtRational::neg_inf();
        return res;
    }
    if (out.status != LpStatus::Optimal) throw ModelError("superhedging LP infeasible");
    res.price = ExtRational(out.value);
    for (const auto& [key, col] : hvar) {
        auto& h = res.strategy.dynamic[key.first];
        if (h.empty()) h.assign(static_cast<size_t>(d), Rational(0));
        h[static_cast<size_t>(key.second)] = out.primal[col];
    }
    for (size_t o = 0; o < market.options.size(); ++o)
        res.strategy.static_weights[o] = out.primal[opt0 + o];
    return res;
}

}  // namespace detail

// Quasi-sure superhedging price of X with node prices and an optimal
// strategy. Static option weights are chosen at the root; the recursion
// then runs on X - h . Phi.
inline SuperhedgeResult superhedge_qs(const Market& market, const Claim& X,
                                      const SuperhedgeOptions& opts = {}) {
    const auto& tree = market.tree;
    const auto polar = polar_set(tree, market.priors);
    if (polar.all_polar()) throw ModelError("vacuous market: every leaf is polar");
    const auto leaf_alive = detail::leaf_alive_from_polar(polar);
    const auto alive = detail::alive_nodes(tree, leaf_alive);

    if (market.options.empty() && !opts.admissibility_cap) {
        SuperhedgeResult res;
        res.strategy = Strategy::zero(market.options);
        res.node_prices = detail::backward_recursion(tree, alive, X, &res.strategy);
        res.price = res.node_prices.at(tree.root());
        return res;
    }

    SuperhedgeResult res =
        detail::one_shot(market, leaf_alive, X, opts.admissibility_cap, leaf_alive);
    if (res.price.finite() && !opts.admissibility_cap) {
        Claim reduced = X;
        for (size_t o = 0; o < market.options.size(); ++o)
            for (size_t i = 0; i < tree.num_leaves(); ++i)
                reduced.values[i] -= res.strategy.static_weights[o] * market.options[o].payoff[i];
        res.node_prices = detail::backward_recursion(tree, alive, reduced, nullptr);
    }
    return res;
}

// Per-prior price pi_0(P). Default continuation is the quasi-sure one: a
// single hedging step at the root against the quasi-sure continuation
// prices, constrained P-a.s. The PerPrior variant runs the whole recursion
// on P's support. With static options both variants reduce to the global
// LP over P's support.
inline SuperhedgeResult superhedge_per_prior(const Market& market, const Claim& X,
                                             const Measure& prior,
                                             const SuperhedgeOptions& opts = {}) {
    const auto& tree = market.tree;
    const auto leaf_alive = detail::leaf_alive_from_measure(prior);
    bool any = false;
    for (char c : leaf_alive) any = any || c;
    if (!any) throw ModelError("prior with empty support");

    if (!market.options.empty() || opts.admissibility_cap) {
        const auto polar = polar_set(tree, market.priors);
        return detail::one_shot(market, leaf_alive, X, opts.admissibility_cap,
                                detail::leaf_alive_from_polar(polar));
    }

    const auto alive_p = detail::alive_nodes(tree, leaf_alive);
    SuperhedgeResult res;
    res.strategy = Strategy::zero(market.options);

    if (opts.continuation == Continuation::PerPrior) {
        res.node_prices = detail::backward_recursion(tree, alive_p, X, &res.strategy);
        res.price = res.node_prices.at(tree.root());
        return res;
    }

    // Quasi-sure continuation prices, then one P-a.s. step at the root.
    const auto polar = polar_set(tree, market.priors);
    const auto alive_qs = detail::alive_nodes(tree, detail::leaf_alive_from_polar(polar));
    const auto qs_prices = detail::backward_recursion(tree, alive_qs, X, nullptr);
    if (tree.horizon() == 0) throw ModelError("horizon must be >= 1");

    std::vector<std::pair<int, ExtRational>> kids;
    for (int c : tree.node(tree.root()).children) {
        if (!alive_p[static_cast<size_t>(c)]) continue;
        auto it = qs_prices.find(c);
        if (it == qs_prices.end())
            throw ModelError("prior charges a polar branch: node " + tree.node(c).id);
        kids.push_back({c, it->second});
    }
    std::vector<Rational> holding;
    res.price = detail::one_step_price(tree, tree.root(), kids, &holding);
    if (res.price.finite()) res.strategy.dynamic[tree.root()] = holding;
    res.node_prices = qs_prices;
    res.node_prices[tree.root()] = res.price;
    return res;
}

// NA characterization through the superhedging functional: arbitrage exists
// iff some non-polar indicator is superhedgeable at zero cost.
inline bool na_holds(const Market& market) {
    const auto& tree = market.tree;
    const auto polar = polar_set(tree, market.priors);
    if (polar.all_polar()) throw ModelError("vacuous market: every leaf is polar");
    for (int leaf : polar.qs_support) {
        Claim ind = Claim::constant(tree, Rational(0));
        ind.values[static_cast<size_t>(tree.leaf_ordinal(leaf))] = Rational(1);
        const auto res = superhedge_qs(market, ind);
        if (!(ExtRational(Rational(0)) < res.price)) return false;
    }
    return true;
}

struct SensitivityReport {
    ExtRational quasi_sure_price;
    std::vector<std::pair<std::string, ExtRational>> per_prior_prices;
    ExtRational max_per_prior;
    ExtRational gap;  // quasi_sure - max_per_prior, >= 0 always
};

namespace detail {

inline ExtRational ext_gap(const ExtRational& qs, const ExtRational& worst) {
    if (qs.finite() && worst.finite()) return ExtRational(qs.value - worst.value);
    if (qs == worst) return ExtRational(Rational(0));
    if (worst.kind == ExtRational::NegInf) return ExtRational::pos_inf();
    return ExtRational(Rational(0));
}

// The one-step prior sets are convex (generated by the listed measures), so
// the per-node worst case is attained by a full-support mixture; uniform
// mixing weights give an exact optimizer.
inline Measure mixture_selection(const ScenarioTree& tree, const KernelPriors& k) {
    std::vector<Rational> w(tree.num_leaves(), Rational(0));
    for (size_t li = 0; li < tree.num_leaves(); ++li) {
        Rational mass(1);
        for (int ix = tree.leaves()[li]; tree.node(ix).parent >= 0; ix = tree.node(ix).parent) {
            const int par = tree.node(ix).parent;
            const auto& steps = k.steps.at(par);
            const auto& kids = tree.node(par).children;
            const size_t pos = static_cast<size_t>(
                std::find(kids.begin(), kids.end(), ix) - kids.begin());
            Rational p(0);
            for (const auto& step : steps) p += step[pos];
            mass *= p / Rational(steps.size());
            if (mass == 0) break;
        }
        w[li] = mass;
    }
    return Measure::validated(tree, std::move(w));
}

}  // namespace detail

inline SensitivityReport sensitivity_report(const Market& market, const Claim& X,
                                            const SuperhedgeOptions& opts = {}) {
    if (!na_holds(market)) throw ModelError("sensitivity report refused: arbitrage present");
    SensitivityReport rep;
    rep.quasi_sure_price = superhedge_qs(market, X, opts).price;

    std::vector<std::pair<std::string, Measure>> priors;
    if (market.priors.is_flat()) {
        const auto& flat = market.priors.flat();
        for (size_t i = 0; i < flat.size(); ++i) {
            std::string name = i < market.priors.names.size() ? market.priors.names[i]
                                                              : "P" + std::to_string(i);
            priors.push_back({name, flat[i]});
        }
    } else {
        priors.push_back({"mixture-selection",
                          detail::mixture_selection(market.tree, market.priors.kernel())});
    }

    bool first = true;
    for (const auto& [name, P] : priors) {
        const auto price = superhedge_per_prior(market, X, P, opts).price;
        rep.per_prior_prices.push_back({name, price});
        if (first || rep.max_per_prior < price) rep.max_per_prior = price;
        first = false;
    }
    rep.gap = detail::ext_gap(rep.quasi_sure_price, rep.max_per_prior);
    return rep;
}

struct DualityReport {
    ExtRational primal;             // Pi_0
    bool dual_feasible = false;
    ExtRational dual;               // sup_Q E_Q[X] when feasible
    std::optional<Measure> argmax;  // binding measure
    std::optional<ExtRational> gap;
};

inline DualityReport duality_check(const Market& market, const Claim& X) {
    const auto& tree = market.tree;
    const auto polar = polar_set(tree, market.priors);
    if (polar.all_polar()) throw ModelError("vacuous market: every leaf is polar");

    DualityReport rep;
    rep.primal = superhedge_qs(market, X).price;

    const auto sys = build_mtg_system(tree, market.options, polar);
    auto lp = sys.base_lp();
    lp.sense = Sense::Maximize;
    for (size_t c = 0; c < sys.support.size(); ++c)
        lp.objective[c] = X.values[static_cast<size_t>(sys.support[c])];
    const auto out = solve(lp);
    if (out.status == LpStatus::Infeasible) {
        rep.dual_feasible = false;
        return rep;
    }
    if (out.status != LpStatus::Optimal) throw ModelError("martingale polytope LP unbounded");
    rep.dual_feasible = true;
    rep.dual = ExtRational(out.value);
    rep.argmax = measure_from_support(tree, sys, out.primal);
    rep.gap = detail::ext_gap(rep.primal, rep.dual);
    return rep;
}

}  // namespace rftap
