#pragma once

// NA and sensitive-NA verdicts with verifiable witnesses: an arbitrage
// strategy extracted from LP duals / Farkas rays, or per-leaf calibrated
// martingale measures with Q(leaf) >= delta > 0.

#include "robustftap/lp.hpp"
#include "robustftap/market.hpp"
#include "robustftap/polytope.hpp"
#include "robustftap/superhedge.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rftap {

struct LeafWitness {
    int leaf;  // node index
    Measure measure;
    Rational delta;
};

struct ArbitrageVerdict {
    enum Kind { NoArbitrage, Arbitrage } kind = NoArbitrage;
    std::optional<Strategy> witness;       // Arbitrage
    std::optional<int> witness_leaf;       // Arbitrage: leaf where payoff > 0
    std::vector<LeafWitness> measures;     // NoArbitrage, ordered by leaf
};

namespace detail {

struct LeafLpResult {
    enum Kind { Positive, Zero, Empty } kind;
    std::vector<Rational> q;        // Positive: optimizer over support columns
    Rational value{};               // Positive: max Q(a)
    std::vector<Rational> duals;    // Zero/Empty: multipliers on system rows
};

// max Q(a) over the calibrated martingale polytope restricted to the
// quasi-sure support.
inline LeafLpResult max_leaf_mass(const MtgSystem& sys, size_t support_pos) {
    auto lp = sys.base_lp();
    lp.sense = Sense::Maximize;
    lp.objective[support_pos] = Rational(1);
    const auto out = solve(lp);
    if (out.status == LpStatus::Infeasible)
        return {LeafLpResult::Empty, {}, Rational(0), out.row_duals};
    if (out.status != LpStatus::Optimal)
        throw ModelError("martingale polytope LP unbounded");
    if (out.value > 0) return {LeafLpResult::Positive, out.primal, out.value, {}};
    return {LeafLpResult::Zero, {}, Rational(0), out.row_duals};
}

}  // namespace detail

// Decides NA. NoArbitrage iff every non-polar leaf carries a calibrated
// martingale measure with positive mass; otherwise the failing leaf's LP
// dual (or the empty polytope's Farkas ray) yields a strategy with
// quasi-surely nonnegative payoff, strictly positive somewhere non-polar.
inline ArbitrageVerdict check_na(const Market& market) {
    const auto& tree = market.tree;
    const auto polar = polar_set(tree, market.priors);
    if (polar.all_polar()) throw ModelError("vacuous market: every leaf is polar");
    const auto sys = build_mtg_system(tree, market.options, polar);

    ArbitrageVerdict verdict;
    std::vector<char> certified(sys.support.size(), 0);
    std::vector<std::optional<LeafWitness>> found(sys.support.size());

    for (size_t pos = 0; pos < sys.support.size(); ++pos) {
        if (certified[pos]) continue;
        const auto res = detail::max_leaf_mass(sys, pos);
        const int leaf = tree.leaves()[static_cast<size_t>(sys.support[pos])];
        if (res.kind == detail::LeafLpResult::Positive) {
            const Measure q = measure_from_support(tree, sys, res.q);
            for (size_t p2 = 0; p2 < sys.support.size(); ++p2) {
                if (certified[p2] || res.q[p2] == 0) continue;
                const int l2 = tree.leaves()[static_cast<size_t>(sys.support[p2])];
                found[p2] = LeafWitness{l2, q, res.q[p2]};
                certified[p2] = 1;
            }
            continue;
        }
        // Arbitrage. Zero case: duals give payoff >= 1_{leaf} at zero cost.
        // Empty case: the Farkas ray, negated, gives payoff > 0 everywhere.
        const Rational scale = res.kind == detail::LeafLpResult::Zero ? Rational(1) : Rational(-1);
        verdict.kind = ArbitrageVerdict::Arbitrage;
        verdict.witness = strategy_from_duals(tree, market.options, sys, res.duals, scale);
        verdict.witness_leaf = leaf;
        if (res.kind == detail::LeafLpResult::Empty) {
            // Any support leaf sees a strictly positive payoff; report this one.
            verdict.witness_leaf = leaf;
        }
        return verdict;
    }

    verdict.kind = ArbitrageVerdict::NoArbitrage;
    for (auto& w : found) verdict.measures.push_back(std::move(*w));
    return verdict;
}

// Exact per-leaf witness: the LP optimizer of max Q(leaf) and its value.
inline LeafWitness find_witness_measure(const Market& market, const std::string& leaf_id) {
    const auto& tree = market.tree;
    const auto polar = polar_set(tree, market.priors);
    const int leaf = tree.index_of(leaf_id);
    if (!tree.is_leaf(leaf)) throw ModelError("not a leaf: " + leaf_id);
    if (polar.polar[static_cast<size_t>(tree.leaf_ordinal(leaf))])
        throw ModelError("witness requested for polar leaf: " + leaf_id);

    const auto sys = build_mtg_system(tree, market.options, polar);
    size_t pos = sys.support.size();
    for (size_t p = 0; p < sys.support.size(); ++p)
        if (sys.support[p] == tree.leaf_ordinal(leaf)) pos = p;
    const auto res = detail::max_leaf_mass(sys, pos);
    if (res.kind != detail::LeafLpResult::Positive)
        throw ModelError("no martingale measure charges leaf " + leaf_id +
                         ": NA fails at this leaf");
    return LeafWitness{leaf, measure_from_support(tree, sys, res.q), res.value};
}

struct SnaResult {
    bool sna_holds = true;
    std::optional<Claim> witness_claim;  // indicator 1_a when sNA fails
    std::optional<int> witness_leaf;
};

// Sensitive NA. A violation is a nonzero quasi-surely nonnegative claim
// whose per-prior superhedging price is <= 0 under every prior; by
// monotonicity and positive homogeneity it suffices to scan the non-polar
// singleton indicators. Kernel prior sets are convex in each one-step
// family, so the worst per-prior price coincides with the quasi-sure one
// and the verdict reduces to NA.
inline SnaResult check_sna(const Market& market) {
    const auto& tree = market.tree;
    const auto polar = polar_set(tree, market.priors);
    if (polar.all_polar()) throw ModelError("vacuous market: every leaf is polar");

    SnaResult res;
    for (int leaf : polar.qs_support) {
        Claim ind = Claim::constant(tree, Rational(0));
        ind.values[static_cast<size_t>(tree.leaf_ordinal(leaf))] = Rational(1);

        bool all_nonpositive = true;
        if (market.priors.is_flat()) {
            SuperhedgeOptions opts;
            opts.continuation = Continuation::PerPrior;
            for (const auto& P : market.priors.flat()) {
                const auto price = superhedge_per_prior(market, ind, P, opts).price;
                if (ExtRational(Rational(0)) < price) { all_nonpositive = false; break; }
            }
        } else {
            const auto price = superhedge_qs(market, ind).price;
            all_nonpositive = !(ExtRational(Rational(0)) < price);
        }
        if (all_nonpositive) {
            res.sna_holds = false;
            res.witness_claim = ind;
            res.witness_leaf = leaf;
            return res;
        }
    }
    return res;
}

struct ApproximateClass {
    std::vector<std::pair<int, Measure>> sequence;  // (n, Q_n)
    std::string dominating_label;
};

// Checks the approximate-martingale bounds at level n: support inside the
// quasi-sure support, |E_Q[phi_i]| <= 1/n and |E_Q[1_B dS^j]| <= 1/n for
// every interior node event B.
inline bool validate_approximate(const Market& market, const Measure& q, int n) {
    if (n < 1) throw ModelError("approximation level must be >= 1");
    const auto& tree = market.tree;
    const auto polar = polar_set(tree, market.priors);
    for (size_t i = 0; i < tree.num_leaves(); ++i)
        if (polar.polar[i] && q.weights[i] > 0) return false;  // Q not << priors

    const Rational bound(1, n);
    const auto sys = build_mtg_system(tree, market.options, polar);
    for (size_t r = 0; r < sys.rows.size(); ++r) {
        if (sys.descs[r].kind == MtgSystem::RowDesc::Mass) continue;
        Rational moment(0);
        for (size_t c = 0; c < sys.support.size(); ++c)
            moment += sys.rows[r][c] * q.weights[static_cast<size_t>(sys.support[c])];
        if (rational_abs(moment) > bound) return false;
    }
    return true;
}

// On a finite tree the exact witness measure has zero moment error, so it
// is valid at every level; the sequence is constant.
inline ApproximateClass approximate_class(const Market& market, const std::string& leaf_id,
                                          int n_max) {
    if (n_max < 1) throw ModelError("n_max must be >= 1");
    const auto witness = find_witness_measure(market, leaf_id);
    ApproximateClass out;
    out.dominating_label = "uniform-mixture-of-priors";
    for (int n = 1; n <= n_max; ++n) {
        if (!validate_approximate(market, witness.measure, n))
            throw ModelError("exact witness failed the approximate bounds");
        out.sequence.push_back({n, witness.measure});
    }
    return out;
}

}  // namespace rftap
