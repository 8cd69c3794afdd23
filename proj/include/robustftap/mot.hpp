#pragma once

// Call-quote front end: support function (maximal convex non-increasing
// envelope of the quotes), implied terminal marginals via slope jumps,
// static-arbitrage diagnostics with exploiting portfolios, convex order,
// compact-support enforcement and market assembly.

#include "robustftap/lp.hpp"
#include "robustftap/market.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace rftap {

struct CallQuotes {
    Rational spot;                                     // S_0^j > 0
    std::vector<std::pair<Rational, Rational>> quotes; // (strike, price), strikes increasing
};

struct CallQuoteSheet {
    std::vector<CallQuotes> assets;

    void validate() const {
        for (const auto& a : assets) {
            if (a.spot <= 0) throw ModelError("spot must be positive");
            if (a.quotes.empty()) throw ModelError("empty quote list");
            Rational prev(0);
            for (size_t i = 0; i < a.quotes.size(); ++i) {
                if (a.quotes[i].first <= (i == 0 ? Rational(0) : prev))
                    throw ModelError("strikes must be positive and strictly increasing");
                prev = a.quotes[i].first;
            }
            if (a.quotes.back().second != 0)
                throw ModelError("largest strike must quote price 0");
        }
    }
};

// Piecewise-linear convex non-increasing function on [0, inf): linear
// between consecutive points, constant after the last one.
struct SupportFunction {
    std::vector<std::pair<Rational, Rational>> points;  // (x, R(x)), x increasing, x0 = 0

    Rational value(const Rational& x) const {
        if (x <= points.front().first) return points.front().second;
        for (size_t i = 0; i + 1 < points.size(); ++i) {
            const auto& [x0, y0] = points[i];
            const auto& [x1, y1] = points[i + 1];
            if (x <= x1) return y0 + (y1 - y0) / (x1 - x0) * (x - x0);
        }
        return points.back().second;
    }

    // Slope on segment i, between points[i] and points[i+1].
    std::vector<Rational> slopes() const {
        std::vector<Rational> s;
        for (size_t i = 0; i + 1 < points.size(); ++i)
            s.push_back((points[i + 1].second - points[i].second) /
                        (points[i + 1].first - points[i].first));
        return s;
    }
};

struct DiscreteMarginal {
    std::vector<std::pair<Rational, Rational>> atoms;  // (location, mass), locations increasing

    Rational mass() const {
        Rational m(0);
        for (const auto& [x, w] : atoms) m += w;
        return m;
    }
    Rational mean() const {
        Rational m(0);
        for (const auto& [x, w] : atoms) m += x * w;
        return m;
    }
    Rational call_price(const Rational& k) const {
        Rational v(0);
        for (const auto& [x, w] : atoms)
            if (x > k) v += w * (x - k);
        return v;
    }
};

// Static position in the quoted instruments of one asset: cash, underlying
// and calls; payoff is piecewise linear on [0, inf).
struct StaticPortfolio {
    Rational cash;
    Rational asset_qty;
    std::vector<std::pair<Rational, Rational>> calls;  // (strike, quantity)
    Rational cost;

    Rational payoff(const Rational& s) const {
        Rational v = cash + asset_qty * s;
        for (const auto& [k, q] : calls)
            if (s > k) v += q * (s - k);
        return v;
    }

    // Exact nonnegativity on [0, inf): checked at every kink and at the
    // asymptotic slope.
    bool payoff_nonnegative() const {
        if (payoff(Rational(0)) < 0) return false;
        Rational slope_inf = asset_qty;
        for (const auto& [k, q] : calls) {
            if (payoff(k) < 0) return false;
            slope_inf += q;
        }
        return slope_inf >= 0;
    }
};

enum class QuoteVerdict { Consistent, Arbitrage };

struct QuoteViolation {
    enum Type { NegativePrice, CallSpread, Butterfly, SlopeBound } type;
    int asset;
    std::vector<Rational> strikes;
    StaticPortfolio portfolio;
};

struct QuoteDiagnostics {
    QuoteVerdict verdict = QuoteVerdict::Consistent;
    std::vector<QuoteViolation> violations;
    // Quotes strictly above the envelope: super-replicable, not arbitrage.
    std::vector<std::pair<int, Rational>> non_binding;  // (asset, strike)
};

// Lower convex hull of the anchored quote points, trailing positive slopes
// flattened; the maximal convex non-increasing minorant of the quotes with
// R(0) = spot.
inline SupportFunction support_function(const CallQuoteSheet& sheet, int asset) {
    const auto& a = sheet.assets.at(static_cast<size_t>(asset));
    std::vector<std::pair<Rational, Rational>> pts;
    pts.push_back({Rational(0), a.spot});
    for (const auto& q : a.quotes) pts.push_back(q);

    std::vector<std::pair<Rational, Rational>> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2) {
            const auto& [x1, y1] = hull[hull.size() - 2];
            const auto& [x2, y2] = hull[hull.size() - 1];
            // Drop the middle point when it lies on or above the chord.
            if ((y2 - y1) * (p.first - x1) >= (p.second - y1) * (x2 - x1))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    // Non-increasing clip: truncate after the first minimum; the function
    // is constant from there on.
    size_t cut = 0;
    for (size_t i = 1; i < hull.size(); ++i)
        if (hull[i].second < hull[cut].second) cut = i;
    hull.resize(cut + 1);
    return SupportFunction{std::move(hull)};
}

// Breeden-Litzenberger: atoms at the slope breakpoints of R, with masses
// equal to the slope jumps; the initial jump is taken from slope -1 at 0.
inline DiscreteMarginal implied_marginal(const SupportFunction& r) {
    if (r.points.empty() || r.points.front().first != 0)
        throw ModelError("support function must be anchored at strike 0");
    const Rational spot = r.points.front().second;
    const auto slopes = r.slopes();

    DiscreteMarginal mu;
    Rational prev(-1);
    for (size_t i = 0; i < slopes.size(); ++i) {
        if (slopes[i] < prev)
            throw ModelError("support function not convex or slope below -1");
        const Rational jump = slopes[i] - prev;
        if (jump > 0) mu.atoms.push_back({r.points[i].first, jump});
        prev = slopes[i];
    }
    if (prev > 0) throw ModelError("support function increasing");
    const Rational final_jump = Rational(0) - prev;
    if (final_jump > 0) mu.atoms.push_back({r.points.back().first, final_jump});
    if (slopes.empty()) {
        // Single anchored point: R constant; only consistent when spot puts
        // all mass at 0, which contradicts spot > 0.
        throw ModelError("degenerate support function without quotes");
    }

    if (mu.mass() != 1)
        throw ModelError("implied marginal mass is not 1");
    if (mu.mean() != spot)
        throw ModelError("implied marginal mean differs from spot; envelope does not reach 0");
    return mu;
}

inline QuoteDiagnostics quote_diagnostics(const CallQuoteSheet& sheet) {
    QuoteDiagnostics diag;
    for (size_t j = 0; j < sheet.assets.size(); ++j) {
        const auto& a = sheet.assets[j];
        const int aj = static_cast<int>(j);

        for (const auto& [k, c] : a.quotes) {
            if (c >= 0) continue;
            StaticPortfolio p{Rational(0), Rational(0), {{k, Rational(1)}}, c};
            diag.violations.push_back({QuoteViolation::NegativePrice, aj, {k}, p});
        }
        for (size_t i = 0; i + 1 < a.quotes.size(); ++i) {
            const auto& [k1, c1] = a.quotes[i];
            const auto& [k2, c2] = a.quotes[i + 1];
            if (c2 > c1) {
                // Long the lower strike, short the upper: payoff >= 0.
                StaticPortfolio p{Rational(0), Rational(0),
                                  {{k1, Rational(1)}, {k2, Rational(-1)}}, c1 - c2};
                diag.violations.push_back({QuoteViolation::CallSpread, aj, {k1, k2}, p});
            }
        }
        for (size_t i = 0; i + 2 < a.quotes.size(); ++i) {
            const auto& [k1, c1] = a.quotes[i];
            const auto& [k2, c2] = a.quotes[i + 1];
            const auto& [k3, c3] = a.quotes[i + 2];
            const Rational lam = (k3 - k2) / (k3 - k1);
            const Rational mix = lam * c1 + (Rational(1) - lam) * c3;
            if (c2 > mix) {
                StaticPortfolio p{Rational(0), Rational(0),
                                  {{k1, lam}, {k2, Rational(-1)}, {k3, Rational(1) - lam}},
                                  mix - c2};
                diag.violations.push_back({QuoteViolation::Butterfly, aj, {k1, k2, k3}, p});
            }
        }
        // Slope bound against the strike-0 anchor and between quotes: a
        // call price may not fall faster than the strike widens.
        Rational prev_k(0), prev_c = a.spot;
        bool prev_is_anchor = true;
        for (const auto& [k, c] : a.quotes) {
            if (prev_c - c > k - prev_k) {
                StaticPortfolio p;
                p.cash = k - prev_k;
                if (prev_is_anchor)
                    p.asset_qty = Rational(-1);
                else
                    p.calls.push_back({prev_k, Rational(-1)});
                p.calls.push_back({k, Rational(1)});
                p.cost = c - prev_c + (k - prev_k);
                diag.violations.push_back({QuoteViolation::SlopeBound, aj, {prev_k, k}, p});
            }
            prev_k = k;
            prev_c = c;
            prev_is_anchor = false;
        }
        // Informational: quotes the envelope cannot touch.
        const auto r = support_function(sheet, aj);
        for (const auto& [k, c] : a.quotes)
            if (r.value(k) < c) diag.non_binding.push_back({aj, k});
    }
    if (!diag.violations.empty()) diag.verdict = QuoteVerdict::Arbitrage;
    return diag;
}

enum class ConvexOrder { Ordered, NotOrdered };

// mu <=_c nu for atomic marginals: equal means and ordered call functions
// on the joint atom grid (sufficient for piecewise-linear call functions).
inline ConvexOrder convex_order_check(const DiscreteMarginal& mu, const DiscreteMarginal& nu) {
    if (mu.mean() != nu.mean()) return ConvexOrder::NotOrdered;
    std::set<Rational> grid;
    for (const auto& [x, w] : mu.atoms) grid.insert(x);
    for (const auto& [x, w] : nu.atoms) grid.insert(x);
    for (const auto& k : grid)
        if (mu.call_price(k) > nu.call_price(k)) return ConvexOrder::NotOrdered;
    return ConvexOrder::Ordered;
}

// Independent feasibility route: exact LP for a one-step martingale
// coupling from mu to nu on the product grid.
inline bool martingale_coupling_feasible(const DiscreteMarginal& mu, const DiscreteMarginal& nu) {
    const size_t n = mu.atoms.size(), m = nu.atoms.size();
    LinearProgram<Rational> lp(n * m);
    lp.set_nonnegative();
    for (size_t i = 0; i < n; ++i) {
        std::vector<Rational> row(n * m, Rational(0));
        for (size_t c = 0; c < m; ++c) row[i * m + c] = Rational(1);
        lp.add_row(std::move(row), Rel::Eq, mu.atoms[i].second);
        std::vector<Rational> mart(n * m, Rational(0));
        for (size_t c = 0; c < m; ++c) mart[i * m + c] = nu.atoms[c].first - mu.atoms[i].first;
        lp.add_row(std::move(mart), Rel::Eq, Rational(0));
    }
    for (size_t c = 0; c < m; ++c) {
        std::vector<Rational> col(n * m, Rational(0));
        for (size_t i = 0; i < n; ++i) col[i * m + c] = Rational(1);
        lp.add_row(std::move(col), Rel::Eq, nu.atoms[c].second);
    }
    return solve(lp).status == LpStatus::Optimal;
}

struct SupportEnforcement {
    bool clean = true;
    std::vector<int> terminal_violations;  // leaf node indices with S_T outside the grid
    struct NodeViolation {
        int node;
        std::vector<Rational> separator;  // H with H.(x - S_t) >= 1 on the grid
        Strategy strategy;                // buy-and-hold of H over the node's subtree
    };
    std::vector<NodeViolation> node_violations;
};

// Terminal prices must lie on the product grid of the marginals;
// intermediate prices must lie in its convex hull (a box). Hull violations
// come with a strictly separating one-step strategy.
inline SupportEnforcement support_enforcement(const ScenarioTree& tree, const PriorSet& priors,
                                              const std::vector<DiscreteMarginal>& marginals) {
    if (marginals.size() != static_cast<size_t>(tree.asset_count()))
        throw ModelError("one marginal per asset required");
    const auto polar = polar_set(tree, priors);

    std::vector<std::set<Rational>> grid(marginals.size());
    std::vector<Rational> lo(marginals.size()), hi(marginals.size());
    for (size_t j = 0; j < marginals.size(); ++j) {
        for (const auto& [x, w] : marginals[j].atoms) grid[j].insert(x);
        lo[j] = marginals[j].atoms.front().first;
        hi[j] = marginals[j].atoms.back().first;
    }

    SupportEnforcement out;
    for (size_t i = 0; i < tree.num_leaves(); ++i) {
        if (polar.polar[i]) continue;
        const int leaf = tree.leaves()[i];
        for (size_t j = 0; j < marginals.size(); ++j)
            if (!grid[j].count(tree.node(leaf).prices[j])) {
                out.terminal_violations.push_back(leaf);
                break;
            }
    }

    std::vector<char> leaf_alive(tree.num_leaves());
    for (size_t i = 0; i < tree.num_leaves(); ++i) leaf_alive[i] = polar.polar[i] ? 0 : 1;
    std::vector<char> alive(tree.nodes().size(), 0);
    for (size_t i = 0; i < tree.num_leaves(); ++i)
        if (leaf_alive[i])
            for (int ix = tree.leaves()[i];; ix = tree.node(ix).parent) {
                alive[static_cast<size_t>(ix)] = 1;
                if (tree.node(ix).parent < 0) break;
            }

    for (int t = 1; t < tree.horizon(); ++t) {
        for (int nix : tree.nodes_at(t)) {
            if (!alive[static_cast<size_t>(nix)]) continue;
            std::vector<Rational> sep(marginals.size(), Rational(0));
            Rational margin(0);
            for (size_t j = 0; j < marginals.size(); ++j) {
                const Rational& s = tree.node(nix).prices[j];
                if (s > hi[j] && s - hi[j] > margin) {
                    sep.assign(marginals.size(), Rational(0));
                    sep[j] = Rational(-1);
                    margin = s - hi[j];
                } else if (s < lo[j] && lo[j] - s > margin) {
                    sep.assign(marginals.size(), Rational(0));
                    sep[j] = Rational(1);
                    margin = lo[j] - s;
                }
            }
            if (margin == 0) continue;
            for (auto& h : sep) h /= margin;  // H.(x - S_t) >= 1 on the grid
            SupportEnforcement::NodeViolation v;
            v.node = nix;
            v.separator = sep;
            v.strategy = Strategy::zero({});
            // Buy and hold H from t to T on the subtree of the violation.
            std::vector<int> stack{nix};
            while (!stack.empty()) {
                const int ix = stack.back();
                stack.pop_back();
                if (tree.node(ix).time < tree.horizon()) v.strategy.dynamic[ix] = sep;
                for (int c : tree.node(ix).children) stack.push_back(c);
            }
            out.node_violations.push_back(std::move(v));
        }
    }
    out.clean = out.terminal_violations.empty() && out.node_violations.empty();
    return out;
}

struct AssembledMarket {
    Market market;
    std::vector<DiscreteMarginal> marginals;
};

// Builds the zero-price option family from the quotes, derives the implied
// marginals and checks that every prior's terminal law has exactly the
// marginal support before assembling the market.
inline AssembledMarket assemble_market(const CallQuoteSheet& sheet, const ScenarioTree& tree,
                                       const PriorSet& priors,
                                       size_t max_kernel_expansion = 1u << 12) {
    sheet.validate();
    const auto diag = quote_diagnostics(sheet);
    if (diag.verdict != QuoteVerdict::Consistent)
        throw ModelError("quote sheet admits static arbitrage; refusing assembly");
    if (sheet.assets.size() != static_cast<size_t>(tree.asset_count()))
        throw ModelError("quote sheet asset count differs from tree");
    for (const auto& nd : tree.nodes())
        for (const auto& p : nd.prices)
            if (p < 0) throw ModelError("negative price at node " + nd.id + " (S must map to R^d_+)");

    AssembledMarket out{Market{tree, priors, {}}, {}};
    for (size_t j = 0; j < sheet.assets.size(); ++j) {
        out.marginals.push_back(implied_marginal(support_function(sheet, static_cast<int>(j))));
        for (const auto& [k, c] : sheet.assets[j].quotes) {
            StaticOption opt;
            opt.label = "call[" + std::to_string(j) + "]@" + to_fraction_string(k);
            opt.payoff.resize(tree.num_leaves());
            for (size_t i = 0; i < tree.num_leaves(); ++i) {
                const Rational s = tree.node(tree.leaves()[i]).prices[j];
                opt.payoff[i] = (s > k ? s - k : Rational(0)) - c;
            }
            out.market.options.push_back(std::move(opt));
        }
    }

    // Terminal-marginal support equality, prior by prior.
    std::set<std::vector<Rational>> grid_points;
    {
        std::vector<std::vector<Rational>> locs;
        for (const auto& mu : out.marginals) {
            std::vector<Rational> l;
            for (const auto& [x, w] : mu.atoms) l.push_back(x);
            locs.push_back(std::move(l));
        }
        std::vector<size_t> ix(locs.size(), 0);
        for (;;) {
            std::vector<Rational> pt;
            for (size_t j = 0; j < locs.size(); ++j) pt.push_back(locs[j][ix[j]]);
            grid_points.insert(std::move(pt));
            size_t j = 0;
            while (j < locs.size() && ++ix[j] == locs[j].size()) ix[j++] = 0;
            if (j == locs.size()) break;
        }
    }
    const auto flats = flat_expansion(tree, priors, max_kernel_expansion);
    for (const auto& P : flats) {
        std::set<std::vector<Rational>> attained;
        std::vector<std::string> offending;
        for (size_t i = 0; i < tree.num_leaves(); ++i) {
            if (P.weights[i] == 0) continue;
            const auto& prices = tree.node(tree.leaves()[i]).prices;
            attained.insert(prices);
            if (!grid_points.count(prices))
                offending.push_back(tree.node(tree.leaves()[i]).id);
        }
        if (!offending.empty()) {
            std::string msg = "prior terminal support leaves the implied marginal: leaves";
            for (const auto& id : offending) msg += " " + id;
            throw ModelError(msg);
        }
        if (attained != grid_points)
            throw ModelError("prior terminal support misses implied-marginal atoms");
    }
    return out;
}

}  // namespace rftap
