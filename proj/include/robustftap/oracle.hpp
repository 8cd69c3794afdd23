#pragma once

// Brute-force referee for the NA verdict at small scale. Two independent
// routes must agree: per-leaf arbitrage-strategy feasibility (the Farkas
// alternative, solved in strategy space) and per-leaf mass maximization
// over the martingale polytope, cross-checked against explicit vertex
// enumeration of the polytope when the support is small enough.

#include "robustftap/lp.hpp"
#include "robustftap/market.hpp"
#include "robustftap/parallel.hpp"
#include "robustftap/polytope.hpp"

#include <vector>

namespace rftap {

struct OracleVerdict {
    bool no_arbitrage = true;
    // Per support position: true when some calibrated martingale measure
    // charges the leaf.
    std::vector<bool> leaf_charged;
};

namespace detail {

// All vertices of {Q >= 0, A Q = b} as basic feasible solutions; the
// polytope is bounded (mass row), so per-leaf maxima are attained here.
inline std::vector<std::vector<Rational>> polytope_vertices(const MtgSystem& sys,
                                                            size_t max_combos = 200000) {
    const size_t n = sys.support.size();
    const size_t m = sys.rows.size();

    // Row-reduce [A | b] to find the rank and an independent row set.
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(n + 1));
    for (size_t r = 0; r < m; ++r) {
        for (size_t c = 0; c < n; ++c) a[r][c] = sys.rows[r][c];
        a[r][n] = sys.rhs[r];
    }
    size_t rank = 0;
    for (size_t c = 0; c < n && rank < m; ++c) {
        size_t piv = rank;
        while (piv < m && a[piv][c] == 0) ++piv;
        if (piv == m) continue;
        std::swap(a[rank], a[piv]);
        for (size_t r = 0; r < m; ++r) {
            if (r == rank || a[r][c] == 0) continue;
            const Rational f = a[r][c] / a[rank][c];
            for (size_t k = c; k <= n; ++k) a[r][k] -= f * a[rank][k];
        }
        ++rank;
    }
    for (size_t r = rank; r < m; ++r)
        if (a[r][n] != 0) return {};  // inconsistent system: empty polytope

    std::vector<std::vector<Rational>> vertices;
    std::vector<size_t> pick(rank);
    for (size_t i = 0; i < rank; ++i) pick[i] = i;
    size_t combos = 0;
    auto advance = [&] {
        size_t i = rank;
        while (i-- > 0) {
            if (++pick[i] <= n - (rank - i)) {
                for (size_t k = i + 1; k < rank; ++k) pick[k] = pick[k - 1] + 1;
                return true;
            }
        }
        return false;
    };
    if (rank == 0) return {std::vector<Rational>(n, Rational(0))};
    do {
        if (++combos > max_combos) throw ModelError("vertex enumeration beyond oracle scale");
        // Solve the reduced system restricted to the picked columns.
        std::vector<std::vector<Rational>> s(rank, std::vector<Rational>(rank + 1));
        for (size_t r = 0; r < rank; ++r) {
            for (size_t c = 0; c < rank; ++c) s[r][c] = a[r][pick[c]];
            s[r][rank] = a[r][n];
        }
        bool singular = false;
        for (size_t c = 0; c < rank && !singular; ++c) {
            size_t piv = c;
            while (piv < rank && s[piv][c] == 0) ++piv;
            if (piv == rank) { singular = true; break; }
            std::swap(s[c], s[piv]);
            for (size_t r = 0; r < rank; ++r) {
                if (r == c || s[r][c] == 0) continue;
                const Rational f = s[r][c] / s[c][c];
                for (size_t k = c; k <= rank; ++k) s[r][k] -= f * s[c][k];
            }
        }
        if (singular) continue;
        std::vector<Rational> q(n, Rational(0));
        bool feasible = true;
        for (size_t c = 0; c < rank; ++c) {
            const Rational v = s[c][rank] / s[c][c];
            if (v < 0) { feasible = false; break; }
            q[pick[c]] = v;
        }
        if (!feasible) continue;
        // Verify against the full original system.
        for (size_t r = 0; r < m && feasible; ++r) {
            Rational lhs(0);
            for (size_t c = 0; c < n; ++c) lhs += sys.rows[r][c] * q[c];
            feasible = lhs == sys.rhs[r];
        }
        if (feasible) vertices.push_back(std::move(q));
    } while (advance());
    return vertices;
}

}  // namespace detail

inline OracleVerdict oracle_na(const Market& market) {
    const auto& tree = market.tree;
    if (tree.num_leaves() > 64 || tree.asset_count() > 2)
        throw ModelError("oracle scale exceeded (<= 64 leaves, d <= 2)");
    const auto polar = polar_set(tree, market.priors);
    if (polar.all_polar()) throw ModelError("vacuous market: every leaf is polar");
    const auto sys = build_mtg_system(tree, market.options, polar);
    const size_t n = sys.support.size();

    // Route 1, strategy space: arbitrage charging leaf position p exists
    // iff some y on the non-mass rows has payoff >= 0 on the support and
    // >= 1 at p. The non-mass rows span exactly the attainable payoffs.
    std::vector<size_t> gen_rows;
    for (size_t r = 0; r < sys.rows.size(); ++r)
        if (sys.descs[r].kind != MtgSystem::RowDesc::Mass) gen_rows.push_back(r);
    std::vector<char> strategy_hits(n);
    parallel_for(n, [&](size_t p) {
        LinearProgram<Rational> lp(gen_rows.size());  // free variables
        for (size_t c = 0; c < n; ++c) {
            std::vector<Rational> row(gen_rows.size());
            for (size_t g = 0; g < gen_rows.size(); ++g) row[g] = sys.rows[gen_rows[g]][c];
            lp.add_row(std::move(row), Rel::Ge, c == p ? Rational(1) : Rational(0));
        }
        strategy_hits[p] = solve(lp).status == LpStatus::Optimal;
    });

    // Route 2, measure space: max Q(p) over the polytope.
    std::vector<char> measure_charged(n);
    parallel_for(n, [&](size_t p) {
        auto lp = sys.base_lp();
        lp.sense = Sense::Maximize;
        lp.objective[p] = Rational(1);
        const auto out = solve(lp);
        measure_charged[p] = out.status == LpStatus::Optimal && out.value > 0;
    });

    for (size_t p = 0; p < n; ++p)
        if (strategy_hits[p] == measure_charged[p])
            throw ModelError("oracle routes disagree at leaf " +
                             tree.node(tree.leaves()[static_cast<size_t>(sys.support[p])]).id);

    // Route 3, explicit vertices, at very small scale.
    if (n <= 10) {
        const auto vertices = detail::polytope_vertices(sys);
        for (size_t p = 0; p < n; ++p) {
            bool hit = false;
            for (const auto& v : vertices)
                if (v[p] > 0) { hit = true; break; }
            if (hit != measure_charged[p])
                throw ModelError("vertex oracle disagrees at leaf " +
                                 tree.node(tree.leaves()[static_cast<size_t>(sys.support[p])]).id);
        }
    }

    OracleVerdict verdict;
    verdict.leaf_charged.assign(measure_charged.begin(), measure_charged.end());
    for (bool c : measure_charged)
        if (!c) verdict.no_arbitrage = false;
    return verdict;
}

}  // namespace rftap
