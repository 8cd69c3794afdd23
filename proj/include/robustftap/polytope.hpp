#pragma once

// Row system of the calibrated martingale polytope over the quasi-sure
// support: mass 1, per-node-event martingale increments, zero expectation
// for every static option. One node-event row per interior node spans the
// whole sigma-algebra at that date on a tree.

#include "robustftap/lp.hpp"
#include "robustftap/market.hpp"

#include <vector>

namespace rftap {

struct MtgSystem {
    struct RowDesc {
        enum Kind { Mass, Martingale, Calibration } kind = Mass;
        int node = -1;    // Martingale: interior node index
        int asset = -1;   // Martingale: asset index
        int option = -1;  // Calibration: option index
    };

    std::vector<int> support;                 // leaf ordinals (columns)
    std::vector<std::vector<Rational>> rows;  // per row, coefficients over support
    std::vector<Rational> rhs;
    std::vector<RowDesc> descs;

    // Base LP over Q >= 0 with the system's equality rows; callers set the
    // objective.
    LinearProgram<Rational> base_lp() const {
        LinearProgram<Rational> lp(support.size());
        lp.set_nonnegative();
        for (size_t r = 0; r < rows.size(); ++r) lp.add_row(rows[r], Rel::Eq, rhs[r]);
        return lp;
    }
};

inline MtgSystem build_mtg_system(const ScenarioTree& tree,
                                  const std::vector<StaticOption>& options,
                                  const PolarStructure& polar) {
    MtgSystem sys;
    for (size_t i = 0; i < tree.num_leaves(); ++i)
        if (!polar.polar[i]) sys.support.push_back(static_cast<int>(i));
    const size_t n = sys.support.size();

    sys.rows.push_back(std::vector<Rational>(n, Rational(1)));
    sys.rhs.push_back(Rational(1));
    sys.descs.push_back({MtgSystem::RowDesc::Mass, -1, -1, -1});

    for (int t = 0; t < tree.horizon(); ++t) {
        for (int nix : tree.nodes_at(t)) {
            for (int j = 0; j < tree.asset_count(); ++j) {
                std::vector<Rational> row(n, Rational(0));
                bool nontrivial = false;
                for (size_t c = 0; c < n; ++c) {
                    const int leaf = tree.leaves()[static_cast<size_t>(sys.support[c])];
                    const int anc = tree.ancestor_at(leaf, t);
                    if (anc != nix) continue;
                    const int child = tree.ancestor_at(leaf, t + 1);
                    row[c] = tree.node(child).prices[static_cast<size_t>(j)] -
                             tree.node(nix).prices[static_cast<size_t>(j)];
                    if (row[c] != 0) nontrivial = true;
                }
                if (!nontrivial) continue;
                sys.rows.push_back(std::move(row));
                sys.rhs.push_back(Rational(0));
                sys.descs.push_back({MtgSystem::RowDesc::Martingale, nix, j, -1});
            }
        }
    }
    for (size_t o = 0; o < options.size(); ++o) {
        std::vector<Rational> row(n);
        for (size_t c = 0; c < n; ++c)
            row[c] = options[o].payoff[static_cast<size_t>(sys.support[c])];
        sys.rows.push_back(std::move(row));
        sys.rhs.push_back(Rational(0));
        sys.descs.push_back({MtgSystem::RowDesc::Calibration, -1, -1, static_cast<int>(o)});
    }
    return sys;
}

// Translates dual multipliers on the system's rows into the semi-static
// strategy whose terminal payoff is sum_r y_r * (row payoff).
inline Strategy strategy_from_duals(const ScenarioTree& tree,
                                    const std::vector<StaticOption>& options,
                                    const MtgSystem& sys, const std::vector<Rational>& y,
                                    const Rational& scale = Rational(1)) {
    Strategy s = Strategy::zero(options);
    for (size_t r = 0; r < sys.rows.size(); ++r) {
        const auto& d = sys.descs[r];
        if (d.kind == MtgSystem::RowDesc::Martingale) {
            auto& h = s.dynamic[d.node];
            if (h.empty()) h.assign(static_cast<size_t>(tree.asset_count()), Rational(0));
            h[static_cast<size_t>(d.asset)] += scale * y[r];
        } else if (d.kind == MtgSystem::RowDesc::Calibration) {
            s.static_weights[static_cast<size_t>(d.option)] += scale * y[r];
        }
    }
    return s;
}

// Expands a support-indexed LP solution into a full measure on the leaves.
inline Measure measure_from_support(const ScenarioTree& tree, const MtgSystem& sys,
                                    const std::vector<Rational>& q) {
    std::vector<Rational> w(tree.num_leaves(), Rational(0));
    for (size_t c = 0; c < sys.support.size(); ++c)
        w[static_cast<size_t>(sys.support[c])] = q[c];
    return Measure::validated(tree, std::move(w));
}

}  // namespace rftap
