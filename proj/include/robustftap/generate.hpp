#pragma once

// Seeded instance generator for the randomized suites. Fully deterministic:
// draws come from a fixed 64-bit mixer, never from library distributions,
// so the same seed yields the same market on every platform.

#include "robustftap/market.hpp"
#include "robustftap/mot.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rftap {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }
    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::uint64_t state_;
};

struct GenRanges {
    int max_horizon = 3;
    int max_branching = 4;
    int max_assets = 2;
    int max_priors = 3;
    bool kernel = false;     // one-step kernel priors instead of flat measures
    int max_options = 2;

    void check_scale() const {
        if (max_horizon < 1 || max_horizon > 3 || max_branching < 2 || max_branching > 4 ||
            max_assets < 1 || max_assets > 2 || max_priors < 1 || max_priors > 4 ||
            max_options < 0 || max_options > 4)
            throw ModelError("generator ranges exceed oracle scale");
    }
};

// Half of the seeds build a calibrated instance: prices averaged backward
// under a hidden full-support product measure, options centered to zero
// expectation under it, so NA holds by construction. The other half draw
// free price moves on a coarse grid and are usually arbitrageable.
inline Market generate_market(std::uint64_t seed, const GenRanges& ranges = {}) {
    ranges.check_scale();
    Rng rng(seed);
    const int T = rng.range(1, ranges.max_horizon);
    const int d = rng.range(1, ranges.max_assets);
    const bool calibrated = rng.below(2) == 0;

    std::vector<Node> nodes;
    nodes.push_back({"n0", 0, -1, std::vector<Rational>(d, Rational(0)), {}});
    std::vector<int> frontier{0};
    int counter = 1;
    for (int t = 1; t <= T; ++t) {
        std::vector<int> next;
        for (int par : frontier) {
            const int kids = rng.range(2, ranges.max_branching);
            for (int c = 0; c < kids; ++c) {
                Node nd;
                nd.id = "n" + std::to_string(counter++);
                nd.time = t;
                nd.parent = par;
                nd.prices.assign(static_cast<size_t>(d), Rational(0));
                nodes[static_cast<size_t>(par)].children.push_back(static_cast<int>(nodes.size()));
                next.push_back(static_cast<int>(nodes.size()));
                nodes.push_back(std::move(nd));
            }
        }
        frontier = std::move(next);
    }

    // Strictly positive weights on a small integer grid, normalized exactly.
    auto positive_weights = [&](size_t n) {
        std::vector<Rational> w(n);
        Rational total(0);
        for (size_t i = 0; i < n; ++i) {
            w[i] = Rational(rng.range(1, 3));
            total += w[i];
        }
        for (auto& v : w) v /= total;
        return w;
    };
    // Weights allowed to vanish, creating polar leaves.
    auto random_weights = [&](size_t n) {
        std::vector<Rational> w(n, Rational(0));
        Rational total(0);
        for (size_t i = 0; i < n; ++i) {
            w[i] = Rational(rng.range(0, 3));
            total += w[i];
        }
        if (total == 0) {
            w[rng.below(n)] = Rational(1);
            total = Rational(1);
        }
        for (auto& v : w) v /= total;
        return w;
    };

    std::map<int, std::vector<Rational>> mart;  // calibrated mode: node -> child weights
    if (calibrated) {
        // Leaf prices on the grid, interior prices as exact conditional means.
        for (auto& nd : nodes)
            if (nd.time == T)
                for (int j = 0; j < d; ++j)
                    nd.prices[static_cast<size_t>(j)] = Rational(rng.range(1, 8), 2);
        for (size_t i = nodes.size(); i-- > 0;) {
            auto& nd = nodes[i];
            if (nd.time == T) continue;
            const auto w = positive_weights(nd.children.size());
            mart[static_cast<int>(i)] = w;
            for (int j = 0; j < d; ++j) {
                Rational mean(0);
                for (size_t c = 0; c < nd.children.size(); ++c)
                    mean += w[c] *
                            nodes[static_cast<size_t>(nd.children[c])].prices[static_cast<size_t>(j)];
                nd.prices[static_cast<size_t>(j)] = mean;
            }
        }
    } else {
        static const Rational kFactors[] = {Rational(1, 2), Rational(3, 4), Rational(1),
                                            Rational(5, 4), Rational(3, 2), Rational(2)};
        for (int j = 0; j < d; ++j)
            nodes[0].prices[static_cast<size_t>(j)] = Rational(rng.range(1, 4));
        for (size_t i = 1; i < nodes.size(); ++i)
            for (int j = 0; j < d; ++j)
                nodes[i].prices[static_cast<size_t>(j)] =
                    nodes[static_cast<size_t>(nodes[i].parent)].prices[static_cast<size_t>(j)] *
                    kFactors[rng.below(6)];
    }
    ScenarioTree tree(T, d, std::move(nodes));

    PriorSet priors = [&] {
        const int np = rng.range(1, ranges.max_priors);
        if (!ranges.kernel) {
            std::vector<Measure> ms;
            for (int p = 0; p < np; ++p) {
                auto w = calibrated ? positive_weights(tree.num_leaves())
                                    : random_weights(tree.num_leaves());
                ms.push_back(Measure::validated(tree, std::move(w)));
            }
            return PriorSet::flat_priors(std::move(ms));
        }
        KernelPriors k;
        for (const auto& nd : tree.nodes()) {
            if (nd.time == tree.horizon()) continue;
            const int ix = tree.index_of(nd.id);
            const int gens = rng.range(1, np);
            for (int g = 0; g < gens; ++g) {
                auto w = calibrated ? positive_weights(tree.node(ix).children.size())
                                    : random_weights(tree.node(ix).children.size());
                k.steps[ix].push_back(std::move(w));
            }
        }
        return PriorSet::kernel_priors(tree, std::move(k));
    }();

    std::vector<StaticOption> options;
    const int nopt = rng.range(0, ranges.max_options);
    for (int o = 0; o < nopt; ++o) {
        const int j = rng.range(0, d - 1);
        const Rational strike(rng.range(1, 8), 2);
        StaticOption opt;
        opt.label = "fwd" + std::to_string(o);
        opt.payoff.resize(tree.num_leaves());
        for (size_t i = 0; i < tree.num_leaves(); ++i)
            opt.payoff[i] =
                tree.node(tree.leaves()[i]).prices[static_cast<size_t>(j)] - strike;
        if (calibrated) {
            // Center to zero expectation under the hidden product measure.
            Rational mean(0);
            for (size_t i = 0; i < tree.num_leaves(); ++i) {
                Rational mass(1);
                for (int ix = tree.leaves()[i]; tree.node(ix).parent >= 0;
                     ix = tree.node(ix).parent) {
                    const int par = tree.node(ix).parent;
                    const auto& kids = tree.node(par).children;
                    for (size_t c = 0; c < kids.size(); ++c)
                        if (kids[c] == ix) mass *= mart.at(par)[c];
                }
                mean += mass * opt.payoff[i];
            }
            for (auto& v : opt.payoff) v -= mean;
        }
        options.push_back(std::move(opt));
    }
    return Market{std::move(tree), std::move(priors), std::move(options)};
}

// Random claim on a grid of small rationals.
inline Claim generate_claim(std::uint64_t seed, const ScenarioTree& tree) {
    Rng rng(seed * 0x100000001b3ull + 0xcbf29ce484222325ull);
    Claim x = Claim::constant(tree, Rational(0));
    for (auto& v : x.values) v = Rational(rng.range(-4, 8), 2);
    return x;
}

// Random consistent quote sheet: draws a marginal first, then quotes its
// exact call prices at the atom strikes (the envelope touches every quote).
inline CallQuoteSheet generate_consistent_sheet(std::uint64_t seed, int max_strikes = 8) {
    Rng rng(seed * 0x9e3779b97f4a7c15ull + 17);
    const int n = rng.range(2, max_strikes);
    DiscreteMarginal mu;
    Rational x(0);
    for (int i = 0; i < n; ++i) {
        x += Rational(rng.range(1, 4), 2);
        mu.atoms.push_back({x, Rational(rng.range(1, 4))});
    }
    Rational total(0);
    for (auto& [loc, m] : mu.atoms) total += m;
    for (auto& [loc, m] : mu.atoms) m /= total;

    CallQuotes a;
    a.spot = mu.mean();
    for (size_t i = 1; i < mu.atoms.size(); ++i)
        a.quotes.push_back({mu.atoms[i - 1].first, mu.call_price(mu.atoms[i - 1].first)});
    a.quotes.push_back({mu.atoms.back().first, Rational(0)});
    return CallQuoteSheet{{std::move(a)}};
}

// Random marginal with positive masses on an increasing grid.
inline DiscreteMarginal generate_marginal(std::uint64_t seed, int max_atoms = 8) {
    Rng rng(seed ^ 0xa5a5a5a55a5a5a5aull);
    const int n = rng.range(1, max_atoms);
    DiscreteMarginal mu;
    Rational x(rng.range(0, 2));
    Rational total(0);
    for (int i = 0; i < n; ++i) {
        const Rational m(rng.range(1, 4));
        mu.atoms.push_back({x, m});
        total += m;
        x += Rational(rng.range(1, 4), 2);
    }
    for (auto& [loc, m] : mu.atoms) m /= total;
    return mu;
}

}  // namespace rftap
