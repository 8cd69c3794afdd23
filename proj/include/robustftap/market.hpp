#pragma once

// Scenario-tree market model: filtration, price process, static options,
// prior sets (flat measures or one-step kernel families), polar sets,
// quasi-sure comparison and the weight function W.

#include "robustftap/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rftap {

struct Node {
    std::string id;
    int time = 0;
    int parent = -1;  // index; -1 for the root
    std::vector<Rational> prices;
    std::vector<int> children;
};

class ScenarioTree {
public:
    ScenarioTree(int horizon, int asset_count, std::vector<Node> nodes)
        : horizon_(horizon), asset_count_(asset_count), nodes_(std::move(nodes)) {
        validate();
    }

    int horizon() const { return horizon_; }
    int asset_count() const { return asset_count_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(int ix) const { return nodes_[static_cast<size_t>(ix)]; }
    int root() const { return root_; }
    const std::vector<int>& leaves() const { return leaves_; }
    size_t num_leaves() const { return leaves_.size(); }
    const std::vector<int>& nodes_at(int time) const { return by_time_[static_cast<size_t>(time)]; }

    int index_of(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) throw ModelError("unknown node id: " + id);
        return it->second;
    }

    // Position of a leaf node index within leaves(), the canonical leaf order.
    int leaf_ordinal(int node_ix) const {
        auto it = leaf_ordinal_.find(node_ix);
        if (it == leaf_ordinal_.end()) throw ModelError("node is not a leaf: " + node(node_ix).id);
        return it->second;
    }
    bool is_leaf(int node_ix) const { return leaf_ordinal_.count(node_ix) > 0; }

    // Nodes on the root-to-leaf path, times 0..T inclusive.
    std::vector<int> path_to(int leaf_ix) const {
        std::vector<int> path;
        for (int ix = leaf_ix; ix >= 0; ix = node(ix).parent) path.push_back(ix);
        std::reverse(path.begin(), path.end());
        return path;
    }

    // Ancestor of a leaf at the given time.
    int ancestor_at(int leaf_ix, int time) const {
        int ix = leaf_ix;
        while (node(ix).time > time) ix = node(ix).parent;
        return ix;
    }

private:
    void validate() {
        if (horizon_ < 1) throw ModelError("horizon must be >= 1");
        if (asset_count_ < 1) throw ModelError("asset count must be >= 1");
        by_time_.assign(static_cast<size_t>(horizon_) + 1, {});
        for (size_t i = 0; i < nodes_.size(); ++i) {
            const Node& nd = nodes_[i];
            if (by_id_.count(nd.id)) throw ModelError("duplicate node id: " + nd.id);
            by_id_[nd.id] = static_cast<int>(i);
            if (nd.time < 0 || nd.time > horizon_)
                throw ModelError("node time out of range: " + nd.id);
            if (nd.prices.size() != static_cast<size_t>(asset_count_))
                throw ModelError("price vector arity mismatch at node " + nd.id);
            if (nd.time == 0) {
                if (root_ >= 0) throw ModelError("more than one root node");
                if (nd.parent != -1) throw ModelError("root must have no parent");
                root_ = static_cast<int>(i);
            }
            by_time_[static_cast<size_t>(nd.time)].push_back(static_cast<int>(i));
        }
        if (root_ < 0) throw ModelError("no root node");
        for (size_t i = 0; i < nodes_.size(); ++i) {
            Node& nd = nodes_[i];
            if (nd.time > 0) {
                if (nd.parent < 0 || nd.parent >= static_cast<int>(nodes_.size()))
                    throw ModelError("bad parent at node " + nd.id);
                const Node& p = nodes_[static_cast<size_t>(nd.parent)];
                if (p.time != nd.time - 1)
                    throw ModelError("parent of " + nd.id + " is not one period earlier");
            }
        }
        // Rebuild children from parent links; the input lists are advisory.
        for (auto& nd : nodes_) nd.children.clear();
        for (size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].parent >= 0)
                nodes_[static_cast<size_t>(nodes_[i].parent)].children.push_back(static_cast<int>(i));
        for (size_t i = 0; i < nodes_.size(); ++i) {
            const Node& nd = nodes_[i];
            if (nd.time < horizon_ && nd.children.empty())
                throw ModelError("interior node without children: " + nd.id);
            if (nd.time == horizon_ && !nd.children.empty())
                throw ModelError("leaf node with children: " + nd.id);
            if (nd.time == horizon_) {
                leaf_ordinal_[static_cast<int>(i)] = static_cast<int>(leaves_.size());
                leaves_.push_back(static_cast<int>(i));
            }
        }
    }

    int horizon_;
    int asset_count_;
    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<int> leaves_;
    std::map<std::string, int> by_id_;
    std::map<int, int> leaf_ordinal_;
    std::vector<std::vector<int>> by_time_;
};

// Payoff with price normalized to zero; values indexed by leaf ordinal.
struct StaticOption {
    std::string label;
    std::vector<Rational> payoff;
};

// Probability on the leaves; weights indexed by leaf ordinal, summing to 1.
struct Measure {
    std::vector<Rational> weights;

    static Measure validated(const ScenarioTree& tree, std::vector<Rational> w) {
        if (w.size() != tree.num_leaves()) throw ModelError("measure arity mismatch");
        Rational total(0);
        for (const auto& v : w) {
            if (v < 0) throw ModelError("negative measure weight");
            total += v;
        }
        if (total != 1) throw ModelError("measure weights must sum to 1");
        return Measure{std::move(w)};
    }
};

// One-step kernel family: for each interior node, a nonempty finite set of
// measures on its children (weights aligned with Node::children order).
struct KernelPriors {
    std::map<int, std::vector<std::vector<Rational>>> steps;
};

struct PriorSet {
    std::variant<std::vector<Measure>, KernelPriors> data;
    std::vector<std::string> names;  // flat form only; may be empty

    bool is_flat() const { return std::holds_alternative<std::vector<Measure>>(data); }
    const std::vector<Measure>& flat() const { return std::get<std::vector<Measure>>(data); }
    const KernelPriors& kernel() const { return std::get<KernelPriors>(data); }

    static PriorSet flat_priors(std::vector<Measure> ms, std::vector<std::string> names = {}) {
        if (ms.empty()) throw ModelError("prior set must be nonempty");
        return PriorSet{std::move(ms), std::move(names)};
    }

    static PriorSet kernel_priors(const ScenarioTree& tree, KernelPriors k) {
        for (const auto& nix : tree.leaves())
            if (k.steps.count(nix)) throw ModelError("kernel attached to a leaf node");
        for (const auto& nd : tree.nodes()) {
            if (nd.time == tree.horizon()) continue;
            const int ix = tree.index_of(nd.id);
            auto it = k.steps.find(ix);
            if (it == k.steps.end() || it->second.empty())
                throw ModelError("interior node without one-step priors: " + nd.id);
            for (const auto& step : it->second) {
                if (step.size() != nd.children.size())
                    throw ModelError("one-step measure arity mismatch at node " + nd.id);
                Rational total(0);
                for (const auto& w : step) {
                    if (w < 0) throw ModelError("negative one-step weight at node " + nd.id);
                    total += w;
                }
                if (total != 1) throw ModelError("one-step weights must sum to 1 at node " + nd.id);
            }
        }
        return PriorSet{std::move(k), {}};
    }
};

// Terminal payoff, indexed by leaf ordinal.
struct Claim {
    std::vector<Rational> values;

    static Claim constant(const ScenarioTree& tree, Rational c) {
        return Claim{std::vector<Rational>(tree.num_leaves(), std::move(c))};
    }
};

struct PolarStructure {
    std::vector<bool> polar;  // by leaf ordinal
    std::vector<int> polar_leaves;
    std::vector<int> qs_support;  // node indices of non-polar leaves

    bool all_polar() const { return qs_support.empty(); }
};

struct Market {
    ScenarioTree tree;
    PriorSet priors;
    std::vector<StaticOption> options;
};

inline PolarStructure polar_set(const ScenarioTree& tree, const PriorSet& priors) {
    const size_t L = tree.num_leaves();
    std::vector<bool> polar(L, true);
    if (priors.is_flat()) {
        for (const auto& m : priors.flat()) {
            if (m.weights.size() != L) throw ModelError("prior measure arity mismatch");
            for (size_t i = 0; i < L; ++i)
                if (m.weights[i] > 0) polar[i] = false;
        }
    } else {
        // A leaf is reachable iff every edge along its path gets positive
        // mass under some one-step measure of its parent node.
        const auto& k = priors.kernel();
        for (size_t i = 0; i < L; ++i) {
            const int leaf = tree.leaves()[i];
            bool reachable = true;
            for (int ix = leaf; tree.node(ix).parent >= 0 && reachable;
                 ix = tree.node(ix).parent) {
                const int par = tree.node(ix).parent;
                const auto& steps = k.steps.at(par);
                const auto& kids = tree.node(par).children;
                const size_t pos = static_cast<size_t>(
                    std::find(kids.begin(), kids.end(), ix) - kids.begin());
                bool edge_hit = false;
                for (const auto& step : steps)
                    if (step[pos] > 0) { edge_hit = true; break; }
                reachable = edge_hit;
            }
            polar[i] = !reachable;
        }
    }
    PolarStructure ps;
    ps.polar = polar;
    for (size_t i = 0; i < L; ++i)
        (polar[i] ? ps.polar_leaves : ps.qs_support).push_back(tree.leaves()[i]);
    return ps;
}

// W = 1 + sum_{t=1..T} sum_j |S_t^j| + sum_i |phi_i|, per leaf.
inline Claim weight_W(const ScenarioTree& tree, const std::vector<StaticOption>& options) {
    Claim w = Claim::constant(tree, Rational(1));
    for (size_t i = 0; i < tree.num_leaves(); ++i) {
        const int leaf = tree.leaves()[i];
        for (int ix = leaf; tree.node(ix).time > 0; ix = tree.node(ix).parent)
            for (const auto& p : tree.node(ix).prices) w.values[i] += rational_abs(p);
        for (const auto& opt : options) w.values[i] += rational_abs(opt.payoff[i]);
    }
    return w;
}

enum class QsOrder { LE, GE, EQ, INCOMPARABLE };

inline QsOrder qs_compare(const Claim& x, const Claim& y, const PolarStructure& polar) {
    if (x.values.size() != y.values.size() || x.values.size() != polar.polar.size())
        throw ModelError("claims on different trees");
    bool some_lt = false, some_gt = false;
    for (size_t i = 0; i < x.values.size(); ++i) {
        if (polar.polar[i]) continue;
        if (x.values[i] < y.values[i]) some_lt = true;
        if (x.values[i] > y.values[i]) some_gt = true;
    }
    if (!some_lt && !some_gt) return QsOrder::EQ;
    if (!some_gt) return QsOrder::LE;
    if (!some_lt) return QsOrder::GE;
    return QsOrder::INCOMPARABLE;
}

// Semi-static strategy: dynamic holdings keyed by the node where the
// position is entered (time t-1 for the step to time t), plus static
// option weights.
struct Strategy {
    std::map<int, std::vector<Rational>> dynamic;  // node index -> H in R^d
    std::vector<Rational> static_weights;          // h in R^m

    static Strategy zero(const std::vector<StaticOption>& options) {
        Strategy s;
        s.static_weights.assign(options.size(), Rational(0));
        return s;
    }
};

// (H . S)_T + h . Phi, leaf by leaf. (H . S)_0 = 0 by construction.
inline Claim portfolio_value(const ScenarioTree& tree, const Strategy& strategy,
                             const std::vector<StaticOption>& options) {
    if (strategy.static_weights.size() != options.size())
        throw ModelError("static weight arity mismatch");
    for (const auto& [ix, h] : strategy.dynamic) {
        if (h.size() != static_cast<size_t>(tree.asset_count()))
            throw ModelError("dynamic holding arity mismatch at node " + tree.node(ix).id);
        if (tree.node(ix).time >= tree.horizon())
            throw ModelError("dynamic holding keyed on a leaf node");
    }
    Claim out = Claim::constant(tree, Rational(0));
    for (size_t i = 0; i < tree.num_leaves(); ++i) {
        const int leaf = tree.leaves()[i];
        Rational v(0);
        for (int ix = leaf; tree.node(ix).parent >= 0; ix = tree.node(ix).parent) {
            const int par = tree.node(ix).parent;
            auto it = strategy.dynamic.find(par);
            if (it == strategy.dynamic.end()) continue;
            for (int j = 0; j < tree.asset_count(); ++j)
                v += it->second[static_cast<size_t>(j)] *
                     (tree.node(ix).prices[static_cast<size_t>(j)] -
                      tree.node(par).prices[static_cast<size_t>(j)]);
        }
        for (size_t o = 0; o < options.size(); ++o)
            v += strategy.static_weights[o] * options[o].payoff[i];
        out.values[i] = v;
    }
    return out;
}

// All product measures obtainable by selecting one generator per interior
// node. Exponential in the tree size; oracle use only.
inline std::vector<Measure> flat_expansion(const ScenarioTree& tree, const PriorSet& priors,
                                           size_t max_selections = 1u << 14) {
    if (priors.is_flat()) return priors.flat();
    const auto& k = priors.kernel();
    std::vector<int> interior;
    for (const auto& nd : tree.nodes())
        if (nd.time < tree.horizon()) interior.push_back(tree.index_of(nd.id));

    size_t count = 1;
    for (int ix : interior) {
        count *= k.steps.at(ix).size();
        if (count > max_selections)
            throw ModelError("kernel expansion beyond oracle scale");
    }

    std::vector<Measure> out;
    std::vector<size_t> choice(interior.size(), 0);
    for (size_t sel = 0; sel < count; ++sel) {
        std::map<int, const std::vector<Rational>*> chosen;
        for (size_t i = 0; i < interior.size(); ++i)
            chosen[interior[i]] = &k.steps.at(interior[i])[choice[i]];
        std::vector<Rational> w(tree.num_leaves(), Rational(0));
        for (size_t li = 0; li < tree.num_leaves(); ++li) {
            Rational mass(1);
            for (int ix = tree.leaves()[li]; tree.node(ix).parent >= 0;
                 ix = tree.node(ix).parent) {
                const int par = tree.node(ix).parent;
                const auto& kids = tree.node(par).children;
                const size_t pos = static_cast<size_t>(
                    std::find(kids.begin(), kids.end(), ix) - kids.begin());
                mass *= (*chosen.at(par))[pos];
                if (mass == 0) break;
            }
            w[li] = mass;
        }
        out.push_back(Measure{std::move(w)});
        for (size_t i = 0; i < interior.size(); ++i) {
            if (++choice[i] < k.steps.at(interior[i]).size()) break;
            choice[i] = 0;
        }
    }
    return out;
}

}  // namespace rftap
