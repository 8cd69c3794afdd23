#pragma once

// JSON serialization for markets, claims, quote sheets and marginals.
// Rationals travel as "p/q" strings; every file carries a pinned schema
// tag. Parse errors report a JSON pointer to the offending field.

#include "robustftap/market.hpp"
#include "robustftap/mot.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rftap {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "robust-ftap/1";

struct SchemaError : ModelError {
    std::string pointer;
    SchemaError(std::string ptr, const std::string& what)
        : ModelError(ptr + ": " + what), pointer(std::move(ptr)) {}
};

namespace jio {

inline const json& at(const json& j, const std::string& key, const std::string& ptr) {
    if (!j.is_object()) throw SchemaError(ptr, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(ptr + "/" + key, "missing field");
    return *it;
}

inline Rational rational(const json& j, const std::string& ptr) {
    try {
        if (j.is_string()) return parse_fraction(j.get<std::string>());
        if (j.is_number_integer()) return Rational(j.get<long long>());
    } catch (const ModelError& e) {
        throw SchemaError(ptr, e.what());
    }
    throw SchemaError(ptr, "expected a rational \"p/q\" string");
}

inline int integer(const json& j, const std::string& ptr) {
    if (!j.is_number_integer()) throw SchemaError(ptr, "expected an integer");
    return j.get<int>();
}

inline std::string text(const json& j, const std::string& ptr) {
    if (!j.is_string()) throw SchemaError(ptr, "expected a string");
    return j.get<std::string>();
}

inline void check_schema(const json& j, const std::string& ptr) {
    if (text(at(j, "schema", ptr), ptr + "/schema") != kSchemaTag)
        throw SchemaError(ptr + "/schema", std::string("expected \"") + kSchemaTag + "\"");
}

// Leaf-keyed rational map -> vector by leaf ordinal, complete and exact.
inline std::vector<Rational> leaf_map(const json& j, const ScenarioTree& tree,
                                      const std::string& ptr) {
    if (!j.is_object()) throw SchemaError(ptr, "expected an object keyed by leaf id");
    std::vector<Rational> out(tree.num_leaves(), Rational(0));
    std::vector<char> seen(tree.num_leaves(), 0);
    for (const auto& [key, val] : j.items()) {
        int ix;
        try {
            ix = tree.index_of(key);
        } catch (const ModelError&) {
            throw SchemaError(ptr + "/" + key, "unknown node id");
        }
        if (!tree.is_leaf(ix)) throw SchemaError(ptr + "/" + key, "not a leaf");
        const size_t ord = static_cast<size_t>(tree.leaf_ordinal(ix));
        out[ord] = rational(val, ptr + "/" + key);
        seen[ord] = 1;
    }
    for (size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw SchemaError(ptr, "missing leaf " + tree.node(tree.leaves()[i]).id);
    return out;
}

}  // namespace jio

// Tree fields only ("horizon", "assets", "nodes"); usable standalone for
// files that carry no priors.
inline ScenarioTree tree_from_json(const json& j) {
    const int horizon = jio::integer(jio::at(j, "horizon", ""), "/horizon");
    const int assets = jio::integer(jio::at(j, "assets", ""), "/assets");

    const json& jn = jio::at(j, "nodes", "");
    if (!jn.is_array()) throw SchemaError("/nodes", "expected an array");
    std::vector<Node> nodes;
    std::map<std::string, int> index;
    for (size_t i = 0; i < jn.size(); ++i) {
        const std::string ptr = "/nodes/" + std::to_string(i);
        const json& e = jn[i];
        Node nd;
        nd.id = jio::text(jio::at(e, "id", ptr), ptr + "/id");
        nd.time = jio::integer(jio::at(e, "time", ptr), ptr + "/time");
        const json& jp = jio::at(e, "parent", ptr);
        if (jp.is_null()) {
            nd.parent = -1;
        } else {
            const std::string pid = jio::text(jp, ptr + "/parent");
            auto it = index.find(pid);
            if (it == index.end())
                throw SchemaError(ptr + "/parent", "parent must precede child: " + pid);
            nd.parent = it->second;
        }
        const json& pr = jio::at(e, "prices", ptr);
        if (!pr.is_array()) throw SchemaError(ptr + "/prices", "expected an array");
        for (size_t k = 0; k < pr.size(); ++k)
            nd.prices.push_back(jio::rational(pr[k], ptr + "/prices/" + std::to_string(k)));
        index[nd.id] = static_cast<int>(nodes.size());
        nodes.push_back(std::move(nd));
    }
    try {
        return ScenarioTree(horizon, assets, std::move(nodes));
    } catch (const ModelError& e) {
        throw SchemaError("/nodes", e.what());
    }
}

// The "priors" member, flat or kernel, against an existing tree.
inline PriorSet priors_from_json(const json& jpr, const ScenarioTree& tree) {
    {
        try {
            if (jpr.contains("flat")) {
                const json& jf = jpr["flat"];
                if (!jf.is_array()) throw SchemaError("/priors/flat", "expected an array");
                std::vector<Measure> ms;
                for (size_t i = 0; i < jf.size(); ++i) {
                    const std::string ptr = "/priors/flat/" + std::to_string(i);
                    ms.push_back(Measure::validated(tree, jio::leaf_map(jf[i], tree, ptr)));
                }
                return PriorSet::flat_priors(std::move(ms));
            }
            if (jpr.contains("kernel")) {
                const json& jk = jpr["kernel"];
                if (!jk.is_object()) throw SchemaError("/priors/kernel", "expected an object");
                KernelPriors k;
                for (const auto& [nid, steps] : jk.items()) {
                    const std::string ptr = "/priors/kernel/" + nid;
                    const int nix = tree.index_of(nid);
                    if (!steps.is_array()) throw SchemaError(ptr, "expected an array");
                    const auto& kids = tree.node(nix).children;
                    for (size_t s = 0; s < steps.size(); ++s) {
                        std::vector<Rational> w(kids.size(), Rational(0));
                        for (const auto& [cid, val] : steps[s].items()) {
                            const int cix = tree.index_of(cid);
                            size_t pos = kids.size();
                            for (size_t c = 0; c < kids.size(); ++c)
                                if (kids[c] == cix) pos = c;
                            if (pos == kids.size())
                                throw SchemaError(ptr + "/" + std::to_string(s) + "/" + cid,
                                                  "not a child of " + nid);
                            w[pos] = jio::rational(val, ptr + "/" + std::to_string(s) + "/" + cid);
                        }
                        k.steps[nix].push_back(std::move(w));
                    }
                }
                return PriorSet::kernel_priors(tree, std::move(k));
            }
            throw SchemaError("/priors", "expected \"flat\" or \"kernel\"");
        } catch (const SchemaError&) {
            throw;
        } catch (const ModelError& e) {
            throw SchemaError("/priors", e.what());
        }
    }
}

inline Market market_from_json(const json& j) {
    jio::check_schema(j, "");
    ScenarioTree tree = tree_from_json(j);
    PriorSet priors = priors_from_json(jio::at(j, "priors", ""), tree);

    std::vector<StaticOption> options;
    if (j.contains("options")) {
        const json& jo = j["options"];
        if (!jo.is_array()) throw SchemaError("/options", "expected an array");
        for (size_t i = 0; i < jo.size(); ++i) {
            const std::string ptr = "/options/" + std::to_string(i);
            StaticOption opt;
            opt.label = jio::text(jio::at(jo[i], "label", ptr), ptr + "/label");
            opt.payoff = jio::leaf_map(jio::at(jo[i], "payoff", ptr), tree, ptr + "/payoff");
            options.push_back(std::move(opt));
        }
    }
    return Market{std::move(tree), std::move(priors), std::move(options)};
}

inline json market_to_json(const Market& market) {
    const auto& tree = market.tree;
    json j;
    j["schema"] = kSchemaTag;
    j["horizon"] = tree.horizon();
    j["assets"] = tree.asset_count();
    j["nodes"] = json::array();
    for (const auto& nd : tree.nodes()) {
        json e;
        e["id"] = nd.id;
        e["time"] = nd.time;
        e["parent"] = nd.parent < 0 ? json(nullptr) : json(tree.node(nd.parent).id);
        e["prices"] = json::array();
        for (const auto& p : nd.prices) e["prices"].push_back(to_fraction_string(p));
        j["nodes"].push_back(std::move(e));
    }
    auto leaf_obj = [&](const std::vector<Rational>& v) {
        json o = json::object();
        for (size_t i = 0; i < tree.num_leaves(); ++i)
            o[tree.node(tree.leaves()[i]).id] = to_fraction_string(v[i]);
        return o;
    };
    if (market.priors.is_flat()) {
        json arr = json::array();
        for (const auto& m : market.priors.flat()) arr.push_back(leaf_obj(m.weights));
        j["priors"] = {{"flat", std::move(arr)}};
    } else {
        json obj = json::object();
        for (const auto& [nix, steps] : market.priors.kernel().steps) {
            json arr = json::array();
            const auto& kids = tree.node(nix).children;
            for (const auto& step : steps) {
                json s = json::object();
                for (size_t c = 0; c < kids.size(); ++c)
                    s[tree.node(kids[c]).id] = to_fraction_string(step[c]);
                arr.push_back(std::move(s));
            }
            obj[tree.node(nix).id] = std::move(arr);
        }
        j["priors"] = {{"kernel", std::move(obj)}};
    }
    j["options"] = json::array();
    for (const auto& opt : market.options)
        j["options"].push_back({{"label", opt.label}, {"payoff", leaf_obj(opt.payoff)}});
    return j;
}

inline Claim claim_from_json(const json& j, const ScenarioTree& tree) {
    jio::check_schema(j, "");
    return Claim{jio::leaf_map(jio::at(j, "values", ""), tree, "/values")};
}

inline json claim_to_json(const Claim& x, const ScenarioTree& tree) {
    json vals = json::object();
    for (size_t i = 0; i < tree.num_leaves(); ++i)
        vals[tree.node(tree.leaves()[i]).id] = to_fraction_string(x.values[i]);
    return json{{"schema", kSchemaTag}, {"values", std::move(vals)}};
}

inline CallQuoteSheet quotes_from_json(const json& j) {
    jio::check_schema(j, "");
    const json& ja = jio::at(j, "assets", "");
    if (!ja.is_array()) throw SchemaError("/assets", "expected an array");
    CallQuoteSheet sheet;
    for (size_t i = 0; i < ja.size(); ++i) {
        const std::string ptr = "/assets/" + std::to_string(i);
        CallQuotes a;
        a.spot = jio::rational(jio::at(ja[i], "spot", ptr), ptr + "/spot");
        const json& jq = jio::at(ja[i], "quotes", ptr);
        if (!jq.is_array()) throw SchemaError(ptr + "/quotes", "expected an array");
        for (size_t q = 0; q < jq.size(); ++q) {
            const std::string qptr = ptr + "/quotes/" + std::to_string(q);
            if (!jq[q].is_array() || jq[q].size() != 2)
                throw SchemaError(qptr, "expected a [strike, price] pair");
            a.quotes.push_back({jio::rational(jq[q][0], qptr + "/0"),
                                jio::rational(jq[q][1], qptr + "/1")});
        }
        sheet.assets.push_back(std::move(a));
    }
    try {
        sheet.validate();
    } catch (const ModelError& e) {
        throw SchemaError("/assets", e.what());
    }
    return sheet;
}

inline json quotes_to_json(const CallQuoteSheet& sheet) {
    json arr = json::array();
    for (const auto& a : sheet.assets) {
        json q = json::array();
        for (const auto& [k, c] : a.quotes)
            q.push_back({to_fraction_string(k), to_fraction_string(c)});
        arr.push_back({{"spot", to_fraction_string(a.spot)}, {"quotes", std::move(q)}});
    }
    return json{{"schema", kSchemaTag}, {"assets", std::move(arr)}};
}

inline DiscreteMarginal marginal_from_json(const json& j) {
    jio::check_schema(j, "");
    const json& ja = jio::at(j, "atoms", "");
    if (!ja.is_array()) throw SchemaError("/atoms", "expected an array");
    DiscreteMarginal mu;
    Rational prev;
    for (size_t i = 0; i < ja.size(); ++i) {
        const std::string ptr = "/atoms/" + std::to_string(i);
        if (!ja[i].is_array() || ja[i].size() != 2)
            throw SchemaError(ptr, "expected a [location, mass] pair");
        const Rational x = jio::rational(ja[i][0], ptr + "/0");
        const Rational m = jio::rational(ja[i][1], ptr + "/1");
        if (i > 0 && x <= prev) throw SchemaError(ptr + "/0", "locations must increase");
        if (m <= 0) throw SchemaError(ptr + "/1", "masses must be positive");
        prev = x;
        mu.atoms.push_back({x, m});
    }
    if (mu.atoms.empty()) throw SchemaError("/atoms", "empty marginal");
    if (mu.mass() != 1) throw SchemaError("/atoms", "masses must sum to 1");
    return mu;
}

inline json marginal_to_json(const DiscreteMarginal& mu) {
    json arr = json::array();
    for (const auto& [x, m] : mu.atoms)
        arr.push_back({to_fraction_string(x), to_fraction_string(m)});
    return json{{"schema", kSchemaTag}, {"atoms", std::move(arr)}};
}

inline json strategy_to_json(const Strategy& s, const ScenarioTree& tree,
                             const std::vector<StaticOption>& options) {
    json dyn = json::object();
    for (const auto& [nix, h] : s.dynamic) {
        json arr = json::array();
        for (const auto& v : h) arr.push_back(to_fraction_string(v));
        dyn[tree.node(nix).id] = std::move(arr);
    }
    json stat = json::object();
    for (size_t o = 0; o < options.size(); ++o)
        stat[options[o].label] = to_fraction_string(s.static_weights[o]);
    return json{{"dynamic", std::move(dyn)}, {"static", std::move(stat)}};
}

inline json measure_to_json(const Measure& m, const ScenarioTree& tree) {
    json o = json::object();
    for (size_t i = 0; i < tree.num_leaves(); ++i)
        o[tree.node(tree.leaves()[i]).id] = to_fraction_string(m.weights[i]);
    return o;
}

}  // namespace rftap
