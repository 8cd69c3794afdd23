// robust-ftap: arbitrage analysis on finite scenario trees under prior
// uncertainty. Exact rational arithmetic throughout; every report is
// byte-reproducible for identical inputs.

#include "robustftap/arbitrage.hpp"
#include "robustftap/generate.hpp"
#include "robustftap/json_io.hpp"
#include "robustftap/mot.hpp"
#include "robustftap/oracle.hpp"
#include "robustftap/superhedge.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using rftap::json;

constexpr int kExitClean = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rftap::ModelError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw rftap::SchemaError("/", std::string("malformed JSON in ") + path + ": " + e.what());
    }
}

void emit(const json& report, const std::string& out_path) {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw rftap::ModelError("cannot write " + out_path);
        out << text;
    }
}

json base_report(const std::string& command, bool exact, const std::string& tol) {
    json j;
    j["schema"] = rftap::kSchemaTag;
    j["command"] = command;
    j["config"] = {{"mode", exact ? "exact" : "float"}, {"tolerance", tol}};
    return j;
}

std::string ext_str(const rftap::ExtRational& v) { return v.str(); }

json node_prices_json(const rftap::ScenarioTree& tree,
                      const std::map<int, rftap::ExtRational>& prices) {
    json o = json::object();
    for (const auto& [ix, v] : prices) o[tree.node(ix).id] = ext_str(v);
    return o;
}

int cmd_check_na(const std::string& market_path, const std::string& witness_path,
                 const std::string& out_path, bool exact, const std::string& tol) {
    const auto market = rftap::market_from_json(load_json(market_path));
    const auto verdict = rftap::check_na(market);

    json rep = base_report("check-na", exact, tol);
    if (verdict.kind == rftap::ArbitrageVerdict::NoArbitrage) {
        rep["verdict"] = "no-arbitrage";
        json ms = json::array();
        for (const auto& w : verdict.measures)
            ms.push_back({{"leaf", market.tree.node(w.leaf).id},
                          {"delta", rftap::to_fraction_string(w.delta)},
                          {"measure", rftap::measure_to_json(w.measure, market.tree)}});
        rep["witnesses"] = {{"measures", std::move(ms)}};
    } else {
        rep["verdict"] = "arbitrage";
        rep["witnesses"] = {
            {"strategy",
             rftap::strategy_to_json(*verdict.witness, market.tree, market.options)},
            {"positive_at", market.tree.node(*verdict.witness_leaf).id}};
    }
    if (!witness_path.empty()) emit(rep["witnesses"], witness_path);
    emit(rep, out_path);
    return verdict.kind == rftap::ArbitrageVerdict::NoArbitrage ? kExitClean : kExitViolation;
}

int cmd_check_sna(const std::string& market_path, const std::string& out_path) {
    const auto market = rftap::market_from_json(load_json(market_path));
    const auto res = rftap::check_sna(market);
    json rep = base_report("check-sna", true, "0");
    rep["verdict"] = res.sna_holds ? "sna-holds" : "sna-fails";
    if (!res.sna_holds) {
        rep["witness"] = {
            {"leaf", market.tree.node(*res.witness_leaf).id},
            {"claim", rftap::claim_to_json(*res.witness_claim, market.tree)["values"]}};
    }
    emit(rep, out_path);
    return res.sna_holds ? kExitClean : kExitViolation;
}

int cmd_measures(const std::string& market_path, const std::string& leaf, int n_max,
                 const std::string& out_path) {
    const auto market = rftap::market_from_json(load_json(market_path));
    json rep = base_report("measures", true, "0");
    rep["leaf"] = leaf;
    try {
        const auto cls = rftap::approximate_class(market, leaf, n_max);
        json seq = json::array();
        for (const auto& [n, q] : cls.sequence)
            seq.push_back({{"n", n},
                           {"bound", "1/" + std::to_string(n)},
                           {"measure", rftap::measure_to_json(q, market.tree)}});
        rep["verdict"] = "witness-found";
        rep["dominating"] = cls.dominating_label;
        rep["sequence"] = std::move(seq);
        emit(rep, out_path);
        return kExitClean;
    } catch (const rftap::ModelError& e) {
        const std::string what = e.what();
        if (what.find("NA fails") == std::string::npos) throw;
        rep["verdict"] = "arbitrage";
        rep["detail"] = what;
        emit(rep, out_path);
        return kExitViolation;
    }
}

int cmd_superhedge(const std::string& market_path, const std::string& claim_path,
                   const std::string& prior_name, bool sensitivity, bool dual,
                   const std::string& cap, bool per_prior_continuation,
                   const std::string& out_path) {
    const auto market = rftap::market_from_json(load_json(market_path));
    const auto claim = rftap::claim_from_json(load_json(claim_path), market.tree);

    rftap::SuperhedgeOptions opts;
    if (!cap.empty()) opts.admissibility_cap = rftap::parse_fraction(cap);
    if (per_prior_continuation) opts.continuation = rftap::Continuation::PerPrior;

    json rep = base_report("superhedge", true, "0");
    rftap::SuperhedgeResult res;
    if (prior_name.empty()) {
        res = rftap::superhedge_qs(market, claim, opts);
        rep["pricing"] = "quasi-sure";
    } else {
        if (!market.priors.is_flat())
            throw rftap::ModelError("--prior requires flat priors; kernel sets have no names");
        const auto& flat = market.priors.flat();
        int pick = -1;
        for (size_t i = 0; i < flat.size(); ++i) {
            std::string name = i < market.priors.names.size() ? market.priors.names[i]
                                                              : "P" + std::to_string(i);
            if (name == prior_name) pick = static_cast<int>(i);
        }
        if (pick < 0) throw rftap::ModelError("unknown prior: " + prior_name);
        res = rftap::superhedge_per_prior(market, claim, flat[static_cast<size_t>(pick)], opts);
        rep["pricing"] = "per-prior";
        rep["prior"] = prior_name;
    }
    rep["price"] = ext_str(res.price);
    rep["node_prices"] = node_prices_json(market.tree, res.node_prices);
    rep["strategy"] = rftap::strategy_to_json(res.strategy, market.tree, market.options);

    if (sensitivity) {
        if (!rftap::na_holds(market)) {
            rep["sensitivity"] = {{"refused", "arbitrage present"}};
            emit(rep, out_path);
            return kExitViolation;
        }
        const auto sens = rftap::sensitivity_report(market, claim, opts);
        json pp = json::object();
        for (const auto& [name, price] : sens.per_prior_prices) pp[name] = ext_str(price);
        rep["sensitivity"] = {{"quasi_sure", ext_str(sens.quasi_sure_price)},
                              {"per_prior", std::move(pp)},
                              {"max_per_prior", ext_str(sens.max_per_prior)},
                              {"gap", ext_str(sens.gap)}};
    }
    if (dual) {
        const auto du = rftap::duality_check(market, claim);
        json jd;
        jd["primal"] = ext_str(du.primal);
        jd["dual_feasible"] = du.dual_feasible;
        if (du.dual_feasible) {
            jd["dual"] = ext_str(du.dual);
            jd["gap"] = ext_str(*du.gap);
            jd["argmax"] = rftap::measure_to_json(*du.argmax, market.tree);
        }
        rep["duality"] = std::move(jd);
    }
    emit(rep, out_path);
    return kExitClean;
}

int cmd_calibrate(const std::string& quotes_path, const std::string& emit_market,
                  const std::string& tree_path, const std::string& priors_path,
                  const std::string& out_path) {
    const auto sheet = rftap::quotes_from_json(load_json(quotes_path));
    const auto diag = rftap::quote_diagnostics(sheet);

    json rep = base_report("calibrate", true, "0");
    rep["verdict"] = diag.verdict == rftap::QuoteVerdict::Consistent ? "consistent" : "arbitrage";
    json viols = json::array();
    for (const auto& v : diag.violations) {
        static const char* kNames[] = {"negative-price", "call-spread", "butterfly",
                                       "slope-bound"};
        json strikes = json::array();
        for (const auto& k : v.strikes) strikes.push_back(rftap::to_fraction_string(k));
        json calls = json::array();
        for (const auto& [k, q] : v.portfolio.calls)
            calls.push_back({rftap::to_fraction_string(k), rftap::to_fraction_string(q)});
        viols.push_back({{"type", kNames[v.type]},
                         {"asset", v.asset},
                         {"strikes", std::move(strikes)},
                         {"portfolio",
                          {{"cash", rftap::to_fraction_string(v.portfolio.cash)},
                           {"asset_qty", rftap::to_fraction_string(v.portfolio.asset_qty)},
                           {"calls", std::move(calls)},
                           {"cost", rftap::to_fraction_string(v.portfolio.cost)}}}});
    }
    rep["violations"] = std::move(viols);
    json nb = json::array();
    for (const auto& [asset, strike] : diag.non_binding)
        nb.push_back({{"asset", asset}, {"strike", rftap::to_fraction_string(strike)}});
    rep["non_binding"] = std::move(nb);

    if (diag.verdict != rftap::QuoteVerdict::Consistent) {
        emit(rep, out_path);
        return kExitViolation;
    }

    json marginals = json::array();
    for (size_t j = 0; j < sheet.assets.size(); ++j)
        marginals.push_back(rftap::marginal_to_json(
            rftap::implied_marginal(rftap::support_function(sheet, static_cast<int>(j)))));
    rep["marginals"] = std::move(marginals);

    if (!emit_market.empty()) {
        if (tree_path.empty() || priors_path.empty())
            throw rftap::ModelError("--emit-market requires --tree and --priors");
        const json jt = load_json(tree_path);
        rftap::jio::check_schema(jt, "");
        const auto tree = rftap::tree_from_json(jt);
        const json jp = load_json(priors_path);
        rftap::jio::check_schema(jp, "");
        const auto priors =
            rftap::priors_from_json(rftap::jio::at(jp, "priors", ""), tree);
        const auto assembled = rftap::assemble_market(sheet, tree, priors);
        emit(rftap::market_to_json(assembled.market), emit_market);
        rep["emitted"] = emit_market;
    }
    emit(rep, out_path);
    return kExitClean;
}

int cmd_convex_order(const std::string& mu_path, const std::string& nu_path,
                     const std::string& out_path) {
    const auto mu = rftap::marginal_from_json(load_json(mu_path));
    const auto nu = rftap::marginal_from_json(load_json(nu_path));
    const bool ordered = rftap::convex_order_check(mu, nu) == rftap::ConvexOrder::Ordered;
    const bool coupled = rftap::martingale_coupling_feasible(mu, nu);
    if (ordered != coupled)
        throw rftap::ModelError("convex-order check and coupling LP disagree");
    json rep = base_report("convex-order", true, "0");
    rep["verdict"] = ordered ? "ordered" : "not-ordered";
    rep["coupling_feasible"] = coupled;
    emit(rep, out_path);
    return ordered ? kExitClean : kExitViolation;
}

int cmd_generate(std::uint64_t seed, bool kernel, const rftap::GenRanges& base,
                 const std::string& out_path) {
    rftap::GenRanges ranges = base;
    ranges.kernel = kernel;
    const auto market = rftap::generate_market(seed, ranges);
    emit(rftap::market_to_json(market), out_path);
    return kExitClean;
}

int cmd_oracle(const std::string& market_path, const std::string& out_path) {
    const auto market = rftap::market_from_json(load_json(market_path));
    const auto verdict = rftap::oracle_na(market);
    json rep = base_report("oracle", true, "0");
    rep["verdict"] = verdict.no_arbitrage ? "no-arbitrage" : "arbitrage";
    emit(rep, out_path);
    return verdict.no_arbitrage ? kExitClean : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"arbitrage analysis on finite scenario trees under prior uncertainty"};
    app.require_subcommand(1);

    std::string market_path, claim_path, witness_path, out_path, leaf, prior_name, cap, tol = "0";
    std::string quotes_path, emit_market, tree_path, priors_path, mu_path, nu_path;
    bool exact = true, sensitivity = false, dual = false, per_prior_cont = false, kernel = false;
    int n_max = 10;
    std::uint64_t seed = 1;
    rftap::GenRanges ranges;

    auto* na = app.add_subcommand("check-na", "decide NA and emit witnesses");
    na->add_option("--market", market_path)->required();
    na->add_flag("--exact", exact, "exact rational mode (default)");
    na->add_option("--tol", tol, "float-mode tolerance, echoed into the report");
    na->add_option("--witness", witness_path, "write the witness object to this file");
    na->add_option("--out", out_path);

    auto* sna = app.add_subcommand("check-sna", "decide sensitive NA");
    sna->add_option("--market", market_path)->required();
    sna->add_option("--out", out_path);

    auto* ms = app.add_subcommand("measures", "approximate martingale measure sequence");
    ms->add_option("--market", market_path)->required();
    ms->add_option("--leaf", leaf)->required();
    ms->add_option("--n-max", n_max);
    ms->add_option("--out", out_path);

    auto* sh = app.add_subcommand("superhedge", "superhedging price, strategy and duality");
    sh->add_option("--market", market_path)->required();
    sh->add_option("--claim", claim_path)->required();
    sh->add_option("--prior", prior_name, "per-prior price for the named prior");
    sh->add_flag("--sensitivity", sensitivity);
    sh->add_flag("--dual", dual);
    sh->add_option("--cap", cap, "admissibility cap lambda (payoff >= -lambda W)");
    sh->add_flag("--per-prior-continuation", per_prior_cont);
    sh->add_option("--out", out_path);

    auto* cal = app.add_subcommand("calibrate", "quote diagnostics and implied marginals");
    cal->add_option("--quotes", quotes_path)->required();
    cal->add_option("--emit-market", emit_market);
    cal->add_option("--tree", tree_path);
    cal->add_option("--priors", priors_path);
    cal->add_option("--out", out_path);

    auto* co = app.add_subcommand("convex-order", "convex order of two marginals");
    co->add_option("--mu", mu_path)->required();
    co->add_option("--nu", nu_path)->required();
    co->add_option("--out", out_path);

    auto* gen = app.add_subcommand("generate", "seeded random market instance");
    gen->add_option("--seed", seed)->required();
    gen->add_flag("--kernel", kernel, "kernel priors instead of flat measures");
    gen->add_option("--max-horizon", ranges.max_horizon);
    gen->add_option("--max-branching", ranges.max_branching);
    gen->add_option("--max-assets", ranges.max_assets);
    gen->add_option("--max-priors", ranges.max_priors);
    gen->add_option("--max-options", ranges.max_options);
    gen->add_option("--out", out_path);

    auto* orc = app.add_subcommand("oracle", "brute-force NA referee (test use)");
    orc->add_option("--market", market_path)->required();
    orc->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (na->parsed())
            return cmd_check_na(market_path, witness_path, out_path, exact, tol);
        if (sna->parsed()) return cmd_check_sna(market_path, out_path);
        if (ms->parsed()) return cmd_measures(market_path, leaf, n_max, out_path);
        if (sh->parsed())
            return cmd_superhedge(market_path, claim_path, prior_name, sensitivity, dual, cap,
                                  per_prior_cont, out_path);
        if (cal->parsed())
            return cmd_calibrate(quotes_path, emit_market, tree_path, priors_path, out_path);
        if (co->parsed()) return cmd_convex_order(mu_path, nu_path, out_path);
        if (gen->parsed()) return cmd_generate(seed, kernel, ranges, out_path);
        if (orc->parsed()) return cmd_oracle(market_path, out_path);
    } catch (const rftap::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const rftap::ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
