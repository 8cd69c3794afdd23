// Acceptance suite: one pass/fail line per criterion. Exits nonzero when
// any criterion fails.

#include "robustftap/arbitrage.hpp"
#include "robustftap/generate.hpp"
#include "robustftap/json_io.hpp"
#include "robustftap/mot.hpp"
#include "robustftap/oracle.hpp"
#include "robustftap/superhedge.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace rftap;

namespace {

const std::string kCli = RFTAP_CLI_PATH;
const std::string kData = RFTAP_DATA_DIR;

int failures = 0;

void report(int criterion, const std::string& label, bool ok, const std::string& detail = "") {
    std::cout << "criterion " << criterion << " [" << label << "]: " << (ok ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
}

GenRanges suite_ranges(std::uint64_t seed) {
    GenRanges r;
    r.kernel = seed % 3 == 0;
    return r;
}

bool witness_valid(const Market& m, const ArbitrageVerdict& v) {
    const auto polar = polar_set(m.tree, m.priors);
    const auto payoff = portfolio_value(m.tree, *v.witness, m.options);
    bool positive = false;
    for (size_t i = 0; i < m.tree.num_leaves(); ++i) {
        if (polar.polar[i]) continue;
        if (payoff.values[i] < 0) return false;
        if (payoff.values[i] > 0) positive = true;
    }
    return positive;
}

Market three_state_market() {
    std::vector<Node> ns;
    ns.push_back({"root", 0, -1, {Rational(1)}, {}});
    ns.push_back({"a", 1, 0, {Rational(2)}, {}});
    ns.push_back({"b", 1, 0, {Rational(1)}, {}});
    ns.push_back({"c", 1, 0, {Rational(1, 2)}, {}});
    ScenarioTree tree(1, 1, std::move(ns));
    auto p1 = Measure::validated(tree, {Rational(1, 2), Rational(1, 2), Rational(0)});
    auto p2 = Measure::validated(tree, {Rational(0), Rational(0), Rational(1)});
    return Market{tree, PriorSet::flat_priors({p1, p2}), {}};
}

std::string run_cli(const std::string& args, const std::string& env, int* exit_code) {
    const std::string out_path = "/tmp/rftap_acc_out.txt";
    const std::string cmd = env + " " + kCli + " " + args + " >" + out_path + " 2>/dev/null";
    const int raw = std::system(cmd.c_str());
    if (exit_code) *exit_code = WEXITSTATUS(raw);
    std::ifstream in(out_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::uint64_t> na_seeds;

void criterion1() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    int na = 0, arb = 0;
    for (std::uint64_t seed = 1; seed <= 200 && ok; ++seed) {
        const auto m = generate_market(seed, suite_ranges(seed));
        const auto verdict = check_na(m);
        const auto ref = oracle_na(m);
        const bool is_na = verdict.kind == ArbitrageVerdict::NoArbitrage;
        if (is_na != ref.no_arbitrage) {
            ok = false;
            detail = "disagreement at seed " + std::to_string(seed);
            break;
        }
        if (is_na) {
            ++na;
            na_seeds.push_back(seed);
            const auto polar = polar_set(m.tree, m.priors);
            if (verdict.measures.size() != polar.qs_support.size()) ok = false;
            for (const auto& w : verdict.measures)
                if (!(w.delta > 0) ||
                    !(w.measure.weights[static_cast<size_t>(m.tree.leaf_ordinal(w.leaf))] ==
                      w.delta))
                    ok = false;
            if (!ok) detail = "measure witness failed at seed " + std::to_string(seed);
        } else {
            ++arb;
            if (!witness_valid(m, verdict)) {
                ok = false;
                detail = "strategy witness failed at seed " + std::to_string(seed);
            }
        }
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    if (ms >= 60000) {
        ok = false;
        detail = "runtime budget exceeded";
    }
    if (ok)
        detail = "200/200 agree, " + std::to_string(na) + " NA / " + std::to_string(arb) +
                 " arbitrage, " + std::to_string(ms) + " ms";
    report(1, "FTAP equivalence vs oracle", ok, detail);
}

void criterion2() {
    bool ok = true;
    std::string detail;
    int checked = 0;
    for (std::uint64_t seed : na_seeds) {
        const auto m = generate_market(seed, suite_ranges(seed));
        const auto polar = polar_set(m.tree, m.priors);
        const auto leaf_alive = std::vector<char>(m.tree.num_leaves(), 1);
        for (int k = 0; k < 5 && ok; ++k) {
            const auto x = generate_claim(seed * 1000 + static_cast<std::uint64_t>(k), m.tree);
            const auto rep = duality_check(m, x);
            const auto res = superhedge_qs(m, x);
            // Triple equality: recursion price, global one-shot LP, dual max.
            std::vector<char> alive(m.tree.num_leaves());
            for (size_t i = 0; i < alive.size(); ++i) alive[i] = polar.polar[i] ? 0 : 1;
            const auto one_shot = detail::one_shot(m, alive, x, std::nullopt, alive);
            if (!rep.dual_feasible || !(rep.primal == one_shot.price) ||
                !(rep.gap && *rep.gap == ExtRational(Rational(0))) ||
                !(res.node_prices.at(m.tree.root()) == res.price)) {
                ok = false;
                detail = "duality gap at seed " + std::to_string(seed);
            }
            ++checked;
        }
        if (!ok) break;
    }
    if (ok) detail = std::to_string(checked) + " claims, gap 0 throughout";
    report(2, "superhedging duality", ok, detail);
}

void criterion3() {
    bool ok = true;
    std::string detail;
    int tested = 0;
    for (std::uint64_t seed = 1; tested < 100 && seed <= 2000; ++seed) {
        GenRanges r;
        r.kernel = true;
        const auto m = generate_market(seed, r);
        if (!na_holds(m)) continue;
        const auto x = generate_claim(seed + 7, m.tree);
        const auto rep = sensitivity_report(m, x);
        if (!(rep.gap == ExtRational(Rational(0)))) {
            ok = false;
            detail = "nonzero kernel gap at seed " + std::to_string(seed);
            break;
        }
        ++tested;
    }
    if (ok && tested < 100) {
        ok = false;
        detail = "only " + std::to_string(tested) + " NA kernel instances found";
    }
    if (ok) {
        const auto m3 = three_state_market();
        Claim indc{{Rational(0), Rational(0), Rational(1)}};
        SuperhedgeOptions opts;
        opts.continuation = Continuation::PerPrior;
        const auto rep = sensitivity_report(m3, indc, opts);
        const bool na = check_na(m3).kind == ArbitrageVerdict::NoArbitrage;
        const bool sna = check_sna(m3).sna_holds;
        if (!(ExtRational(Rational(0)) < rep.gap) || !na || sna) {
            ok = false;
            detail = "three-state regression failed";
        }
    }
    if (ok) detail = "100 kernel instances gap 0; flat regression gap 2/3";
    report(3, "sensitivity identity", ok, detail);
}

void criterion4() {
    bool ok = true;
    std::string detail;
    int tested = 0;
    for (std::uint64_t seed : na_seeds) {
        if (tested >= 20) break;
        const auto m = generate_market(seed, suite_ranges(seed));
        const auto polar = polar_set(m.tree, m.priors);
        const auto& leaf_id = m.tree.node(polar.qs_support.front()).id;
        const auto cls = approximate_class(m, leaf_id, 100);
        for (const auto& [n, q] : cls.sequence)
            if (!validate_approximate(m, q, n)) {
                ok = false;
                detail = "bound violated at seed " + std::to_string(seed) + " n " +
                         std::to_string(n);
            }
        ++tested;
        if (!ok) break;
    }
    if (ok) detail = std::to_string(tested) + " instances, n up to 100";
    report(4, "approximate martingale bounds", ok, detail);
}

void criterion5() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 50 && ok; ++seed) {
        const auto sheet = generate_consistent_sheet(seed);
        const auto r = support_function(sheet, 0);
        const auto mu = implied_marginal(r);
        if (mu.mass() != 1 || mu.mean() != sheet.assets[0].spot) ok = false;
        for (const auto& [k, c] : sheet.assets[0].quotes) {
            if (r.value(k) != c) continue;  // non-touching quotes carry no constraint
            if (mu.call_price(k) != c) ok = false;
        }
        if (!ok) detail = "round trip failed at seed " + std::to_string(seed);
    }
    if (ok) {
        CallQuoteSheet sheet{{CallQuotes{
            Rational(1), {{Rational(1), Rational(1, 4)}, {Rational(2), Rational(0)}}}}};
        const auto mu = implied_marginal(support_function(sheet, 0));
        const std::vector<std::pair<Rational, Rational>> want{{Rational(0), Rational(1, 4)},
                                                              {Rational(1), Rational(1, 2)},
                                                              {Rational(2), Rational(1, 4)}};
        if (mu.atoms != want) {
            ok = false;
            detail = "worked sheet atoms wrong";
        }
    }
    if (ok) detail = "50 sheets exact; worked sheet atoms {0:1/4, 1:1/2, 2:1/4}";
    report(5, "Breeden-Litzenberger round trip", ok, detail);
}

void criterion6() {
    bool ok = true;
    std::string detail;
    int ordered = 0;
    for (std::uint64_t seed = 1; seed <= 100 && ok; ++seed) {
        const auto mu = generate_marginal(seed * 2);
        const auto nu = generate_marginal(seed * 2 + 1);
        const bool check = convex_order_check(mu, nu) == ConvexOrder::Ordered;
        if (check) ++ordered;
        if (check != martingale_coupling_feasible(mu, nu)) {
            ok = false;
            detail = "disagreement at seed " + std::to_string(seed);
        }
        // A point mass at the mean precedes any marginal in convex order.
        DiscreteMarginal point{{{nu.mean(), Rational(1)}}};
        const bool pos = convex_order_check(point, nu) == ConvexOrder::Ordered;
        if (pos) ++ordered;
        if (!pos || !martingale_coupling_feasible(point, nu)) {
            ok = false;
            detail = "dilation pair failed at seed " + std::to_string(seed);
        }
    }
    if (ok) detail = "200 pairs agree (" + std::to_string(ordered) + " ordered)";
    report(6, "convex order vs coupling LP", ok, detail);
}

void criterion7() {
    bool ok = true;
    std::string detail;
    int detected[4] = {0, 0, 0, 0};
    for (std::uint64_t seed = 1; seed <= 20 && ok; ++seed) {
        auto base = generate_consistent_sheet(seed, 6);
        for (int kind = 0; kind < 4 && ok; ++kind) {
            auto bad = base;
            auto& qs = bad.assets[0].quotes;
            switch (kind) {
                case 0: qs[qs.size() - 2].second = Rational(-1, 8); break;
                case 1: qs[0].second = qs[1].second - Rational(1, 8); break;
                case 2: {
                    if (qs.size() < 3) continue;
                    const Rational lam =
                        (qs[2].first - qs[1].first) / (qs[2].first - qs[0].first);
                    qs[1].second = lam * qs[0].second + (Rational(1) - lam) * qs[2].second +
                                   Rational(1, 16);
                    break;
                }
                case 3:
                    qs[0].second = bad.assets[0].spot + qs.back().first + Rational(10);
                    break;
            }
            const auto d = quote_diagnostics(bad);
            bool seen = false;
            for (const auto& v : d.violations) {
                if (static_cast<int>(v.type) == kind) seen = true;
                if (!(v.portfolio.cost < 0) || !v.portfolio.payoff_nonnegative()) {
                    ok = false;
                    detail = "unsound exploiting portfolio at seed " + std::to_string(seed);
                }
            }
            if (!seen) {
                ok = false;
                detail = "violation kind " + std::to_string(kind) + " missed at seed " +
                         std::to_string(seed);
            }
            if (seen && ok) ++detected[kind];
        }
    }
    if (ok)
        detail = "injected violations detected: " + std::to_string(detected[0]) + "/" +
                 std::to_string(detected[1]) + "/" + std::to_string(detected[2]) + "/" +
                 std::to_string(detected[3]) + ", all portfolios sound";
    report(7, "quote diagnostics soundness", ok, detail);
}

void criterion8() {
    const std::vector<std::string> commands = {
        "check-na --market " + kData + "/binomial.json",
        "check-na --market " + kData + "/rising.json",
        "check-na --market " + kData + "/kernel_binomial.json",
        "check-sna --market " + kData + "/three_state.json",
        "superhedge --market " + kData + "/binomial.json --claim " + kData +
            "/binomial_call.json --dual",
        "superhedge --market " + kData + "/three_state.json --claim " + kData +
            "/three_state_indc.json --sensitivity --per-prior-continuation",
        "measures --market " + kData + "/binomial.json --leaf u --n-max 10",
        "calibrate --quotes " + kData + "/quotes_worked.json",
        "convex-order --mu " + kData + "/marginal_point.json --nu " + kData +
            "/marginal_spread.json",
        "generate --seed 1",
        "generate --seed 1 --kernel",
    };
    bool ok = true;
    std::string detail;
    for (const auto& cmd : commands) {
        int e1, e2, e3, e4;
        const auto a = run_cli(cmd, "ROBUST_FTAP_THREADS=1", &e1);
        const auto b = run_cli(cmd, "ROBUST_FTAP_THREADS=1", &e2);
        const auto c = run_cli(cmd, "ROBUST_FTAP_THREADS=4", &e3);
        const auto d = run_cli(cmd, "ROBUST_FTAP_THREADS=4", &e4);
        if (a != b || a != c || c != d || e1 != e2 || e1 != e3 || e3 != e4 || a.empty()) {
            ok = false;
            detail = "nondeterministic output for: " + cmd;
            break;
        }
    }
    if (ok) {
        // Golden regression: the binomial report is pinned byte for byte.
        int code;
        const auto out = run_cli("check-na --market " + kData + "/binomial.json", "", &code);
        std::ifstream golden(kData + "/golden_check_na_binomial.json");
        std::ostringstream want;
        want << golden.rdbuf();
        if (code != 0 || out != want.str()) {
            ok = false;
            detail = "golden file mismatch";
        }
    }
    if (ok) detail = std::to_string(commands.size()) + " commands, runs x threads {1,4}";
    report(8, "deterministic reports", ok, detail);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT") << "\n";
    return failures == 0 ? 0 : 1;
}
