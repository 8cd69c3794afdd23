#include "robustftap/arbitrage.hpp"
#include "robustftap/generate.hpp"
#include "robustftap/superhedge.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rftap;

namespace {

Market binomial_market() {
    std::vector<Node> ns;
    ns.push_back({"root", 0, -1, {Rational(1)}, {}});
    ns.push_back({"u", 1, 0, {Rational(2)}, {}});
    ns.push_back({"d", 1, 0, {Rational(1, 2)}, {}});
    ScenarioTree tree(1, 1, std::move(ns));
    auto p = Measure::validated(tree, {Rational(1, 2), Rational(1, 2)});
    return Market{tree, PriorSet::flat_priors({p}), {}};
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

}  // namespace

TEST_CASE("binomial call: price 1/3, delta 2/3") {
    const auto m = binomial_market();
    Claim call{{Rational(1), Rational(0)}};
    const auto res = superhedge_qs(m, call);
    REQUIRE(res.price == ExtRational(Rational(1, 3)));
    REQUIRE(res.strategy.dynamic.at(m.tree.root()) == std::vector<Rational>{Rational(2, 3)});
    // Hedge dominates the payoff with equality at both leaves.
    const auto v = portfolio_value(m.tree, res.strategy, m.options);
    for (size_t i = 0; i < 2; ++i)
        REQUIRE(Rational(1, 3) + v.values[i] == call.values[i]);
}

TEST_CASE("superhedging price is monotone, translative and homogeneous") {
    for (std::uint64_t seed = 20; seed < 35; ++seed) {
        const auto m = generate_market(seed);
        const auto x = generate_claim(seed, m.tree);
        const auto px = superhedge_qs(m, x).price;
        if (!px.finite()) continue;

        Claim higher = x;
        for (auto& v : higher.values) v += Rational(1, 2);
        const auto ph = superhedge_qs(m, higher).price;
        REQUIRE(ph == ExtRational(px.value + Rational(1, 2)));

        Claim scaled = x;
        for (auto& v : scaled.values) v *= Rational(3);
        REQUIRE(superhedge_qs(m, scaled).price == ExtRational(px.value * 3));

        Claim dominated = x;
        for (auto& v : dominated.values) v -= Rational(1, 4);
        REQUIRE(superhedge_qs(m, dominated).price < px);
    }
}

TEST_CASE("node prices satisfy the one-step recursion semantics") {
    const auto m = generate_market(101);
    const auto x = generate_claim(7, m.tree);
    const auto res = superhedge_qs(m, x);
    const auto polar = polar_set(m.tree, m.priors);
    // Terminal prices equal the claim on non-polar leaves.
    for (int leaf : polar.qs_support)
        REQUIRE(res.node_prices.at(leaf) ==
                ExtRational(x.values[static_cast<size_t>(m.tree.leaf_ordinal(leaf))]));
}

TEST_CASE("three-state indicator: quasi-sure price 2/3, per-prior prices 0") {
    const auto m = three_state_market();
    Claim indc{{Rational(0), Rational(0), Rational(1)}};
    REQUIRE(superhedge_qs(m, indc).price == ExtRational(Rational(2, 3)));

    SuperhedgeOptions opts;
    opts.continuation = Continuation::PerPrior;
    const auto& flat = m.priors.flat();
    for (const auto& p : flat) {
        const auto pp = superhedge_per_prior(m, indc, p, opts).price;
        REQUIRE(!(ExtRational(Rational(0)) < pp));
    }

    const auto rep = sensitivity_report(m, indc, opts);
    REQUIRE(rep.quasi_sure_price == ExtRational(Rational(2, 3)));
    REQUIRE(rep.max_per_prior == ExtRational(Rational(0)));
    REQUIRE(rep.gap == ExtRational(Rational(2, 3)));
}

TEST_CASE("sensitivity gap vanishes for kernel priors") {
    int tested = 0;
    for (std::uint64_t seed = 1; tested < 10 && seed <= 80; ++seed) {
        GenRanges r;
        r.kernel = true;
        const auto m = generate_market(seed, r);
        if (!na_holds(m)) continue;
        const auto x = generate_claim(seed + 1, m.tree);
        const auto rep = sensitivity_report(m, x);
        INFO("seed " << seed);
        REQUIRE(rep.gap == ExtRational(Rational(0)));
        ++tested;
    }
    REQUIRE(tested == 10);
}

TEST_CASE("admissibility cap binds the quoted price") {
    // Selling the hedge against 1_c is capped by payoff >= -lambda W.
    const auto m = three_state_market();
    Claim indc{{Rational(0), Rational(0), Rational(1)}};
    SuperhedgeOptions opts;
    opts.admissibility_cap = Rational(1);
    const auto capped = superhedge_qs(m, indc, opts);
    REQUIRE(capped.price.finite());
    // The cap only shrinks the strategy set, so the price can only rise.
    REQUIRE(!(capped.price < superhedge_qs(m, indc).price));
}

TEST_CASE("per-prior price of an unhedgeable short position is minus infinity") {
    // Single branch under the prior: any slope is admissible P-a.s., so a
    // forward-like claim can be superhedged from arbitrarily low capital.
    std::vector<Node> ns;
    ns.push_back({"root", 0, -1, {Rational(1)}, {}});
    ns.push_back({"u", 1, 0, {Rational(2)}, {}});
    ns.push_back({"d", 1, 0, {Rational(1, 2)}, {}});
    ScenarioTree tree(1, 1, std::move(ns));
    auto p1 = Measure::validated(tree, {Rational(1), Rational(0)});
    auto p2 = Measure::validated(tree, {Rational(0), Rational(1)});
    Market m{tree, PriorSet::flat_priors({p1, p2}), {}};
    SuperhedgeOptions opts;
    opts.continuation = Continuation::PerPrior;
    // Against P1 only the up state matters; any claim is superhedged from
    // arbitrarily low capital by going long.
    Claim x{{Rational(0), Rational(0)}};
    REQUIRE(superhedge_per_prior(m, x, p1, opts).price.kind == ExtRational::NegInf);

    // The quasi-sure price stays finite: both states bind.
    REQUIRE(superhedge_qs(m, x).price == ExtRational(Rational(0)));

    // Default continuation hedges the root step P-a.s. against quasi-sure
    // continuation values; with one charged branch it is again unbounded.
    SuperhedgeOptions qs_cont;
    REQUIRE(superhedge_per_prior(m, x, p1, qs_cont).price.kind == ExtRational::NegInf);
}

TEST_CASE("duality: recursion equals one-shot equals polytope maximum") {
    int tested = 0;
    for (std::uint64_t seed = 200; seed < 260 && tested < 12; ++seed) {
        const auto m = generate_market(seed);
        if (check_na(m).kind != ArbitrageVerdict::NoArbitrage) continue;
        ++tested;
        for (int k = 0; k < 3; ++k) {
            const auto x = generate_claim(seed * 10 + static_cast<std::uint64_t>(k), m.tree);
            const auto rep = duality_check(m, x);
            INFO("seed " << seed << " claim " << k);
            REQUIRE(rep.dual_feasible);
            REQUIRE(*rep.gap == ExtRational(Rational(0)));
        }
    }
    REQUIRE(tested == 12);
}

TEST_CASE("na_holds matches check_na") {
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        const auto m = generate_market(seed);
        REQUIRE(na_holds(m) == (check_na(m).kind == ArbitrageVerdict::NoArbitrage));
    }
}

TEST_CASE("sensitivity report refuses arbitrageable markets") {
    std::vector<Node> ns;
    ns.push_back({"root", 0, -1, {Rational(1)}, {}});
    ns.push_back({"u", 1, 0, {Rational(2)}, {}});
    ns.push_back({"d", 1, 0, {Rational(3, 2)}, {}});
    ScenarioTree tree(1, 1, std::move(ns));
    auto p = Measure::validated(tree, {Rational(1, 2), Rational(1, 2)});
    Market rising{tree, PriorSet::flat_priors({p}), {}};
    Claim x{{Rational(1), Rational(0)}};
    REQUIRE_THROWS_AS(sensitivity_report(rising, x), ModelError);
}
