#include "robustftap/arbitrage.hpp"
#include "robustftap/generate.hpp"
#include "robustftap/oracle.hpp"

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

Market rising_market() {
    std::vector<Node> ns;
    ns.push_back({"root", 0, -1, {Rational(1)}, {}});
    ns.push_back({"u", 1, 0, {Rational(2)}, {}});
    ns.push_back({"d", 1, 0, {Rational(3, 2)}, {}});
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

}  // namespace

TEST_CASE("binomial market admits the unique martingale measure") {
    const auto m = binomial_market();
    const auto v = check_na(m);
    REQUIRE(v.kind == ArbitrageVerdict::NoArbitrage);
    REQUIRE(v.measures.size() == 2);
    for (const auto& w : v.measures) {
        REQUIRE(w.measure.weights ==
                std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
        REQUIRE(w.delta > 0);
    }
}

TEST_CASE("rising market is an arbitrage with a valid witness") {
    const auto m = rising_market();
    const auto v = check_na(m);
    REQUIRE(v.kind == ArbitrageVerdict::Arbitrage);
    REQUIRE(witness_valid(m, v));
}

TEST_CASE("find_witness_measure returns the exact leaf optimizer") {
    const auto m = binomial_market();
    const auto w = find_witness_measure(m, "u");
    REQUIRE(w.delta == Rational(1, 3));
    REQUIRE(w.measure.weights == std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
    REQUIRE_THROWS_AS(find_witness_measure(rising_market(), "u"), ModelError);
}

TEST_CASE("witness requested on a polar leaf is refused") {
    std::vector<Node> ns;
    ns.push_back({"root", 0, -1, {Rational(1)}, {}});
    ns.push_back({"u", 1, 0, {Rational(2)}, {}});
    ns.push_back({"d", 1, 0, {Rational(1, 2)}, {}});
    ns.push_back({"x", 1, 0, {Rational(1)}, {}});
    ScenarioTree tree(1, 1, std::move(ns));
    auto p = Measure::validated(tree, {Rational(1, 2), Rational(1, 2), Rational(0)});
    Market m{tree, PriorSet::flat_priors({p}), {}};
    REQUIRE_THROWS_AS(find_witness_measure(m, "x"), ModelError);
}

TEST_CASE("three-state example: NA holds, sNA fails") {
    const auto m = three_state_market();
    REQUIRE(check_na(m).kind == ArbitrageVerdict::NoArbitrage);
    const auto sna = check_sna(m);
    REQUIRE_FALSE(sna.sna_holds);
    // Leaf a fails first: 1_a prices at 1/3 quasi-surely but at most 0
    // under each prior separately.
    REQUIRE(m.tree.node(*sna.witness_leaf).id == "a");
    REQUIRE(sna.witness_claim->values ==
            std::vector<Rational>{Rational(1), Rational(0), Rational(0)});
}

TEST_CASE("sNA holds on the plain binomial market") {
    REQUIRE(check_sna(binomial_market()).sna_holds);
}

TEST_CASE("kernel priors: sNA coincides with NA") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        GenRanges r;
        r.kernel = true;
        const auto m = generate_market(seed, r);
        const bool na = check_na(m).kind == ArbitrageVerdict::NoArbitrage;
        if (!na) continue;
        REQUIRE(check_sna(m).sna_holds);
    }
}

TEST_CASE("approximate class satisfies the 1/n moment bounds") {
    const auto m = binomial_market();
    const auto cls = approximate_class(m, "u", 25);
    REQUIRE(cls.sequence.size() == 25);
    for (const auto& [n, q] : cls.sequence) REQUIRE(validate_approximate(m, q, n));

    // A measure charging a polar leaf never validates.
    std::vector<Rational> off{Rational(1), Rational(0)};
    const auto skew = Measure::validated(m.tree, off);
    Market polarized = m;
    polarized.priors = PriorSet::flat_priors(
        {Measure::validated(m.tree, {Rational(0), Rational(1)})});
    REQUIRE_FALSE(validate_approximate(polarized, skew, 1));
}

TEST_CASE("moment violations beyond 1/n are rejected") {
    const auto m = binomial_market();
    // E_Q[dS] = 1/4 under the physical measure; fails for n >= 5.
    const auto q = Measure::validated(m.tree, {Rational(1, 2), Rational(1, 2)});
    REQUIRE(validate_approximate(m, q, 4));
    REQUIRE_FALSE(validate_approximate(m, q, 5));
}

TEST_CASE("verdicts agree with the brute-force oracle") {
    for (std::uint64_t seed = 500; seed < 540; ++seed) {
        GenRanges r;
        r.kernel = seed % 4 == 0;
        const auto m = generate_market(seed, r);
        const auto v = check_na(m);
        const auto ref = oracle_na(m);
        INFO("seed " << seed);
        REQUIRE((v.kind == ArbitrageVerdict::NoArbitrage) == ref.no_arbitrage);
        if (v.kind == ArbitrageVerdict::Arbitrage) REQUIRE(witness_valid(m, v));
    }
}
