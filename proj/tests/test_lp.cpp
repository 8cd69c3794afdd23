#include "robustftap/generate.hpp"
#include "robustftap/lp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

using namespace rftap;

namespace {

LinearProgram<Rational> diet_lp() {
    // min 2x + 3y  s.t.  x + y >= 4, x + 3y >= 6, x,y >= 0. Opt at (3,1).
    LinearProgram<Rational> lp(2);
    lp.set_nonnegative();
    lp.objective = {Rational(2), Rational(3)};
    lp.add_row({Rational(1), Rational(1)}, Rel::Ge, Rational(4));
    lp.add_row({Rational(1), Rational(3)}, Rel::Ge, Rational(6));
    return lp;
}

}  // namespace

TEST_CASE("optimal solve with exact certificate") {
    const auto lp = diet_lp();
    const auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    REQUIRE(out.value == Rational(9));
    REQUIRE(out.primal == std::vector<Rational>{Rational(3), Rational(1)});
    REQUIRE(verify(lp, out));
}

TEST_CASE("maximization folds signs correctly") {
    LinearProgram<Rational> lp(2);
    lp.set_nonnegative();
    lp.sense = Sense::Maximize;
    lp.objective = {Rational(3), Rational(5)};
    lp.add_row({Rational(1), Rational(0)}, Rel::Le, Rational(4));
    lp.add_row({Rational(0), Rational(2)}, Rel::Le, Rational(12));
    lp.add_row({Rational(3), Rational(2)}, Rel::Le, Rational(18));
    const auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    REQUIRE(out.value == Rational(36));
    REQUIRE(verify(lp, out));
}

TEST_CASE("infeasible system yields a checkable Farkas certificate") {
    LinearProgram<Rational> lp(2);
    lp.set_nonnegative();
    lp.add_row({Rational(1), Rational(1)}, Rel::Le, Rational(1));
    lp.add_row({Rational(1), Rational(1)}, Rel::Ge, Rational(3));
    const auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Infeasible);
    REQUIRE(verify(lp, out));
}

TEST_CASE("unbounded problem yields point plus improving ray") {
    LinearProgram<Rational> lp(2);
    lp.set_nonnegative();
    lp.objective = {Rational(-1), Rational(0)};
    lp.add_row({Rational(-1), Rational(1)}, Rel::Le, Rational(2));
    const auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Unbounded);
    REQUIRE(verify(lp, out));
}

TEST_CASE("free variables and equality rows") {
    // min x + y  s.t.  x - y = 3, x + y = 5; unique point (4,1).
    LinearProgram<Rational> lp(2);
    lp.objective = {Rational(1), Rational(1)};
    lp.add_row({Rational(1), Rational(-1)}, Rel::Eq, Rational(3));
    lp.add_row({Rational(1), Rational(1)}, Rel::Eq, Rational(5));
    const auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    REQUIRE(out.primal == std::vector<Rational>{Rational(4), Rational(1)});
    REQUIRE(verify(lp, out));
}

TEST_CASE("variable boxes, including an empty one") {
    LinearProgram<Rational> lp(1);
    lp.lower = {Rational(2)};
    lp.upper = {Rational(1)};
    lp.objective = {Rational(1)};
    const auto out = solve(lp);
    REQUIRE(out.status == LpStatus::Infeasible);
    REQUIRE(verify(lp, out));
}

TEST_CASE("randomized solve always verifies and is row-permutation invariant") {
    for (std::uint64_t seed = 1; seed <= 80; ++seed) {
        Rng rng(seed);
        const size_t n = 1 + rng.below(5);
        const size_t m = 1 + rng.below(6);
        LinearProgram<Rational> lp(n);
        if (rng.below(2) == 0) lp.set_nonnegative();
        if (rng.below(2) == 0) lp.sense = Sense::Maximize;
        for (size_t j = 0; j < n; ++j) lp.objective[j] = Rational(rng.range(-3, 3));
        for (size_t r = 0; r < m; ++r) {
            std::vector<Rational> row(n);
            for (auto& v : row) v = Rational(rng.range(-3, 3));
            const Rel rel = rng.below(3) == 0 ? Rel::Eq : (rng.below(2) == 0 ? Rel::Le : Rel::Ge);
            lp.add_row(std::move(row), rel, Rational(rng.range(-4, 4)));
        }
        const auto out = solve(lp);
        INFO("seed " << seed);
        REQUIRE(verify(lp, out));

        LinearProgram<Rational> perm = lp;
        std::reverse(perm.rows.begin(), perm.rows.end());
        const auto out2 = solve(perm);
        REQUIRE(out2.status == out.status);
        if (out.status == LpStatus::Optimal) REQUIRE(out2.value == out.value);
        REQUIRE(verify(perm, out2));
    }
}

TEST_CASE("strong duality holds on random optimal instances") {
    int optimal_seen = 0;
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
        Rng rng(seed);
        const size_t n = 1 + rng.below(4);
        LinearProgram<Rational> lp(n);
        lp.set_nonnegative();
        for (size_t j = 0; j < n; ++j) lp.objective[j] = Rational(rng.range(1, 4));
        for (size_t r = 0; r < 1 + rng.below(4); ++r) {
            std::vector<Rational> row(n);
            for (auto& v : row) v = Rational(rng.range(-2, 3));
            lp.add_row(std::move(row), Rel::Ge, Rational(rng.range(-2, 3)));
        }
        const auto out = solve(lp);
        if (out.status != LpStatus::Optimal) continue;
        ++optimal_seen;
        Rational dual_value(0);
        for (size_t r = 0; r < lp.rows.size(); ++r)
            dual_value += out.row_duals[r] * lp.rows[r].rhs;
        REQUIRE(dual_value == out.value);
    }
    REQUIRE(optimal_seen > 10);
}

TEST_CASE("vertex enumeration of the unit square") {
    LinearProgram<Rational> lp(2);
    lp.lower = {Rational(0), Rational(0)};
    lp.upper = {Rational(1), Rational(1)};
    const auto verts = vertex_enumerate(lp);
    REQUIRE(verts.size() == 4);
}

TEST_CASE("vertex enumeration of the probability simplex") {
    LinearProgram<Rational> lp(3);
    lp.set_nonnegative();
    lp.add_row({Rational(1), Rational(1), Rational(1)}, Rel::Eq, Rational(1));
    const auto verts = vertex_enumerate(lp);
    REQUIRE(verts.size() == 3);
    for (const auto& v : verts) {
        Rational s(0);
        for (const auto& x : v) s += x;
        REQUIRE(s == 1);
    }
}

TEST_CASE("vertex enumeration refuses unbounded polyhedra") {
    LinearProgram<Rational> lp(2);
    lp.set_nonnegative();
    REQUIRE_THROWS_AS(vertex_enumerate(lp), ModelError);
}
