#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mfgseg/asymptotics.hpp"
#include "mfgseg/continuation.hpp"
#include "mfgseg/hopf_cole.hpp"

using namespace mfgseg;

namespace {

InteractionPair linear_pair(double gamma1, double gamma2) {
    return InteractionPair(InteractionSpec::linear(gamma1), InteractionSpec::linear(gamma2));
}

SolutionState trivial_state(const Grid& grid, const InteractionPair& pair, double nu) {
    SolutionState s;
    s.nu = nu;
    s.v1 = grid.field(1.0);
    s.v2 = grid.field(1.0);
    s.lambda1 = pair.g1.eval(0, 1.0);
    s.lambda2 = pair.g2.eval(0, 1.0);
    return s;
}

SolutionState manufactured_state(const Grid& grid, double nu, double amplitude) {
    SolutionState s;
    s.nu = nu;
    s.v1 = grid.field();
    s.v2 = grid.field();
    for (int j = 0; j < grid.size(); ++j) {
        s.v1[j] = 1.0 + amplitude * std::cos(M_PI * grid.node(j));
        s.v2[j] = 1.0 - amplitude * std::cos(M_PI * grid.node(j));
    }
    normalize_mass(grid, s.v1);
    normalize_mass(grid, s.v2);
    s.lambda1 = s.lambda2 = 1.0;
    return s;
}

}  // namespace

TEST_CASE("trivial state maps to unit densities and zero value functions") {
    Grid grid(64);
    const auto pair = linear_pair(1.0, 2.0);
    const MFGState mfg = to_mfg(grid, trivial_state(grid, pair, 0.5));
    CHECK(mfg.nu_tilde == doctest::Approx(0.5).epsilon(1e-15));
    for (int j = 0; j < grid.size(); ++j) {
        CHECK(mfg.m1[j] == 1.0);
        CHECK(mfg.u1[j] == 0.0);
        CHECK(mfg.u2[j] == 0.0);
    }
    CHECK(mfg.lambda1 == 1.0);
    CHECK(mfg.lambda2 == 2.0);
}

TEST_CASE("round trip is exact to machine precision") {
    Grid grid(128);
    const SolutionState state = manufactured_state(grid, 0.07, 0.3);
    const SolutionState back = from_mfg(grid, to_mfg(grid, state));
    CHECK(back.nu == doctest::Approx(state.nu).epsilon(1e-15));
    for (int j = 0; j < grid.size(); ++j) {
        CHECK(std::fabs(back.v1[j] - state.v1[j]) <= 1e-14);
        CHECK(std::fabs(back.v2[j] - state.v2[j]) <= 1e-14);
    }
}

TEST_CASE("densities inherit the unit mass") {
    Grid grid(256);
    const auto pair = linear_pair(1.0, 1.0);
    const auto state = solve_on_branch_at_beta(grid, pair, 1, 50.0);
    REQUIRE(state.has_value());
    const MFGState mfg = to_mfg(grid, *state);
    CHECK(integrate(grid, mfg.m1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(integrate(grid, mfg.m2) == doctest::Approx(1.0).epsilon(1e-10));
    for (double m : mfg.m1) CHECK(m > 0.0);
}

TEST_CASE("nonpositive fields are rejected") {
    Grid grid(64);
    SolutionState s = manufactured_state(grid, 0.1, 0.3);
    s.v1[10] = 0.0;
    CHECK_THROWS_AS(to_mfg(grid, s), std::invalid_argument);
}

TEST_CASE("residuals vanish exactly at the trivial state") {
    Grid grid(64);
    const auto pair = linear_pair(1.0, 2.0);
    const MFGResiduals res = mfg_residuals(grid, to_mfg(grid, trivial_state(grid, pair, 0.3)), pair);
    CHECK(res.hjb[0] == 0.0);
    CHECK(res.hjb[1] == 0.0);
    CHECK(res.fp[0] == 0.0);
    CHECK(res.fp[1] == 0.0);
}

TEST_CASE("fokker-planck residual is a pure discretization artifact") {
    // For any smooth positive v the continuum flux nu~ m' + m u' vanishes
    // identically under Hopf-Cole, so the discrete residual must shrink at
    // second order even though the state solves nothing.
    const auto pair = linear_pair(1.0, 1.0);
    for (EdgeDensity density : {EdgeDensity::Geometric, EdgeDensity::Arithmetic}) {
        double errs[3];
        int idx = 0;
        for (int m : {128, 256, 512}) {
            Grid grid(m);
            const MFGResiduals res = mfg_residuals(grid, to_mfg(grid, manufactured_state(grid, 0.08, 0.3)), pair,
                                                   density);
            errs[idx++] = std::max(res.fp[0], res.fp[1]);
        }
        for (int i = 0; i + 1 < 3; ++i) {
            const double order = std::log2(errs[i] / errs[i + 1]);
            CHECK(order > 1.8);
            CHECK(order < 2.4);
        }
    }
}

TEST_CASE("hjb residual at a branch point shrinks under refinement with the state's own multipliers") {
    const auto pair = linear_pair(1.0, 1.0);
    double errs[2];
    int idx = 0;
    for (int m : {128, 256}) {
        Grid grid(m);
        const auto state = solve_on_branch_at_beta(grid, pair, 1, 40.0);
        REQUIRE(state.has_value());
        const MFGResiduals res = mfg_residuals(grid, to_mfg(grid, *state), pair);
        errs[idx++] = std::max(res.hjb[0], res.hjb[1]);
    }
    const double order = std::log2(errs[0] / errs[1]);
    CHECK(order > 1.6);
}

TEST_CASE("segregation transfers through the transformation") {
    Grid grid(192);
    const auto pair = linear_pair(1.0, 1.0);
    const auto state = solve_on_branch_at_beta(grid, pair, 1, 60.0);
    REQUIRE(state.has_value());
    const MFGState mfg = to_mfg(grid, *state);
    ScalarField root(mfg.m1.size());
    for (size_t j = 0; j < root.size(); ++j) root[j] = std::sqrt(mfg.m1[j] * mfg.m2[j]);
    CHECK(integrate(grid, root) == doctest::Approx(segregation_metric(grid, *state)).epsilon(1e-13));
}
