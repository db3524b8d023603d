#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mfgseg/continuation.hpp"
#include "mfgseg/nash.hpp"
#include "mfgseg/variational.hpp"

using namespace mfgseg;

namespace {
const double kTwoPiSq = 2.0 * M_PI * M_PI;
}

TEST_CASE("j_beta closed values") {
    Grid grid(128);
    SUBCASE("trivial pair has energy gamma1 gamma2 beta") {
        for (double beta : {1.0, 25.0}) {
            VariationalProblem prob{2.0, 3.0, beta, grid};
            const double value = j_beta(prob, grid.field(std::sqrt(3.0)), grid.field(std::sqrt(2.0)));
            CHECK(value == doctest::Approx(2.0 * 3.0 * beta).epsilon(1e-12));
        }
    }
    SUBCASE("disjoint cosine profiles give c_inf up to one-cell overlap") {
        VariationalProblem prob{1.0, 1.0, 1000.0, grid};
        const GammaLimitReference ref = gamma_limit_reference(1.0, 1.0, grid);
        const double value = j_beta(prob, ref.vt1, ref.vt2);
        // The kink at x0 costs O(h) in the discrete Dirichlet energy.
        CHECK(std::fabs(value - kTwoPiSq) < 20.0 * grid.spacing() * kTwoPiSq);
    }
    SUBCASE("deterministic") {
        VariationalProblem prob{1.0, 1.0, 10.0, grid};
        ScalarField w = grid.field();
        for (int j = 0; j < grid.size(); ++j) w[j] = 1.0 + 0.2 * std::sin(2.0 * M_PI * grid.node(j));
        CHECK(j_beta(prob, w, w) == j_beta(prob, w, w));
    }
}

TEST_CASE("gamma limit reference") {
    Grid grid(512);
    SUBCASE("symmetric case") {
        const GammaLimitReference ref = gamma_limit_reference(1.0, 1.0, grid);
        CHECK(ref.x0 == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(ref.c_inf == doctest::Approx(kTwoPiSq).epsilon(1e-14));
        for (int j = 0; j < grid.size(); ++j) {
            const double x = grid.node(j);
            const double expected = x <= 0.5 ? 2.0 * std::cos(M_PI * x) : 0.0;
            CHECK(ref.vt1[j] == doctest::Approx(expected).epsilon(1e-12).scale(2.0));
        }
    }
    SUBCASE("asymmetric interface location") {
        CHECK(gamma_limit_reference(1.0, 8.0, grid).x0 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("masses and overlap") {
        const GammaLimitReference ref = gamma_limit_reference(2.0, 5.0, grid);
        ScalarField sq(ref.vt1.size());
        for (size_t j = 0; j < sq.size(); ++j) sq[j] = ref.vt1[j] * ref.vt1[j];
        CHECK(integrate(grid, sq) == doctest::Approx(5.0).epsilon(1e-4));
        for (size_t j = 0; j < sq.size(); ++j) sq[j] = ref.vt2[j] * ref.vt2[j];
        CHECK(integrate(grid, sq) == doctest::Approx(2.0).epsilon(1e-4));
        long double overlap = 0.0L;
        for (size_t j = 0; j < sq.size(); ++j) overlap += static_cast<long double>(ref.vt1[j]) * ref.vt2[j];
        CHECK(static_cast<double>(overlap) * grid.spacing() < 1e-12);  // supports share only x0
    }
}

TEST_CASE("minimize below the nontriviality threshold stays trivial") {
    Grid grid(128);
    VariationalProblem prob{1.0, 1.0, 1.0, grid};
    const MinimizerResult result = minimize(prob);
    CHECK_FALSE(result.nontrivial);
    CHECK(result.c_beta == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("minimize above the threshold segregates and beats both candidates") {
    Grid grid(128);
    VariationalProblem prob{1.0, 1.0, 25.0, grid};
    const MinimizerResult result = minimize(prob);
    CHECK(result.nontrivial);
    CHECK(result.c_beta < kTwoPiSq);         // below the sign-split competitor
    CHECK(result.c_beta < 25.0);             // below the trivial candidate
    CHECK(result.c_beta == doctest::Approx(j_beta(prob, result.vt1, result.vt2)).epsilon(1e-12));

    ScalarField sq(result.vt1.size());
    for (size_t j = 0; j < sq.size(); ++j) sq[j] = result.vt1[j] * result.vt1[j];
    CHECK(integrate(grid, sq) == doctest::Approx(1.0).epsilon(1e-10));
    for (size_t j = 0; j < sq.size(); ++j) sq[j] = result.vt2[j] * result.vt2[j];
    CHECK(integrate(grid, sq) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("warm-started sweep is monotone and bounded") {
    Grid grid(256);
    const std::vector<double> betas = {25, 50, 100, 200, 400};
    const std::vector<double> c_values = monotone_gamma_check(1.0, 1.0, betas, grid);
    REQUIRE(c_values.size() == betas.size());
    const double h = grid.spacing();
    for (size_t i = 0; i < c_values.size(); ++i) {
        if (i > 0) CHECK(c_values[i] >= c_values[i - 1] - 1e-9);
        CHECK(c_values[i] <= kTwoPiSq * (1.0 + 10.0 * h * h));
    }
    CHECK_THROWS_AS(monotone_gamma_check(1.0, 1.0, {50, 25}, grid), std::invalid_argument);
}

TEST_CASE("coupling decay at minimizers") {
    Grid grid(128);
    for (double beta : {25.0, 100.0, 400.0}) {
        VariationalProblem prob{1.0, 1.0, beta, grid};
        const MinimizerResult result = minimize(prob);
        long double coupling = 0.0L;
        for (size_t j = 0; j < result.vt1.size(); ++j) {
            const double p = result.vt1[j] * result.vt2[j];
            coupling += static_cast<long double>(p) * p;
        }
        CHECK(beta * static_cast<double>(coupling) * grid.spacing() <= kTwoPiSq * (1.0 + 1e-6));
    }
}

TEST_CASE("large-beta minimizer approaches the segregated energy at rate beta^{-1/4}") {
    Grid grid(256);
    // Warm-start chain keeps each solve cheap. The deficit c_inf - c_beta
    // decays like the interface width beta^{-1/4} (the m^4 ~ nu amplitude
    // law), so successive 4x beta steps shrink it by about sqrt(2).
    const std::vector<double> c_values = monotone_gamma_check(1.0, 1.0, {625, 2500, 10000}, grid);
    std::vector<double> deficits;
    for (double c : c_values) {
        CHECK(c < kTwoPiSq);
        deficits.push_back(kTwoPiSq - c);
    }
    for (size_t i = 0; i + 1 < deficits.size(); ++i) {
        const double ratio = deficits[i] / deficits[i + 1];
        CHECK(ratio > 1.2);
        CHECK(ratio < 1.7);
    }
    CHECK(deficits.back() / kTwoPiSq < 0.15);
}

TEST_CASE("branch endpoints and direct minimization agree deep in the segregated regime") {
    // Two independent routes to the same state: pseudo-arclength continuation
    // of the nontrivial branch, and alternating minimization of J_beta.
    Grid grid(256);
    const double gamma1 = 1.0, gamma2 = 8.0;
    const InteractionPair pair(InteractionSpec::linear(gamma1), InteractionSpec::linear(gamma2));
    const Branch branch = trace_branch(grid, pair, 1, 5e-4);
    REQUIRE(branch.status == BranchStatus::ReachedTargetNu);
    const SolutionState& s = branch.points.back().state;

    ScalarField vt1 = s.v1, vt2 = s.v2;
    for (auto& v : vt1) v *= std::sqrt(gamma2);
    for (auto& v : vt2) v *= std::sqrt(gamma1);
    VariationalProblem prob{gamma1, gamma2, 1.0 / s.nu, grid};
    const double j_branch = j_beta(prob, vt1, vt2);
    const MinimizerResult direct = minimize(prob);
    CHECK(std::fabs(j_branch - direct.c_beta) <= 1e-9 * std::max(1.0, direct.c_beta));
}

TEST_CASE("minimizers map back to Nash equilibria of the original system") {
    Grid grid(128);
    const double beta = 50.0, gamma1 = 1.0, gamma2 = 1.0;
    VariationalProblem prob{gamma1, gamma2, beta, grid};
    const MinimizerResult result = minimize(prob);
    REQUIRE(result.nontrivial);

    // Original variables: v1 = vt1/sqrt(gamma2), v2 = vt2/sqrt(gamma1), nu = 1/beta.
    SolutionState state;
    state.nu = 1.0 / beta;
    state.v1 = result.vt1;
    state.v2 = result.vt2;
    for (auto& v : state.v1) v /= std::sqrt(gamma2);
    for (auto& v : state.v2) v /= std::sqrt(gamma1);

    // Multipliers from the Rayleigh identity of each component.
    const InteractionPair pair(InteractionSpec::linear(gamma1), InteractionSpec::linear(gamma2));
    ScalarField gsq(state.v2.size());
    for (size_t j = 0; j < gsq.size(); ++j)
        gsq[j] = pair.g1.eval(0, state.v2[j] * state.v2[j]) * state.v1[j] * state.v1[j];
    state.lambda1 = state.nu * dirichlet_energy(grid, state.v1) + integrate(grid, gsq);
    for (size_t j = 0; j < gsq.size(); ++j)
        gsq[j] = pair.g2.eval(0, state.v1[j] * state.v1[j]) * state.v2[j] * state.v2[j];
    state.lambda2 = state.nu * dirichlet_energy(grid, state.v2) + integrate(grid, gsq);

    const double residual = pde_residual_sup(grid, state, pair);
    CHECK(residual < 1e-6 * (1.0 / (grid.spacing() * grid.spacing())) * state.nu);
}
