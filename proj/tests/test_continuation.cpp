#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mfgseg/asymptotics.hpp"
#include "mfgseg/continuation.hpp"
#include "test_rng.hpp"

using namespace mfgseg;

namespace {

InteractionPair linear_pair(double gamma1, double gamma2) {
    return InteractionPair(InteractionSpec::linear(gamma1), InteractionSpec::linear(gamma2));
}

ExtendedVector trivial_at(const Grid& grid, const InteractionPair& pair, double beta) {
    ExtendedVector x;
    x.v1 = grid.field(1.0);
    x.v2 = grid.field(1.0);
    x.lambda1 = pair.g1.eval(0, 1.0);
    x.lambda2 = pair.g2.eval(0, 1.0);
    x.beta = beta;
    return x;
}

}  // namespace

TEST_CASE("bifurcation points from the discrete eigenvalues") {
    Grid grid(256);
    SUBCASE("linear symmetric k = 1") {
        const auto points = bifurcation_points(linear_pair(1.0, 1.0), 1, grid);
        CHECK(points[0].beta == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-4));
        CHECK(points[0].beta == doctest::Approx(discrete_neumann_eigenvalue(grid, 1) / 2.0).epsilon(1e-14));
        CHECK(points[0].nu == doctest::Approx(0.20264).epsilon(1e-3));
    }
    SUBCASE("slopes scale the threshold") {
        const auto points = bifurcation_points(linear_pair(4.0, 1.0), 2, grid);
        CHECK(points[1].beta == doctest::Approx(M_PI * M_PI).epsilon(1e-3));
    }
    SUBCASE("k = 3") {
        const auto points = bifurcation_points(linear_pair(1.0, 1.0), 3, grid);
        CHECK(points[2].nu == doctest::Approx(2.0 / (9.0 * M_PI * M_PI)).epsilon(1e-3));
    }
}

TEST_CASE("kernel direction") {
    Grid grid(128);
    SUBCASE("symmetric amplitudes and zero mean") {
        const ExtendedVector dir = kernel_direction(linear_pair(1.0, 1.0), 1, grid);
        for (int j = 0; j < grid.size(); ++j) {
            const double expected = std::sqrt(2.0) * std::cos(M_PI * grid.node(j));
            CHECK(dir.v1[j] == doctest::Approx(-expected).epsilon(1e-13));
            CHECK(dir.v2[j] == doctest::Approx(expected).epsilon(1e-13));
        }
        CHECK(std::fabs(integrate(grid, dir.v1)) < 1e-13);
        CHECK(std::fabs(integrate(grid, dir.v2)) < 1e-13);
        CHECK(dir.beta == 0.0);
    }
    SUBCASE("amplitude ratio sqrt(a1):sqrt(a2) with opposite signs") {
        const ExtendedVector dir = kernel_direction(linear_pair(9.0, 1.0), 1, grid);
        for (int j = 0; j < grid.size(); ++j) CHECK(dir.v1[j] == doctest::Approx(-3.0 * dir.v2[j]).epsilon(1e-13));
    }
}

TEST_CASE("expansion coefficients evaluate the closed forms") {
    Grid grid(256);
    SUBCASE("linear symmetric k = 1") {
        const ExpansionCoefficients coef = expansion_coefficients(linear_pair(1.0, 1.0), 1, grid);
        CHECK(std::fabs(coef.a + 4.0) < 1e-6);
        CHECK(std::fabs(coef.b) < 1e-10);
        CHECK(std::fabs(coef.c - 3.0 * M_PI * M_PI / 8.0) / (3.0 * M_PI * M_PI / 8.0) < 0.01);
        CHECK(coef.c > 0.0);  // branch emanates to the right of beta*
    }
    SUBCASE("cubic moment vanishes for every kind in 1D") {
        const InteractionPair pair(InteractionSpec::rational_perturbed(1.0, 1.0, 1.0),
                                   InteractionSpec::rational_perturbed(2.0, 0.5, 2.0));
        for (int k : {1, 2, 3}) CHECK(std::fabs(expansion_coefficients(pair, k, grid).b) < 1e-10);
    }
}

TEST_CASE("newton_correct leaves the trivial solution fixed") {
    Grid grid(64);
    const auto pair = linear_pair(1.0, 1.0);
    const NewtonResult result = newton_correct(grid, pair, trivial_at(grid, pair, 3.0), std::nullopt);
    CHECK(result.status == NewtonStatus::Converged);
    CHECK(result.iterations == 0);
    CHECK(sup_distance(result.x.v1, grid.field(1.0)) == 0.0);
}

TEST_CASE("newton_correct lands on the pitchfork parabola") {
    Grid grid(256);
    const auto pair = linear_pair(1.0, 1.0);
    const double beta1 = bifurcation_points(pair, 1, grid)[0].beta;
    const double beta = beta1 * 1.01;
    // Local coefficient of the parabola beta = beta1 + c eps^2 for this case
    // (Lyapunov-Schmidt with the second-order corrector): c = 1.1 pi^2.
    const double c_parabola = 1.1 * M_PI * M_PI;
    const double eps = std::sqrt((beta - beta1) / c_parabola);
    ExtendedVector x = trivial_at(grid, pair, beta);
    const ExtendedVector kernel = kernel_direction(pair, 1, grid);
    for (size_t j = 0; j < x.v1.size(); ++j) {
        x.v1[j] -= eps * kernel.v1[j];
        x.v2[j] -= eps * kernel.v2[j];
    }
    const NewtonResult result = newton_correct(grid, pair, std::move(x), std::nullopt);
    REQUIRE(result.status == NewtonStatus::Converged);
    const double amplitude = sup_distance(result.x.v1, grid.field(1.0));
    // sup amplitude ~ eps sqrt(2) for the normalized kernel, within 5%.
    CHECK(std::fabs(amplitude - eps * std::sqrt(2.0)) / (eps * std::sqrt(2.0)) < 0.05);
    CHECK(result.x.lambda1 < 1.0);
    CHECK(result.x.lambda1 == doctest::Approx(result.x.lambda2).epsilon(1e-9));
}

TEST_CASE("local expansion of the symmetric branch, all orders") {
    // Lyapunov-Schmidt on the symmetric reduction gives, with amplitude a of
    // the kernel projection: lambda = 1 - 2 a^2, corrector
    // (v1+v2)/2 = 1 + a^2 (-1/2 + cos(2 pi x)/10), beta = beta_1 + 1.1 pi^2 a^2.
    Grid grid(512);
    const auto pair = linear_pair(1.0, 1.0);
    const double beta1 = bifurcation_points(pair, 1, grid)[0].beta;
    const ScalarField psi = discrete_neumann_eigenfunction(grid, 1);
    const double beta = beta1 * 1.0001;

    ExtendedVector x = trivial_at(grid, pair, beta);
    const ExtendedVector kernel = kernel_direction(pair, 1, grid);
    const double eps = std::sqrt((beta - beta1) / (1.1 * M_PI * M_PI));
    for (size_t j = 0; j < x.v1.size(); ++j) {
        x.v1[j] -= eps * kernel.v1[j];
        x.v2[j] -= eps * kernel.v2[j];
    }
    const NewtonResult result = newton_correct(grid, pair, std::move(x), std::nullopt);
    REQUIRE(result.status == NewtonStatus::Converged);

    ScalarField proj(result.x.v1.size());
    for (size_t j = 0; j < proj.size(); ++j) proj[j] = (result.x.v1[j] - 1.0) * psi[j];
    const double a = std::fabs(integrate(grid, proj));
    CHECK((result.x.lambda1 - 1.0) / (a * a) == doctest::Approx(-2.0).epsilon(1e-4));
    CHECK((beta - beta1) / (a * a) == doctest::Approx(1.1 * M_PI * M_PI).epsilon(1e-3));
    for (int j = 0; j < grid.size(); ++j) {
        const double s2 = (0.5 * (result.x.v1[j] + result.x.v2[j]) - 1.0) / (a * a);
        const double reference = -0.5 + std::cos(2.0 * M_PI * grid.node(j)) / 10.0;
        CHECK(std::fabs(s2 - reference) < 1e-3);
    }
}

TEST_CASE("analytic jacobian matches central finite differences") {
    Grid grid(32);
    const InteractionPair pair(InteractionSpec::rational_perturbed(1.0, 1.0, 1.0), InteractionSpec::linear(1.3));
    TestRng rng(17);
    ExtendedVector x = trivial_at(grid, pair, 6.0);
    for (int j = 0; j < grid.size(); ++j) {
        x.v1[j] += rng.uniform(-0.2, 0.2);
        x.v2[j] += rng.uniform(-0.2, 0.2);
    }
    x.lambda1 = 1.1;
    x.lambda2 = 1.4;

    ContinuationAnchor anchor;
    anchor.base = x;
    anchor.tangent = trivial_at(grid, pair, 1.0);
    for (int j = 0; j < grid.size(); ++j) {
        anchor.tangent.v1[j] = rng.uniform(-1.0, 1.0);
        anchor.tangent.v2[j] = rng.uniform(-1.0, 1.0);
    }
    anchor.tangent.lambda1 = 0.3;
    anchor.tangent.lambda2 = -0.2;
    anchor.tangent.beta = 0.7;
    anchor.ds = 0.1;
    anchor.beta_weight = 0.5;
    const std::optional<ContinuationAnchor> opt_anchor = anchor;

    const int n = 2 * grid.size() + 3;
    auto set_coord = [&](ExtendedVector& vec, int c, double value) {
        if (c < 2 * grid.size()) {
            if (c % 2 == 0)
                vec.v1[c / 2] = value;
            else
                vec.v2[c / 2] = value;
        } else if (c == 2 * grid.size()) {
            vec.lambda1 = value;
        } else if (c == 2 * grid.size() + 1) {
            vec.lambda2 = value;
        } else {
            vec.beta = value;
        }
    };
    auto get_coord = [&](const ExtendedVector& vec, int c) -> double {
        if (c < 2 * grid.size()) return c % 2 == 0 ? vec.v1[c / 2] : vec.v2[c / 2];
        if (c == 2 * grid.size()) return vec.lambda1;
        if (c == 2 * grid.size() + 1) return vec.lambda2;
        return vec.beta;
    };

    double worst = 0.0;
    for (int c = 0; c < n; ++c) {
        ExtendedVector unit = trivial_at(grid, pair, 0.0);
        for (int j = 0; j < grid.size(); ++j) unit.v1[j] = unit.v2[j] = 0.0;
        unit.lambda1 = unit.lambda2 = unit.beta = 0.0;
        set_coord(unit, c, 1.0);
        const std::vector<double> analytic = apply_extended_jacobian(grid, pair, x, opt_anchor, unit);

        const double step = 1e-6 * std::max(1.0, std::fabs(get_coord(x, c)));
        ExtendedVector xp = x, xm = x;
        set_coord(xp, c, get_coord(x, c) + step);
        set_coord(xm, c, get_coord(x, c) - step);
        const std::vector<double> rp = extended_residual(grid, pair, xp, opt_anchor);
        const std::vector<double> rm = extended_residual(grid, pair, xm, opt_anchor);

        double row_scale = 1.0;
        for (int r = 0; r < n; ++r) row_scale = std::max(row_scale, std::fabs(analytic[r]));
        for (int r = 0; r < n; ++r) {
            const double fd = (rp[r] - rm[r]) / (2.0 * step);
            const double denom = std::max({std::fabs(analytic[r]), std::fabs(fd), 1e-6 * row_scale});
            worst = std::max(worst, std::fabs(analytic[r] - fd) / denom);
        }
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("first branch: monotone points, constant label, energy bound") {
    Grid grid(128);
    const auto pair = linear_pair(1.0, 1.0);
    const Branch branch = trace_branch(grid, pair, 1, 0.02);
    REQUIRE(branch.status == BranchStatus::ReachedTargetNu);
    REQUIRE(branch.points.size() >= 10);
    const double beta1 = branch.origin_beta;
    const double c_g = pair.audited_c_g(10.0);

    double prev_beta = 0.0;
    for (const BranchPoint& point : branch.points) {
        const SolutionState& s = point.state;
        const double beta = 1.0 / s.nu;
        CHECK(beta > prev_beta);  // no folds on this branch
        CHECK_FALSE(point.fold);
        prev_beta = beta;
        CHECK(beta >= beta1 / 2.0);

        const MorphologyReport morph = count_critical_points(grid, s, pair);
        CHECK(morph.critical1.empty());
        CHECK(morph.critical2.empty());
        CHECK(morph.inflections1.size() == 1);

        // v1 decreasing, v2 increasing (switch orientation).
        CHECK(s.v1.front() > s.v1.back());
        CHECK(s.v2.front() < s.v2.back());

        const IdentityReport identities = identity_residuals(grid, s, pair);
        CHECK(identities.id1[0] <= 1e-8);
        CHECK(identities.id1[1] <= 1e-8);
        CHECK(identities.id2[0] <= 64.0 * grid.spacing() * grid.spacing());
        CHECK(identities.bound[0]);
        CHECK(identities.bound[1]);

        CHECK(dirichlet_energy(grid, s.v1) <= c_g * beta * (1.0 + 1e-9));
        CHECK(dirichlet_energy(grid, s.v2) <= c_g * beta * (1.0 + 1e-9));
    }
}

TEST_CASE("second branch: one interior critical point everywhere, disjoint from C_1") {
    Grid grid(128);
    const auto pair = linear_pair(1.0, 1.0);
    const Branch branch = trace_branch(grid, pair, 2, 0.02);
    REQUIRE(branch.status == BranchStatus::ReachedTargetNu);
    for (const BranchPoint& point : branch.points) {
        const MorphologyReport morph = count_critical_points(grid, point.state, pair);
        CHECK(morph.critical1.size() == 1);
        CHECK(morph.critical2.size() == 1);
        CHECK(morph.inflections1.size() == 2);
    }
    CHECK(branch.origin_beta == doctest::Approx(4.0 * bifurcation_points(pair, 1, grid)[0].beta).epsilon(1e-3));
}

TEST_CASE("local parabola through the first points") {
    Grid grid(128);
    const auto pair = linear_pair(1.0, 1.0);
    const Branch branch = trace_branch(grid, pair, 1, 0.05);
    REQUIRE(branch.points.size() >= 5);
    const double beta1 = branch.origin_beta;
    const ScalarField psi = discrete_neumann_eigenfunction(grid, 1);

    double sx2 = 0, sx4 = 0, sy = 0, sxy = 0;
    for (size_t i = 0; i < 5; ++i) {
        const SolutionState& s = branch.points[i].state;
        ScalarField proj(s.v1.size());
        for (size_t j = 0; j < proj.size(); ++j) proj[j] = (s.v1[j] - 1.0) * psi[j];
        const double eps = std::fabs(integrate(grid, proj));
        const double beta = 1.0 / s.nu;
        sx2 += eps * eps;
        sx4 += eps * eps * eps * eps;
        sy += beta;
        sxy += beta * eps * eps;
    }
    const double c_fit = (5.0 * sxy - sx2 * sy) / (5.0 * sx4 - sx2 * sx2);
    const double intercept = (sy - c_fit * sx2) / 5.0;
    // Intercept recovers the bifurcation point; the coefficient matches the
    // corrector-completed local expansion 1.1 pi^2 (not the bare cubic form).
    CHECK(std::fabs(intercept - beta1) / beta1 < 1e-3);
    CHECK(std::fabs(c_fit - 1.1 * M_PI * M_PI) / (1.1 * M_PI * M_PI) < 0.1);
}

TEST_CASE("reflection of a symmetric branch point still solves the system") {
    Grid grid(96);
    const auto pair = linear_pair(1.0, 1.0);
    const auto state = solve_on_branch_at_beta(grid, pair, 1, 20.0);
    REQUIRE(state.has_value());
    SolutionState mirrored = *state;
    std::reverse(mirrored.v1.begin(), mirrored.v1.end());
    std::reverse(mirrored.v2.begin(), mirrored.v2.end());
    std::swap(mirrored.v1, mirrored.v2);
    std::swap(mirrored.lambda1, mirrored.lambda2);
    CHECK(pde_residual_sup(grid, mirrored, pair) <= 10.0 * state->residual_sup + 1e-9);
}

TEST_CASE("grid-resolution refusal instead of silent inaccuracy") {
    Grid grid(16);
    const auto pair = linear_pair(1.0, 1.0);
    const Branch branch = trace_branch(grid, pair, 1, 1e-4);
    CHECK(branch.status == BranchStatus::GridResolutionLimit);
    CHECK(!branch.stop_reason.empty());
    for (const BranchPoint& point : branch.points) CHECK(std::sqrt(point.state.nu) >= 3.0 * grid.spacing() * 0.9);
}

TEST_CASE("solve_on_branch_at_beta pins the parameter exactly") {
    Grid grid(128);
    const auto pair = linear_pair(1.0, 1.0);
    const auto state = solve_on_branch_at_beta(grid, pair, 1, 30.0);
    REQUIRE(state.has_value());
    CHECK(state->nu == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    CHECK(state->residual_sup < 1e-6);
}

TEST_CASE("best-response solve and continuation agree on the nontrivial state at nu = 0.1") {
    Grid grid(128);
    const auto pair = linear_pair(1.0, 1.0);
    const auto traced = solve_on_branch_at_beta(grid, pair, 1, 10.0);
    REQUIRE(traced.has_value());

    BestResponseConfig config;
    config.perturbation = Kick{1, 0.1};
    config.max_iters = 6000;
    config.tol = 1e-12;
    const NashResult iterated = solve_nash(grid, 0.1, pair, config);
    REQUIRE(iterated.status == NashStatus::Converged);

    CHECK(std::fabs(iterated.state.lambda1 - traced->lambda1) <= 1e-6);
    CHECK(std::fabs(iterated.state.lambda2 - traced->lambda2) <= 1e-6);
    CHECK(sup_distance(iterated.state.v1, traced->v1) <= 1e-5);
}

TEST_CASE("rational pair also switches and traces") {
    Grid grid(128);
    const InteractionPair pair(InteractionSpec::rational_perturbed(1.0, 0.5, 1.0),
                               InteractionSpec::rational_perturbed(1.0, 0.5, 1.0));
    const Branch branch = trace_branch(grid, pair, 1, 0.05);
    REQUIRE(branch.status == BranchStatus::ReachedTargetNu);
    for (const BranchPoint& point : branch.points) {
        const MorphologyReport morph = count_critical_points(grid, point.state, pair);
        CHECK(morph.critical1.empty());
        CHECK(morph.inflections1.size() == 1);
    }
}

TEST_CASE("mixed kinds with distinct slopes keep orientation and morphology") {
    Grid grid(256);
    const InteractionPair pair(InteractionSpec::rational_perturbed(2.0, 1.0, 2.0), InteractionSpec::linear(0.7));
    for (int k : {1, 2}) {
        const Branch branch = trace_branch(grid, pair, k, 5e-3);
        REQUIRE(branch.status == BranchStatus::ReachedTargetNu);
        const SolutionState& last = branch.points.back().state;
        const MorphologyReport morph = count_critical_points(grid, last, pair);
        CHECK(static_cast<int>(morph.critical1.size()) == k - 1);
        CHECK(static_cast<int>(morph.critical2.size()) == k - 1);
        CHECK(static_cast<int>(morph.inflections1.size()) == k);
        CHECK(last.v1.front() > last.v1.back());
    }
}
