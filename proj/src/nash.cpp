#include "mfgseg/nash.hpp"

#include <cmath>

namespace mfgseg {

namespace {

ScalarField coupling_potential(const InteractionSpec& g, const ScalarField& v_other) {
    ScalarField pot(v_other.size());
    for (size_t j = 0; j < v_other.size(); ++j) pot[j] = g.eval(0, v_other[j] * v_other[j]);
    return pot;
}

void require_positive(const ScalarField& f, const char* what) {
    for (double x : f)
        if (!(x > 0.0)) throw std::invalid_argument(std::string(what) + ": field must be strictly positive");
}

}  // namespace

std::pair<double, ScalarField> best_response(const Grid& grid, double nu, const InteractionPair& pair,
                                             const ScalarField& v_other, int which) {
    if (which != 1 && which != 2) throw std::invalid_argument("best_response: which must be 1 or 2");
    require_positive(v_other, "best_response");
    const InteractionSpec& g = (which == 1) ? pair.g1 : pair.g2;
    SchrodingerOperator op(NeumannLaplacian(grid), nu, coupling_potential(g, v_other));
    EigenPair ground = principal_eigenpair(op);
    return {ground.lambda, std::move(ground.vec)};
}

NashResult solve_nash(const Grid& grid, double nu, const InteractionPair& pair, const BestResponseConfig& config,
                      ScalarField v1, ScalarField v2) {
    if (!(config.damping > 0.0 && config.damping <= 1.0))
        throw std::invalid_argument("solve_nash: damping must lie in (0,1]");
    if (!(config.tol > 0.0)) throw std::invalid_argument("solve_nash: tol must be positive");
    require_positive(v1, "solve_nash");
    require_positive(v2, "solve_nash");
    normalize_mass(grid, v1);
    normalize_mass(grid, v2);

    const double omega = config.damping;
    double lambda1 = 0.0, lambda2 = 0.0;
    bool have_lambda = false;

    NashResult result;
    for (int it = 1; it <= config.max_iters; ++it) {
        auto [l1, b1] = best_response(grid, nu, pair, v2, 1);
        ScalarField v1_new = v1;
        for (size_t j = 0; j < v1.size(); ++j) v1_new[j] = (1.0 - omega) * v1[j] + omega * b1[j];
        normalize_mass(grid, v1_new);
        const double change1 = sup_distance(v1_new, v1);
        v1 = std::move(v1_new);

        auto [l2, b2] = best_response(grid, nu, pair, v1, 2);
        ScalarField v2_new = v2;
        for (size_t j = 0; j < v2.size(); ++j) v2_new[j] = (1.0 - omega) * v2[j] + omega * b2[j];
        normalize_mass(grid, v2_new);
        const double change2 = sup_distance(v2_new, v2);
        v2 = std::move(v2_new);

        const double lchange = have_lambda ? std::max(std::fabs(l1 - lambda1) / std::max(1.0, std::fabs(l1)),
                                                      std::fabs(l2 - lambda2) / std::max(1.0, std::fabs(l2)))
                                           : std::numeric_limits<double>::infinity();
        lambda1 = l1;
        lambda2 = l2;
        have_lambda = true;

        result.last_change = std::max(change1, change2);
        if (result.last_change < config.tol && (lchange < config.tol || it == 1)) {
            // At the fixed point the best-response eigenvalues are the multipliers.
            result.state.nu = nu;
            result.state.v1 = std::move(v1);
            result.state.v2 = std::move(v2);
            result.state.lambda1 = lambda1;
            result.state.lambda2 = lambda2;
            result.state.iterations = it;
            result.state.residual_sup = pde_residual_sup(grid, result.state, pair);
            result.status = NashStatus::Converged;
            return result;
        }
    }

    result.status = NashStatus::NotConverged;
    result.state.nu = nu;
    result.state.v1 = std::move(v1);
    result.state.v2 = std::move(v2);
    result.state.lambda1 = lambda1;
    result.state.lambda2 = lambda2;
    result.state.iterations = config.max_iters;
    result.state.residual_sup = pde_residual_sup(grid, result.state, pair);
    return result;
}

NashResult solve_nash(const Grid& grid, double nu, const InteractionPair& pair, const BestResponseConfig& config) {
    ScalarField v1 = grid.field(1.0);
    ScalarField v2 = grid.field(1.0);
    if (config.perturbation && config.perturbation->amplitude != 0.0) {
        const ScalarField psi = discrete_neumann_eigenfunction(grid, config.perturbation->mode);
        const double eps = config.perturbation->amplitude;
        for (int j = 0; j < grid.size(); ++j) {
            v1[static_cast<size_t>(j)] += eps * psi[static_cast<size_t>(j)];
            v2[static_cast<size_t>(j)] -= eps * psi[static_cast<size_t>(j)];
        }
        require_positive(v1, "solve_nash: kick amplitude too large");
        require_positive(v2, "solve_nash: kick amplitude too large");
    }
    return solve_nash(grid, nu, pair, config, std::move(v1), std::move(v2));
}

double pde_residual_sup(const Grid& grid, const SolutionState& state, const InteractionPair& pair) {
    NeumannLaplacian lap(grid);
    const ScalarField l1 = lap.apply(state.v1);
    const ScalarField l2 = lap.apply(state.v2);
    double r = 0.0;
    for (size_t j = 0; j < state.v1.size(); ++j) {
        const double g1 = pair.g1.eval(0, state.v2[j] * state.v2[j]);
        const double g2 = pair.g2.eval(0, state.v1[j] * state.v1[j]);
        r = std::max(r, std::fabs(state.nu * l1[j] + (g1 - state.lambda1) * state.v1[j]));
        r = std::max(r, std::fabs(state.nu * l2[j] + (g2 - state.lambda2) * state.v2[j]));
    }
    return r;
}

IdentityReport identity_residuals(const Grid& grid, const SolutionState& state, const InteractionPair& pair) {
    IdentityReport report;
    const double h = grid.spacing();
    const double seg_sq = [&] {
        long double acc = 0.0L;
        for (size_t j = 0; j < state.v1.size(); ++j) {
            const double p = state.v1[j] * state.v2[j];
            acc += static_cast<long double>(p) * p;
        }
        return static_cast<double>(acc) * h;
    }();

    const double range = std::max({4.0, 1.5 * sup_norm(state.v1) * sup_norm(state.v1),
                                   1.5 * sup_norm(state.v2) * sup_norm(state.v2)});
    report.c_g_used = pair.audited_c_g(range);

    for (int i = 0; i < 2; ++i) {
        const ScalarField& v = (i == 0) ? state.v1 : state.v2;
        const ScalarField& other = (i == 0) ? state.v2 : state.v1;
        const InteractionSpec& g = (i == 0) ? pair.g1 : pair.g2;
        const double lambda = (i == 0) ? state.lambda1 : state.lambda2;

        long double g_mass = 0.0L, g_weighted = 0.0L;
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < v.size(); ++j) {
            const double gj = g.eval(0, other[j] * other[j]);
            g_mass += gj;
            g_weighted += static_cast<long double>(gj) * v[j] * v[j];
            g_min = std::min(g_min, gj);
            g_max = std::max(g_max, gj);
        }

        long double dir = 0.0L, dir_weighted = 0.0L;
        for (size_t e = 0; e + 1 < v.size(); ++e) {
            const double dv = (v[e + 1] - v[e]) / h;
            dir += static_cast<long double>(dv) * dv;
            dir_weighted += static_cast<long double>(dv) * dv / (v[e] * v[e + 1]);
        }

        report.id1[i] = std::fabs(state.nu * static_cast<double>(dir) * h +
                                  static_cast<double>(g_weighted) * h - lambda);
        report.id2[i] = std::fabs(state.nu * static_cast<double>(dir_weighted) * h + lambda -
                                  static_cast<double>(g_mass) * h);

        const double span = g_max - g_min;
        report.bracket_degenerate[i] = span <= 1e-12 * std::max(1.0, std::fabs(g_max));
        report.bracket_strict[i] = !report.bracket_degenerate[i] && g_min < lambda && lambda < g_max;

        const double slack = 1e-10 * std::max(1.0, std::fabs(lambda));
        report.bound[i] = (seg_sq / report.c_g_used <= lambda + slack) && (lambda <= report.c_g_used + slack);
    }
    return report;
}

double nash_energy_linear(const Grid& grid, double nu, double gamma1, double gamma2, const ScalarField& v1,
                          const ScalarField& v2) {
    long double coupling = 0.0L;
    for (size_t j = 0; j < v1.size(); ++j) {
        const double p = v1[j] * v2[j];
        coupling += static_cast<long double>(p) * p;
    }
    const double beta = 1.0 / nu;
    return gamma2 * dirichlet_energy(grid, v1) + gamma1 * dirichlet_energy(grid, v2) +
           beta * gamma1 * gamma2 * static_cast<double>(coupling) * grid.spacing();
}

}  // namespace mfgseg
