#pragma once

#include <optional>

#include "mfgseg/interactions.hpp"
#include "mfgseg/spectral.hpp"

namespace mfgseg {

/// One point of a solution branch: the unknowns (v1, v2, lambda1, lambda2)
/// of the reduced system at viscosity nu, with unit L2 masses and the
/// recorded sup-norm PDE residual.
struct SolutionState {
    double nu = 0.0;
    ScalarField v1, v2;
    double lambda1 = 0.0, lambda2 = 0.0;
    double residual_sup = 0.0;
    int iterations = 0;
};

struct Kick {
    int mode = 1;
    double amplitude = 0.0;
};

struct BestResponseConfig {
    double damping = 0.5;  // omega in (0,1]
    int max_iters = 500;
    double tol = 1e-11;  // sup-norm fixed-point tolerance, also relative lambda change
    std::optional<Kick> perturbation;
};

/// Principal eigenpair of nu*L + diag(g_i(v_other^2)); `which` selects i = 1 or 2.
std::pair<double, ScalarField> best_response(const Grid& grid, double nu, const InteractionPair& pair,
                                             const ScalarField& v_other, int which);

enum class NashStatus { Converged, NotConverged };

struct NashResult {
    NashStatus status = NashStatus::NotConverged;
    SolutionState state;
    double last_change = 0.0;
};

/// Damped Gauss-Seidel best-response iteration: v1 then v2, each mixed with
/// weight omega and renormalized to the constraint sphere. Convergence needs
/// both the sup-norm field change and the relative lambda change below tol.
NashResult solve_nash(const Grid& grid, double nu, const InteractionPair& pair, const BestResponseConfig& config,
                      ScalarField v1_init, ScalarField v2_init);

/// Same, starting from the trivial pair (1,1), optionally kicked along the
/// discrete Neumann eigenfunction of config.perturbation->mode:
/// v1 -> 1 + eps psi_k, v2 -> 1 - eps psi_k (then renormalized).
NashResult solve_nash(const Grid& grid, double nu, const InteractionPair& pair, const BestResponseConfig& config);

/// sup over both components of |nu L v_i + g_i(v_j^2) v_i - lambda_i v_i|.
double pde_residual_sup(const Grid& grid, const SolutionState& state, const InteractionPair& pair);

struct IdentityReport {
    // |nu * int |v'|^2 + int g_i(v_j^2) v_i^2 - lambda_i|, exact by summation
    // by parts at discrete solutions.
    double id1[2] = {0, 0};
    // |nu * h * sum (dv)^2/(v_l v_r) + lambda_i - int g_i(v_j^2)|.
    double id2[2] = {0, 0};
    bool bracket_strict[2] = {false, false};      // min g < lambda < max g
    bool bracket_degenerate[2] = {false, false};  // g range collapsed (trivial state)
    bool bound[2] = {false, false};               // C_g^{-1} int v1^2 v2^2 <= lambda <= C_g
    double c_g_used = 0.0;
};

IdentityReport identity_residuals(const Grid& grid, const SolutionState& state, const InteractionPair& pair);

/// Discrete energy whose coordinate minimization is one best-response
/// half-step in the linear case: gamma2 D(v1) + gamma1 D(v2) + beta gamma1
/// gamma2 int v1^2 v2^2 with beta = 1/nu (transformed-variable J_beta).
double nash_energy_linear(const Grid& grid, double nu, double gamma1, double gamma2, const ScalarField& v1,
                          const ScalarField& v2);

}  // namespace mfgseg
