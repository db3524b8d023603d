#pragma once

#include <optional>
#include <string>

#include "mfgseg/nash.hpp"

namespace mfgseg {

/// The continuation unknown X = (v1, v2, lambda1, lambda2, beta) of the
/// rescaled system -v'' + beta g_i(v_j^2) v = beta lambda_i v (beta = 1/nu;
/// the multipliers coincide with those of the nu-form system).
struct ExtendedVector {
    ScalarField v1, v2;
    double lambda1 = 0.0, lambda2 = 0.0, beta = 0.0;
};

struct BifurcationValue {
    int k = 0;
    double beta = 0.0;
    double nu = 0.0;
};

/// beta_k = mu_k^h / (2 sqrt(g1'(1) g2'(1))) with the discrete eigenvalue
/// mu_k^h, so branch switching matches where the discrete trivial branch
/// actually loses stability.
std::vector<BifurcationValue> bifurcation_points(const InteractionPair& pair, int k_max, const Grid& grid);

/// Kernel of the linearization at (beta_k, 1, 1):
/// (-sqrt(a1) psi_k, sqrt(a2) psi_k, 0, 0, 0), a_i = g_i'(1), psi_k the
/// L2-normalized discrete Neumann eigenfunction. Components have zero mean.
ExtendedVector kernel_direction(const InteractionPair& pair, int k, const Grid& grid);

/// Crandall-Rabinowitz expansion coefficients at beta_k evaluated from the
/// closed forms with g-derivatives at s = 1 and discrete moments of psi_k.
/// In 1D the cubic moment vanishes, so b = 0 and the local branch is the
/// parabola beta = beta_k + c eps^2.
struct ExpansionCoefficients {
    double a = 0.0, b = 0.0, c = 0.0;
};

ExpansionCoefficients expansion_coefficients(const InteractionPair& pair, int k, const Grid& grid);

/// Pseudo-arclength anchor: <X - base, tangent>_w = ds in the weighted inner
/// product (h on fields, 1 on lambdas, beta_weight on beta).
struct ContinuationAnchor {
    ExtendedVector base;
    ExtendedVector tangent;
    double ds = 0.0;
    double beta_weight = 1.0;
};

enum class NewtonStatus { Converged, Diverged };

struct NewtonResult {
    NewtonStatus status = NewtonStatus::Diverged;
    ExtendedVector x;
    int iterations = 0;
    double residual = 0.0;  // final scaled residual
    int det_sign = 0;       // sign of the bordered Jacobian determinant
};

/// Newton on the 2M+3 system (PDE rows, two mass constraints, arclength row;
/// beta frozen when no anchor is given) with the analytic bordered Jacobian,
/// solved by banded elimination of the interleaved core plus a rank-3 Schur
/// complement. Converged means scaled residual < 1e-10 within 25 iterations.
NewtonResult newton_correct(const Grid& grid, const InteractionPair& pair, ExtendedVector x,
                            const std::optional<ContinuationAnchor>& anchor);

/// Weighted tangent at x: solves the bordered system with the previous
/// tangent as border row, normalized to unit weighted norm and oriented
/// along t_prev. det_sign_out, when given, receives the sign of the bordered
/// determinant (the fold/stability test function).
ExtendedVector branch_tangent(const Grid& grid, const InteractionPair& pair, const ExtendedVector& x,
                              const ExtendedVector& t_prev, double beta_weight, int* det_sign_out = nullptr);

/// Stacked residual of the extended system, ordered (v1_0, v2_0, v1_1, v2_1,
/// ..., C1, C2, arc). Verification hook for the analytic Jacobian.
std::vector<double> extended_residual(const Grid& grid, const InteractionPair& pair, const ExtendedVector& x,
                                      const std::optional<ContinuationAnchor>& anchor);

/// Analytic Jacobian applied to a direction, same row ordering as
/// extended_residual.
std::vector<double> apply_extended_jacobian(const Grid& grid, const InteractionPair& pair, const ExtendedVector& x,
                                            const std::optional<ContinuationAnchor>& anchor,
                                            const ExtendedVector& dir);

struct StepPolicy {
    double ds0 = 0.02;
    double ds_min = 1e-8;
    double ds_max = 0.5;
    double grow = 1.3;
    double eps0 = 1e-2;    // branch-switch amplitude along the kernel
    double beta_cap = 0.0; // 0: derived as 1.25 / target_nu_min
    int max_steps = 100000;
};

struct BranchPoint {
    SolutionState state;
    ExtendedVector tangent;
    double arclength = 0.0;
    int newton_iters = 0;
    int stability_indicator = 0;
    bool fold = false;
};

enum class BranchStatus {
    ReachedTargetNu,
    ReachedBetaCap,
    GridResolutionLimit,  // interface width sqrt(nu) fell below 3h: refusal, not inaccuracy
    BranchIntegrityFailure,
    StepUnderflow,
    SwitchFailed,
};

struct Branch {
    int k = 1;
    double origin_beta = 0.0;
    std::vector<BranchPoint> points;
    BranchStatus status = BranchStatus::SwitchFailed;
    std::string stop_reason;
    int grid_m = 0;
};

/// Traces C_k from its bifurcation point toward nu <= target_nu_min with
/// tangent predictor / Newton corrector and adaptive step: halve on failure,
/// grow by `grow` after fast correctors. Every accepted point is validated
/// (mass, positivity, residual, morphology label k-1); a persistent label
/// change stops the trace with BranchIntegrityFailure.
Branch trace_branch(const Grid& grid, const InteractionPair& pair, int k, double target_nu_min,
                    const StepPolicy& policy = {});

/// Branch point at exactly beta = beta_target: traces until beta_target is
/// passed, then corrects with beta frozen.
std::optional<SolutionState> solve_on_branch_at_beta(const Grid& grid, const InteractionPair& pair, int k,
                                                     double beta_target, const StepPolicy& policy = {});

}  // namespace mfgseg
