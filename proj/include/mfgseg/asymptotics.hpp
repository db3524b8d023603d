#pragma once

#include <string>
#include <vector>

#include "mfgseg/continuation.hpp"
#include "mfgseg/nash.hpp"

namespace mfgseg {

struct CriticalPoint {
    double location = 0.0;
    bool is_max = false;
};

/// Interior critical and inflection points per component. For a nontrivial
/// nondegenerate state both components carry the same critical count k and
/// k+1 inflections; any mismatch, or a flat run of 3+ cells, sets degenerate.
struct MorphologyReport {
    std::vector<CriticalPoint> critical1, critical2;
    std::vector<double> inflections1, inflections2;
    int label = 0;  // shared interior critical count (or max of the two if they differ)
    bool degenerate = false;
};

MorphologyReport count_critical_points(const Grid& grid, const SolutionState& state, const InteractionPair& pair);

/// Overlap integral of the two densities' square roots: integrate(v1 v2),
/// in (0,1] with 1 exactly at the trivial state.
double segregation_metric(const Grid& grid, const SolutionState& state);

struct NotMonotoneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Interface data on the first branch (monotone components). States with v1
/// increasing are reflected x -> 1-x first, so the reported quantities always
/// refer to the v1-decreasing orientation.
struct InterfaceReport {
    double x_m = 0.0;             // crossing of v1 and v2
    double m = 0.0;               // common value at the crossing
    double xi1 = 0.0, xi2 = 0.0;  // unique inflection points
    double lambda_over_nu1 = 0.0, lambda_over_nu2 = 0.0;
    double m4_over_nu = 0.0;
    bool reflected = false;
};

InterfaceReport interface_report(const Grid& grid, const SolutionState& state, const InteractionPair& pair);

/// Vanishing-viscosity limit profiles with gamma_i = g_i'(0):
/// ell_1 = (pi/(2 x0))^2, ell_2 = (pi/(2(1-x0)))^2, so that the half-period
/// supports tile (0,1) exactly: pi/(2 sqrt(ell1)) + pi/(2 sqrt(ell2)) = 1.
struct LimitProfile {
    double ell1 = 0.0, ell2 = 0.0, x0 = 0.0;
    ScalarField v1, v2;
};

LimitProfile limit_profile(const InteractionPair& pair, const Grid& grid);

/// The joint energy T, spatially constant along exact solutions; evaluated
/// per node with edge-averaged derivatives and trapezoid integrals anchored
/// at x_m. endpoint_* are the closed-form o(nu) endpoint expressions
/// (lambda_1/gamma_1) v1(0)^2 and (lambda_2/gamma_2) v2(1)^2.
struct JointEnergyReport {
    ScalarField values;
    double max_deviation = 0.0;
    double endpoint_left = 0.0;
    double endpoint_right = 0.0;
};

JointEnergyReport joint_energy(const Grid& grid, const SolutionState& state, const InteractionPair& pair);

struct ScalingRow {
    double nu = 0.0;
    double lambda1_over_nu = 0.0, lambda2_over_nu = 0.0;
    double m4_over_nu = 0.0;
    double x_m = 0.0, xi1 = 0.0, xi2 = 0.0;
    double seg = 0.0;
};

/// Per-point interface diagnostics along a first-branch trace plus
/// convergence assessment: relative drift of each ratio over the final
/// decade of nu, and Aitken-extrapolated limits of lambda_i/nu.
struct ScalingLawReport {
    std::vector<ScalingRow> rows;
    double drift_lambda1 = 0.0, drift_lambda2 = 0.0, drift_m4 = 0.0;
    double ell1_extrapolated = 0.0, ell2_extrapolated = 0.0;
};

ScalingLawReport scaling_law_report(const Grid& grid, const Branch& branch, const InteractionPair& pair);

struct BoundViolation {
    std::string which;
    double location = 0.0;
    double margin = 0.0;  // amount by which the slackened bound failed
};

/// Checks the first-branch a priori estimates (mass bounds, inflection
/// inequalities, endpoint and energy bounds, convexity slope bounds) with
/// O(h) slack of 5h times the right-hand scale. Empty result means no
/// violations.
std::vector<BoundViolation> apriori_bounds_check(const Grid& grid, const SolutionState& state,
                                                 const InteractionPair& pair);

}  // namespace mfgseg
