#pragma once

#include <utility>
#include <vector>

#include "mfgseg/interactions.hpp"
#include "mfgseg/spectral.hpp"

namespace mfgseg {

/// Linear-interaction minimization problem in the transformed variables:
/// J_beta(w1, w2) = int |w1'|^2 + |w2'|^2 + beta w1^2 w2^2 constrained to
/// int w1^2 = gamma2, int w2^2 = gamma1 (beta = 1/nu).
struct VariationalProblem {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double beta = 1.0;
    Grid grid;
};

struct MinimizerResult {
    ScalarField vt1, vt2;
    double c_beta = 0.0;
    bool nontrivial = false;
    int iterations = 0;
};

/// Discrete J_beta with edge-derivative Dirichlet energies and midpoint
/// quadrature.
double j_beta(const VariationalProblem& prob, const ScalarField& vt1, const ScalarField& vt2);

/// Alternating exact coordinate minimization: each half-step is the scaled
/// ground state of L + beta diag(w_other^2) on its constraint sphere, so
/// J_beta decreases monotonically. Runs from every start and keeps the best;
/// default starts are the trivial pair (sqrt(gamma2), sqrt(gamma1)) and the
/// sign-split competitor (a+ psi1^+, a- psi1^-).
MinimizerResult minimize(const VariationalProblem& prob,
                         std::vector<std::pair<ScalarField, ScalarField>> starts = {});

struct GammaLimitReference {
    double c_inf = 0.0;
    double x0 = 0.0;
    ScalarField vt1, vt2;  // disjointly supported cosine profiles at the nodes
};

/// Explicit segregated minimizer: x0 = cbrt(gamma2)/(cbrt(gamma1)+cbrt(gamma2)),
/// c_inf = (pi^2/4)(cbrt(gamma1)+cbrt(gamma2))^3.
GammaLimitReference gamma_limit_reference(double gamma1, double gamma2, const Grid& grid);

/// minimize over a strictly increasing beta list, warm-starting each run from
/// the previous minimizer. Returns c_beta per beta.
std::vector<double> monotone_gamma_check(double gamma1, double gamma2, const std::vector<double>& betas,
                                         const Grid& grid);

}  // namespace mfgseg
