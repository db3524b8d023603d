#pragma once

#include "mfgseg/grid.hpp"

namespace mfgseg {

/// A = nu * L + diag(V): the symmetric tridiagonal Schrodinger operator whose
/// ground state defines a best response. Its smallest eigenvalue is bounded
/// below by min(V).
class SchrodingerOperator {
  public:
    SchrodingerOperator(const NeumannLaplacian& laplacian, double nu, ScalarField potential);

    const Grid& grid() const { return laplacian_.grid(); }
    int size() const { return laplacian_.grid().size(); }
    double nu() const { return nu_; }
    const ScalarField& potential() const { return potential_; }

    double diag(int j) const { return nu_ * laplacian_.diag(j) + potential_[static_cast<size_t>(j)]; }
    double offdiag() const { return nu_ * laplacian_.offdiag(); }

    ScalarField apply(const ScalarField& f) const;

    /// Natural magnitude for residual scaling: nu/h^2 + |V|_inf.
    double scale() const;

  private:
    NeumannLaplacian laplacian_;
    double nu_;
    ScalarField potential_;
};

struct EigenPair {
    double lambda = 0.0;
    ScalarField vec;
    int iterations = 0;
};

/// Number of eigenvalues of A strictly below x (Sturm sequence count).
int sturm_count(const SchrodingerOperator& op, double x);

/// k-th smallest eigenpair (k = 0 is the ground state). The eigenvalue is
/// located by Sturm bisection to relative width 1e-13 and polished by inverse
/// iteration; the eigenvector is normalized to integrate(v^2) = 1 with
/// v(node_0) > 0. Throws after 200 non-converging sweeps.
EigenPair kth_eigenpair(const SchrodingerOperator& op, int k);

/// Ground state: as kth_eigenpair(op, 0) but with the all-positive sign
/// convention, asserted entrywise.
EigenPair principal_eigenpair(const SchrodingerOperator& op);

}  // namespace mfgseg
