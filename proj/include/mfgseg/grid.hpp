#pragma once

#include <stdexcept>
#include <vector>

namespace mfgseg {

using ScalarField = std::vector<double>;

/// Cell-centered uniform mesh of Omega = (0,1) with homogeneous Neumann
/// boundaries. Nodes sit at (j+1/2)h, j = 0..M-1, h = 1/M.
class Grid {
  public:
    explicit Grid(int cell_count);

    int size() const { return m_; }
    double spacing() const { return h_; }
    double node(int j) const { return nodes_[j]; }
    const std::vector<double>& nodes() const { return nodes_; }

    ScalarField field(double value = 0.0) const { return ScalarField(static_cast<size_t>(m_), value); }

  private:
    int m_;
    double h_;
    std::vector<double> nodes_;
};

/// Midpoint quadrature h * sum(f); exact for per-cell constants, O(h^2) for
/// smooth integrands.
double integrate(const Grid& grid, const ScalarField& f);

/// Forward differences (f[j+1]-f[j])/h on the M-1 interior edges. The
/// boundary edge derivatives are zero under the Neumann condition.
std::vector<double> edge_derivative(const Grid& grid, const ScalarField& f);

/// h * sum of squared edge slopes. Equals the quadratic form of the
/// Neumann laplacian exactly (summation by parts).
double dirichlet_energy(const Grid& grid, const ScalarField& f);

/// Node-centered derivative: average of the two adjacent edge slopes,
/// boundary edges counted as zero-slope.
ScalarField node_derivative(const Grid& grid, const ScalarField& f);

double sup_norm(const ScalarField& f);
double sup_distance(const ScalarField& f, const ScalarField& g);

/// Rescale f so that integrate(f^2) equals target_mass.
void normalize_mass(const Grid& grid, ScalarField& f, double target_mass = 1.0);

/// Symmetric tridiagonal representation of w -> -w'' with mirrored ghost
/// cells: diag 1/h^2 at the boundary rows, 2/h^2 inside, off-diagonal -1/h^2.
/// Row sums vanish, so constants are in the kernel; the operator is positive
/// semidefinite.
class NeumannLaplacian {
  public:
    explicit NeumannLaplacian(const Grid& grid);

    const Grid& grid() const { return grid_; }
    double diag(int j) const { return diag_[j]; }
    double offdiag() const { return off_; }

    ScalarField apply(const ScalarField& f) const;

  private:
    Grid grid_;
    std::vector<double> diag_;
    double off_;
};

/// Closed-form eigenvalue (2/h^2)(1 - cos(k pi h)) of the discrete operator,
/// k = 0..M-1. Converges to (k pi)^2 at rate O(h^2).
double discrete_neumann_eigenvalue(const Grid& grid, int k);

/// Discrete eigenfunction sqrt(2) cos(k pi x) sampled at the nodes (the unit
/// field for k = 0); discretely L2-normalized, integrate(psi^2) = 1 exactly.
ScalarField discrete_neumann_eigenfunction(const Grid& grid, int k);

}  // namespace mfgseg
