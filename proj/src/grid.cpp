#include "mfgseg/grid.hpp"

#include <cmath>
#include <string>

namespace mfgseg {

namespace {

void require_size(const Grid& grid, const ScalarField& f, const char* what) {
    if (static_cast<int>(f.size()) != grid.size())
        throw std::invalid_argument(std::string(what) + ": field length does not match grid");
}

}  // namespace

Grid::Grid(int cell_count) : m_(cell_count) {
    if (cell_count < 8) throw std::invalid_argument("Grid: need at least 8 cells");
    h_ = 1.0 / m_;
    nodes_.resize(static_cast<size_t>(m_));
    for (int j = 0; j < m_; ++j) nodes_[static_cast<size_t>(j)] = (j + 0.5) * h_;
}

double integrate(const Grid& grid, const ScalarField& f) {
    require_size(grid, f, "integrate");
    long double acc = 0.0L;
    for (double v : f) acc += v;
    return static_cast<double>(acc * grid.spacing());
}

std::vector<double> edge_derivative(const Grid& grid, const ScalarField& f) {
    require_size(grid, f, "edge_derivative");
    const int m = grid.size();
    std::vector<double> df(static_cast<size_t>(m - 1));
    const double inv_h = 1.0 / grid.spacing();
    for (int e = 0; e + 1 < m; ++e) df[static_cast<size_t>(e)] = (f[static_cast<size_t>(e + 1)] - f[static_cast<size_t>(e)]) * inv_h;
    return df;
}

double dirichlet_energy(const Grid& grid, const ScalarField& f) {
    require_size(grid, f, "dirichlet_energy");
    const int m = grid.size();
    const double inv_h = 1.0 / grid.spacing();
    long double acc = 0.0L;
    for (int e = 0; e + 1 < m; ++e) {
        const double s = (f[static_cast<size_t>(e + 1)] - f[static_cast<size_t>(e)]) * inv_h;
        acc += static_cast<long double>(s) * s;
    }
    return static_cast<double>(acc * grid.spacing());
}

ScalarField node_derivative(const Grid& grid, const ScalarField& f) {
    require_size(grid, f, "node_derivative");
    const int m = grid.size();
    const auto df = edge_derivative(grid, f);
    ScalarField out(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double left = (j > 0) ? df[static_cast<size_t>(j - 1)] : 0.0;
        const double right = (j + 1 < m) ? df[static_cast<size_t>(j)] : 0.0;
        out[static_cast<size_t>(j)] = 0.5 * (left + right);
    }
    return out;
}

double sup_norm(const ScalarField& f) {
    double r = 0.0;
    for (double v : f) r = std::max(r, std::fabs(v));
    return r;
}

double sup_distance(const ScalarField& f, const ScalarField& g) {
    if (f.size() != g.size()) throw std::invalid_argument("sup_distance: length mismatch");
    double r = 0.0;
    for (size_t i = 0; i < f.size(); ++i) r = std::max(r, std::fabs(f[i] - g[i]));
    return r;
}

void normalize_mass(const Grid& grid, ScalarField& f, double target_mass) {
    long double acc = 0.0L;
    for (double v : f) acc += static_cast<long double>(v) * v;
    const double mass = static_cast<double>(acc) * grid.spacing();
    if (mass <= 0.0) throw std::invalid_argument("normalize_mass: zero field");
    const double scale = std::sqrt(target_mass / mass);
    for (double& v : f) v *= scale;
}

NeumannLaplacian::NeumannLaplacian(const Grid& grid) : grid_(grid) {
    const int m = grid_.size();
    const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
    diag_.assign(static_cast<size_t>(m), 2.0 * inv_h2);
    diag_.front() = inv_h2;
    diag_.back() = inv_h2;
    off_ = -inv_h2;
}

ScalarField NeumannLaplacian::apply(const ScalarField& f) const {
    require_size(grid_, f, "NeumannLaplacian::apply");
    const int m = grid_.size();
    ScalarField out(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        double acc = diag_[static_cast<size_t>(j)] * f[static_cast<size_t>(j)];
        if (j > 0) acc += off_ * f[static_cast<size_t>(j - 1)];
        if (j + 1 < m) acc += off_ * f[static_cast<size_t>(j + 1)];
        out[static_cast<size_t>(j)] = acc;
    }
    return out;
}

double discrete_neumann_eigenvalue(const Grid& grid, int k) {
    if (k < 0 || k >= grid.size()) throw std::invalid_argument("discrete_neumann_eigenvalue: k out of range");
    const double h = grid.spacing();
    return 2.0 / (h * h) * (1.0 - std::cos(k * M_PI * h));
}

ScalarField discrete_neumann_eigenfunction(const Grid& grid, int k) {
    if (k < 0 || k >= grid.size()) throw std::invalid_argument("discrete_neumann_eigenfunction: k out of range");
    ScalarField psi = grid.field(1.0);
    if (k == 0) return psi;
    const double amp = std::sqrt(2.0);
    for (int j = 0; j < grid.size(); ++j) psi[static_cast<size_t>(j)] = amp * std::cos(k * M_PI * grid.node(j));
    return psi;
}

}  // namespace mfgseg
