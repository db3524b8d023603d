#include "mfgseg/continuation.hpp"

#include <array>
#include <cmath>

#include "mfgseg/asymptotics.hpp"
#include "mfgseg/banded.hpp"

namespace mfgseg {

namespace {

double weighted_dot(const ExtendedVector& a, const ExtendedVector& b, double h, double beta_weight) {
    long double acc = 0.0L;
    for (size_t j = 0; j < a.v1.size(); ++j)
        acc += static_cast<long double>(a.v1[j]) * b.v1[j] + static_cast<long double>(a.v2[j]) * b.v2[j];
    acc *= h;
    acc += static_cast<long double>(a.lambda1) * b.lambda1 + static_cast<long double>(a.lambda2) * b.lambda2;
    acc += static_cast<long double>(beta_weight) * a.beta * b.beta;
    return static_cast<double>(acc);
}

ExtendedVector difference(const ExtendedVector& a, const ExtendedVector& b) {
    ExtendedVector d = a;
    for (size_t j = 0; j < d.v1.size(); ++j) {
        d.v1[j] -= b.v1[j];
        d.v2[j] -= b.v2[j];
    }
    d.lambda1 -= b.lambda1;
    d.lambda2 -= b.lambda2;
    d.beta -= b.beta;
    return d;
}

struct ResidualEval {
    std::vector<double> core;
    double c1 = 0.0, c2 = 0.0, arc = 0.0;
    double pde_scale = 1.0;
    double scaled = 0.0;
};

ResidualEval eval_residual(const Grid& grid, const InteractionPair& pair, const NeumannLaplacian& lap,
                           const ExtendedVector& x, const std::optional<ContinuationAnchor>& anchor,
                           double frozen_beta) {
    const int m = grid.size();
    ResidualEval out;
    out.core.resize(static_cast<size_t>(2 * m));

    const ScalarField l1 = lap.apply(x.v1);
    const ScalarField l2 = lap.apply(x.v2);
    double gmax = 0.0, vmax = 1.0, core_inf = 0.0;
    for (int j = 0; j < m; ++j) {
        const size_t u = static_cast<size_t>(j);
        const double g1 = pair.g1.eval(0, x.v2[u] * x.v2[u]);
        const double g2 = pair.g2.eval(0, x.v1[u] * x.v1[u]);
        out.core[2 * u] = l1[u] + x.beta * (g1 - x.lambda1) * x.v1[u];
        out.core[2 * u + 1] = l2[u] + x.beta * (g2 - x.lambda2) * x.v2[u];
        gmax = std::max({gmax, std::fabs(g1), std::fabs(g2)});
        vmax = std::max({vmax, std::fabs(x.v1[u]), std::fabs(x.v2[u])});
        core_inf = std::max({core_inf, std::fabs(out.core[2 * u]), std::fabs(out.core[2 * u + 1])});
    }
    out.c1 = integrate(grid, [&] {
                 ScalarField sq(x.v1.size());
                 for (size_t j = 0; j < sq.size(); ++j) sq[j] = x.v1[j] * x.v1[j];
                 return sq;
             }()) -
             1.0;
    out.c2 = integrate(grid, [&] {
                 ScalarField sq(x.v2.size());
                 for (size_t j = 0; j < sq.size(); ++j) sq[j] = x.v2[j] * x.v2[j];
                 return sq;
             }()) -
             1.0;
    if (anchor) {
        out.arc = weighted_dot(difference(x, anchor->base), anchor->tangent, grid.spacing(), anchor->beta_weight) -
                  anchor->ds;
    } else {
        out.arc = (x.beta - frozen_beta) / std::max(1.0, std::fabs(frozen_beta));
    }

    const double h = grid.spacing();
    const double lmax = std::max(std::fabs(x.lambda1), std::fabs(x.lambda2));
    out.pde_scale = (4.0 / (h * h)) * vmax + std::fabs(x.beta) * (gmax + lmax) * vmax;
    out.scaled = core_inf / out.pde_scale + std::fabs(out.c1) + std::fabs(out.c2) + std::fabs(out.arc);
    return out;
}

// Bordered Jacobian: interleaved pentadiagonal core (v1_j -> 2j, v2_j -> 2j+1)
// plus three border columns (lambda1, lambda2, beta) and three border rows
// (two mass constraints and the arclength/frozen-beta row).
struct BorderedSolve {
    bool ok = false;
    std::vector<double> delta_core;
    std::array<double, 3> delta_border = {0.0, 0.0, 0.0};
    int det_sign = 0;
};

BorderedSolve solve_bordered(const Grid& grid, const InteractionPair& pair, const NeumannLaplacian& lap,
                             const ExtendedVector& x, const std::optional<ContinuationAnchor>& anchor,
                             const ExtendedVector* tangent_row, double tangent_beta_weight,
                             std::vector<double> rhs_core, std::array<double, 3> rhs_border, double pde_scale) {
    const int m = grid.size();
    const int n2 = 2 * m;
    const double h = grid.spacing();

    BandedMatrix core(n2, 2, 2);
    std::array<std::vector<double>, 3> bcols;
    for (auto& col : bcols) col.assign(static_cast<size_t>(n2), 0.0);
    std::array<std::vector<double>, 3> brows;
    for (auto& row : brows) row.assign(static_cast<size_t>(n2), 0.0);
    std::array<std::array<double, 3>, 3> d{};

    for (int j = 0; j < m; ++j) {
        const size_t u = static_cast<size_t>(j);
        const double v1 = x.v1[u], v2 = x.v2[u];
        const double g1 = pair.g1.eval(0, v2 * v2);
        const double g2 = pair.g2.eval(0, v1 * v1);
        const double g1p = pair.g1.eval(1, v2 * v2);
        const double g2p = pair.g2.eval(1, v1 * v1);

        const int r1 = 2 * j, r2 = 2 * j + 1;
        core.add(r1, r1, lap.diag(j) + x.beta * (g1 - x.lambda1));
        core.add(r2, r2, lap.diag(j) + x.beta * (g2 - x.lambda2));
        if (j > 0) {
            core.add(r1, r1 - 2, lap.offdiag());
            core.add(r2, r2 - 2, lap.offdiag());
        }
        if (j + 1 < m) {
            core.add(r1, r1 + 2, lap.offdiag());
            core.add(r2, r2 + 2, lap.offdiag());
        }
        core.add(r1, r2, x.beta * g1p * 2.0 * v2 * v1);
        core.add(r2, r1, x.beta * g2p * 2.0 * v1 * v2);

        bcols[0][static_cast<size_t>(r1)] = -x.beta * v1;
        bcols[1][static_cast<size_t>(r2)] = -x.beta * v2;
        bcols[2][static_cast<size_t>(r1)] = (g1 - x.lambda1) * v1;
        bcols[2][static_cast<size_t>(r2)] = (g2 - x.lambda2) * v2;

        brows[0][static_cast<size_t>(r1)] = 2.0 * h * v1;
        brows[1][static_cast<size_t>(r2)] = 2.0 * h * v2;
    }

    if (tangent_row) {
        for (int j = 0; j < m; ++j) {
            brows[2][static_cast<size_t>(2 * j)] = h * tangent_row->v1[static_cast<size_t>(j)];
            brows[2][static_cast<size_t>(2 * j + 1)] = h * tangent_row->v2[static_cast<size_t>(j)];
        }
        d[2] = {tangent_row->lambda1, tangent_row->lambda2, tangent_beta_weight * tangent_row->beta};
    } else if (anchor) {
        for (int j = 0; j < m; ++j) {
            brows[2][static_cast<size_t>(2 * j)] = h * anchor->tangent.v1[static_cast<size_t>(j)];
            brows[2][static_cast<size_t>(2 * j + 1)] = h * anchor->tangent.v2[static_cast<size_t>(j)];
        }
        d[2] = {anchor->tangent.lambda1, anchor->tangent.lambda2, anchor->beta_weight * anchor->tangent.beta};
    } else {
        d[2] = {0.0, 0.0, 1.0 / std::max(1.0, std::fabs(x.beta))};
    }

    BorderedSolve result;
    core.factor(pde_scale);
    if (core.det_sign() == 0) {
        // Perturbed pivot: the solve is still usable as a Newton direction.
    }

    std::array<std::vector<double>, 3> xb = bcols;
    for (auto& col : xb) core.solve(col);
    core.solve(rhs_core);

    std::array<std::array<double, 3>, 3> schur{};
    std::array<double, 3> srhs{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            long double acc = d[static_cast<size_t>(r)][static_cast<size_t>(c)];
            for (int i = 0; i < n2; ++i)
                acc -= static_cast<long double>(brows[static_cast<size_t>(r)][static_cast<size_t>(i)]) *
                       xb[static_cast<size_t>(c)][static_cast<size_t>(i)];
            schur[static_cast<size_t>(r)][static_cast<size_t>(c)] = static_cast<double>(acc);
        }
        long double acc = rhs_border[static_cast<size_t>(r)];
        for (int i = 0; i < n2; ++i)
            acc -= static_cast<long double>(brows[static_cast<size_t>(r)][static_cast<size_t>(i)]) *
                   rhs_core[static_cast<size_t>(i)];
        srhs[static_cast<size_t>(r)] = static_cast<double>(acc);
    }

    // 3x3 Gaussian elimination with partial pivoting.
    int schur_sign = 1;
    std::array<int, 3> perm = {0, 1, 2};
    for (int c = 0; c < 3; ++c) {
        int p = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::fabs(schur[static_cast<size_t>(perm[static_cast<size_t>(r)])][static_cast<size_t>(c)]) >
                std::fabs(schur[static_cast<size_t>(perm[static_cast<size_t>(p)])][static_cast<size_t>(c)]))
                p = r;
        if (p != c) {
            std::swap(perm[static_cast<size_t>(p)], perm[static_cast<size_t>(c)]);
            schur_sign = -schur_sign;
        }
        const double piv = schur[static_cast<size_t>(perm[static_cast<size_t>(c)])][static_cast<size_t>(c)];
        if (piv == 0.0) return result;  // singular bordered system
        if (piv < 0.0) schur_sign = -schur_sign;
        for (int r = c + 1; r < 3; ++r) {
            const double mfac = schur[static_cast<size_t>(perm[static_cast<size_t>(r)])][static_cast<size_t>(c)] / piv;
            for (int cc = c; cc < 3; ++cc)
                schur[static_cast<size_t>(perm[static_cast<size_t>(r)])][static_cast<size_t>(cc)] -=
                    mfac * schur[static_cast<size_t>(perm[static_cast<size_t>(c)])][static_cast<size_t>(cc)];
            srhs[static_cast<size_t>(perm[static_cast<size_t>(r)])] -=
                mfac * srhs[static_cast<size_t>(perm[static_cast<size_t>(c)])];
        }
    }
    for (int c = 2; c >= 0; --c) {
        double acc = srhs[static_cast<size_t>(perm[static_cast<size_t>(c)])];
        for (int cc = c + 1; cc < 3; ++cc)
            acc -= schur[static_cast<size_t>(perm[static_cast<size_t>(c)])][static_cast<size_t>(cc)] *
                   result.delta_border[static_cast<size_t>(cc)];
        result.delta_border[static_cast<size_t>(c)] =
            acc / schur[static_cast<size_t>(perm[static_cast<size_t>(c)])][static_cast<size_t>(c)];
    }

    result.delta_core = std::move(rhs_core);
    for (int i = 0; i < n2; ++i)
        for (int c = 0; c < 3; ++c)
            result.delta_core[static_cast<size_t>(i)] -=
                xb[static_cast<size_t>(c)][static_cast<size_t>(i)] * result.delta_border[static_cast<size_t>(c)];

    result.det_sign = core.det_sign() * schur_sign;
    result.ok = true;
    for (double v : result.delta_core)
        if (!std::isfinite(v)) result.ok = false;
    for (double v : result.delta_border)
        if (!std::isfinite(v)) result.ok = false;
    return result;
}

ExtendedVector trivial_extended(const Grid& grid, const InteractionPair& pair, double beta) {
    ExtendedVector x;
    x.v1 = grid.field(1.0);
    x.v2 = grid.field(1.0);
    x.lambda1 = pair.g1.eval(0, 1.0);
    x.lambda2 = pair.g2.eval(0, 1.0);
    x.beta = beta;
    return x;
}

SolutionState to_state(const Grid& grid, const InteractionPair& pair, const ExtendedVector& x, int iterations) {
    SolutionState s;
    s.nu = 1.0 / x.beta;
    s.v1 = x.v1;
    s.v2 = x.v2;
    s.lambda1 = x.lambda1;
    s.lambda2 = x.lambda2;
    s.iterations = iterations;
    s.residual_sup = pde_residual_sup(grid, s, pair);
    return s;
}

struct CandidateCheck {
    bool ok = false;
    bool label_mismatch = false;
    std::string reason;
};

CandidateCheck validate_candidate(const Grid& grid, const InteractionPair& pair, const SolutionState& s, int k) {
    CandidateCheck check;
    for (size_t j = 0; j < s.v1.size(); ++j) {
        if (!(s.v1[j] > 0.0) || !(s.v2[j] > 0.0)) {
            check.reason = "lost positivity";
            return check;
        }
    }
    ScalarField sq(s.v1.size());
    for (size_t j = 0; j < sq.size(); ++j) sq[j] = s.v1[j] * s.v1[j];
    if (std::fabs(integrate(grid, sq) - 1.0) > 1e-9) {
        check.reason = "mass constraint violated";
        return check;
    }
    for (size_t j = 0; j < sq.size(); ++j) sq[j] = s.v2[j] * s.v2[j];
    if (std::fabs(integrate(grid, sq) - 1.0) > 1e-9) {
        check.reason = "mass constraint violated";
        return check;
    }
    const MorphologyReport morph = count_critical_points(grid, s, pair);
    const int n1 = static_cast<int>(morph.critical1.size());
    const int n2 = static_cast<int>(morph.critical2.size());
    if (n1 != k - 1 || n2 != k - 1 || static_cast<int>(morph.inflections1.size()) != k ||
        static_cast<int>(morph.inflections2.size()) != k) {
        check.label_mismatch = true;
        check.reason = "morphology label changed (criticals " + std::to_string(n1) + "/" + std::to_string(n2) +
                       ", expected " + std::to_string(k - 1) + ")";
        return check;
    }
    check.ok = true;
    return check;
}

}  // namespace

std::vector<BifurcationValue> bifurcation_points(const InteractionPair& pair, int k_max, const Grid& grid) {
    if (k_max < 1) throw std::invalid_argument("bifurcation_points: k_max must be at least 1");
    if (k_max >= grid.size()) throw std::invalid_argument("bifurcation_points: k_max exceeds grid resolution");
    const double a1 = pair.g1.eval(1, 1.0);
    const double a2 = pair.g2.eval(1, 1.0);
    const double denom = 2.0 * std::sqrt(a1 * a2);
    std::vector<BifurcationValue> out;
    out.reserve(static_cast<size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        const double beta = discrete_neumann_eigenvalue(grid, k) / denom;
        out.push_back({k, beta, 1.0 / beta});
    }
    return out;
}

ExtendedVector kernel_direction(const InteractionPair& pair, int k, const Grid& grid) {
    if (k < 1) throw std::invalid_argument("kernel_direction: k must be at least 1");
    const double a1 = std::sqrt(pair.g1.eval(1, 1.0));
    const double a2 = std::sqrt(pair.g2.eval(1, 1.0));
    const ScalarField psi = discrete_neumann_eigenfunction(grid, k);
    ExtendedVector dir;
    dir.v1.resize(psi.size());
    dir.v2.resize(psi.size());
    for (size_t j = 0; j < psi.size(); ++j) {
        dir.v1[j] = -a1 * psi[j];
        dir.v2[j] = a2 * psi[j];
    }
    return dir;
}

ExpansionCoefficients expansion_coefficients(const InteractionPair& pair, int k, const Grid& grid) {
    const double beta_k = bifurcation_points(pair, k, grid).back().beta;
    const ScalarField psi = discrete_neumann_eigenfunction(grid, k);
    ScalarField p2(psi.size()), p3(psi.size()), p4(psi.size());
    for (size_t j = 0; j < psi.size(); ++j) {
        p2[j] = psi[j] * psi[j];
        p3[j] = p2[j] * psi[j];
        p4[j] = p2[j] * p2[j];
    }
    const double i2 = integrate(grid, p2);
    const double i3 = integrate(grid, p3);
    const double i4 = integrate(grid, p4);

    const double g1p = pair.g1.eval(1, 1.0), g2p = pair.g2.eval(1, 1.0);
    const double g1pp = pair.g1.eval(2, 1.0), g2pp = pair.g2.eval(2, 1.0);
    const double g1ppp = pair.g1.eval(3, 1.0), g2ppp = pair.g2.eval(3, 1.0);

    ExpansionCoefficients coef;
    coef.a = -4.0 * g1p * g2p * i2;
    coef.b = beta_k *
             (2.0 * g2pp * std::sqrt(g1p * g1p * g1p) - 2.0 * g1pp * std::sqrt(g2p * g2p * g2p) +
              3.0 * g1p * g2p * (std::sqrt(g1p) - std::sqrt(g2p))) *
             i3;
    const double root = std::sqrt(g1p * g2p);
    const double bracket = 12.0 * g1p * g2p * root +
                           (-8.0 * g2p * g2p * g1ppp + 12.0 * g1pp * (g2p * root - g2p * g2p)) +
                           (-8.0 * g1p * g1p * g2ppp + 12.0 * g2pp * (g1p * root - g1p * g1p));
    coef.c = beta_k / (-6.0 * coef.a) * bracket * i4;
    return coef;
}

NewtonResult newton_correct(const Grid& grid, const InteractionPair& pair, ExtendedVector x,
                            const std::optional<ContinuationAnchor>& anchor) {
    if (!(x.beta > 0.0)) throw std::invalid_argument("newton_correct: beta must be positive");
    const NeumannLaplacian lap(grid);
    const double frozen_beta = x.beta;
    const int m = grid.size();

    NewtonResult result;
    double best = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter <= 25; ++iter) {
        const ResidualEval res = eval_residual(grid, pair, lap, x, anchor, frozen_beta);
        result.residual = res.scaled;
        result.iterations = iter;
        if (!std::isfinite(res.scaled) || res.scaled > 1e6 * std::max(1.0, best) || x.beta <= 0.0) {
            result.status = NewtonStatus::Diverged;
            result.x = std::move(x);
            return result;
        }
        best = std::min(best, res.scaled);
        if (res.scaled < 1e-10) {
            result.status = NewtonStatus::Converged;
            result.x = std::move(x);
            return result;
        }
        if (iter == 25) break;

        std::vector<double> rhs_core(res.core.size());
        for (size_t i = 0; i < res.core.size(); ++i) rhs_core[i] = -res.core[i];
        const std::array<double, 3> rhs_border = {-res.c1, -res.c2, -res.arc};

        const BorderedSolve solve = solve_bordered(grid, pair, lap, x, anchor, nullptr, 0.0, std::move(rhs_core),
                                                   rhs_border, res.pde_scale);
        if (!solve.ok) {
            result.status = NewtonStatus::Diverged;
            result.x = std::move(x);
            return result;
        }
        result.det_sign = solve.det_sign;
        for (int j = 0; j < m; ++j) {
            x.v1[static_cast<size_t>(j)] += solve.delta_core[static_cast<size_t>(2 * j)];
            x.v2[static_cast<size_t>(j)] += solve.delta_core[static_cast<size_t>(2 * j + 1)];
        }
        x.lambda1 += solve.delta_border[0];
        x.lambda2 += solve.delta_border[1];
        x.beta += solve.delta_border[2];
    }
    result.status = NewtonStatus::Diverged;
    result.x = std::move(x);
    return result;
}

ExtendedVector branch_tangent(const Grid& grid, const InteractionPair& pair, const ExtendedVector& x,
                              const ExtendedVector& t_prev, double beta_weight, int* det_sign_out) {
    const NeumannLaplacian lap(grid);
    const int m = grid.size();
    std::vector<double> rhs_core(static_cast<size_t>(2 * m), 0.0);
    std::array<double, 3> rhs_border = {0.0, 0.0, 1.0};
    const ResidualEval res = eval_residual(grid, pair, lap, x, std::nullopt, x.beta);
    const BorderedSolve solve = solve_bordered(grid, pair, lap, x, std::nullopt, &t_prev, beta_weight,
                                               std::move(rhs_core), rhs_border, res.pde_scale);
    if (!solve.ok) throw std::runtime_error("branch_tangent: bordered solve failed");
    if (det_sign_out) *det_sign_out = solve.det_sign;

    ExtendedVector t;
    t.v1.resize(static_cast<size_t>(m));
    t.v2.resize(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        t.v1[static_cast<size_t>(j)] = solve.delta_core[static_cast<size_t>(2 * j)];
        t.v2[static_cast<size_t>(j)] = solve.delta_core[static_cast<size_t>(2 * j + 1)];
    }
    t.lambda1 = solve.delta_border[0];
    t.lambda2 = solve.delta_border[1];
    t.beta = solve.delta_border[2];
    const double norm = std::sqrt(weighted_dot(t, t, grid.spacing(), beta_weight));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw std::runtime_error("branch_tangent: degenerate tangent");
    const double orient = weighted_dot(t, t_prev, grid.spacing(), beta_weight) >= 0.0 ? 1.0 : -1.0;
    for (auto& v : t.v1) v *= orient / norm;
    for (auto& v : t.v2) v *= orient / norm;
    t.lambda1 *= orient / norm;
    t.lambda2 *= orient / norm;
    t.beta *= orient / norm;
    return t;
}

std::vector<double> extended_residual(const Grid& grid, const InteractionPair& pair, const ExtendedVector& x,
                                      const std::optional<ContinuationAnchor>& anchor) {
    const NeumannLaplacian lap(grid);
    const ResidualEval res = eval_residual(grid, pair, lap, x, anchor, x.beta);
    std::vector<double> out = res.core;
    out.push_back(res.c1);
    out.push_back(res.c2);
    out.push_back(res.arc);
    return out;
}

std::vector<double> apply_extended_jacobian(const Grid& grid, const InteractionPair& pair, const ExtendedVector& x,
                                            const std::optional<ContinuationAnchor>& anchor,
                                            const ExtendedVector& dir) {
    const NeumannLaplacian lap(grid);
    const int m = grid.size();
    const double h = grid.spacing();
    std::vector<double> out(static_cast<size_t>(2 * m + 3), 0.0);

    const ScalarField lw1 = lap.apply(dir.v1);
    const ScalarField lw2 = lap.apply(dir.v2);
    long double c1 = 0.0L, c2 = 0.0L;
    for (int j = 0; j < m; ++j) {
        const size_t u = static_cast<size_t>(j);
        const double v1 = x.v1[u], v2 = x.v2[u];
        const double g1 = pair.g1.eval(0, v2 * v2);
        const double g2 = pair.g2.eval(0, v1 * v1);
        const double g1p = pair.g1.eval(1, v2 * v2);
        const double g2p = pair.g2.eval(1, v1 * v1);
        out[2 * u] = lw1[u] + x.beta * ((g1 - x.lambda1) * dir.v1[u] + 2.0 * g1p * v2 * v1 * dir.v2[u] -
                                        v1 * dir.lambda1) +
                     (g1 - x.lambda1) * v1 * dir.beta;
        out[2 * u + 1] = lw2[u] + x.beta * ((g2 - x.lambda2) * dir.v2[u] + 2.0 * g2p * v1 * v2 * dir.v1[u] -
                                            v2 * dir.lambda2) +
                         (g2 - x.lambda2) * v2 * dir.beta;
        c1 += 2.0L * v1 * dir.v1[u];
        c2 += 2.0L * v2 * dir.v2[u];
    }
    out[static_cast<size_t>(2 * m)] = static_cast<double>(c1) * h;
    out[static_cast<size_t>(2 * m + 1)] = static_cast<double>(c2) * h;
    out[static_cast<size_t>(2 * m + 2)] =
        anchor ? weighted_dot(dir, anchor->tangent, h, anchor->beta_weight)
               : dir.beta / std::max(1.0, std::fabs(x.beta));
    return out;
}

Branch trace_branch(const Grid& grid, const InteractionPair& pair, int k, double target_nu_min,
                    const StepPolicy& policy) {
    if (k < 1) throw std::invalid_argument("trace_branch: k must be at least 1");
    if (!(target_nu_min > 0.0)) throw std::invalid_argument("trace_branch: target_nu_min must be positive");

    Branch branch;
    branch.k = k;
    branch.grid_m = grid.size();

    const double beta_k = bifurcation_points(pair, k, grid).back().beta;
    branch.origin_beta = beta_k;
    const double beta_cap = policy.beta_cap > 0.0 ? policy.beta_cap : 1.25 / target_nu_min;
    const double h = grid.spacing();

    // Branch switch: second-order predictor on the local bifurcation parabola,
    // oriented so that v1 decreases (the convention the interface
    // diagnostics assume).
    const ExpansionCoefficients coef = expansion_coefficients(pair, k, grid);
    const ExtendedVector kernel = kernel_direction(pair, k, grid);
    const double eps0 = policy.eps0;
    ExtendedVector x0 = trivial_extended(grid, pair, beta_k);
    for (size_t j = 0; j < x0.v1.size(); ++j) {
        x0.v1[j] -= eps0 * kernel.v1[j];
        x0.v2[j] -= eps0 * kernel.v2[j];
    }
    const double beta_offset = (std::fabs(coef.c) > 1e-12) ? coef.c * eps0 * eps0 : 1e-3 * beta_k;
    x0.beta = beta_k + beta_offset;
    if (!(x0.beta > 0.0)) {
        branch.status = BranchStatus::SwitchFailed;
        branch.stop_reason = "switch predictor left the admissible beta range";
        return branch;
    }

    NewtonResult first = newton_correct(grid, pair, x0, std::nullopt);
    if (first.status != NewtonStatus::Converged ||
        sup_distance(first.x.v1, grid.field(1.0)) < 0.1 * eps0) {
        branch.status = BranchStatus::SwitchFailed;
        branch.stop_reason = "branch switch did not reach a nontrivial solution";
        return branch;
    }
    SolutionState first_state = to_state(grid, pair, first.x, first.iterations);
    const CandidateCheck first_check = validate_candidate(grid, pair, first_state, k);
    if (!first_check.ok) {
        branch.status = BranchStatus::SwitchFailed;
        branch.stop_reason = "first branch point rejected: " + first_check.reason;
        return branch;
    }

    ExtendedVector x_cur = first.x;
    double wb = 1.0 / std::max(1.0, x_cur.beta);
    ExtendedVector secant = difference(x_cur, trivial_extended(grid, pair, beta_k));
    const double secant_norm = std::sqrt(weighted_dot(secant, secant, h, wb));
    for (auto& v : secant.v1) v /= secant_norm;
    for (auto& v : secant.v2) v /= secant_norm;
    secant.lambda1 /= secant_norm;
    secant.lambda2 /= secant_norm;
    secant.beta /= secant_norm;
    int stability = 0;
    ExtendedVector t_cur = branch_tangent(grid, pair, x_cur, secant, wb, &stability);

    double arclength = 0.0;
    branch.points.push_back({std::move(first_state), t_cur, arclength, first.iterations, stability, false});

    double ds = policy.ds0;
    int halvings_for_label = 0;
    for (int step = 0; step < policy.max_steps; ++step) {
        const double nu_cur = 1.0 / x_cur.beta;
        if (nu_cur <= target_nu_min) {
            branch.status = BranchStatus::ReachedTargetNu;
            branch.stop_reason = "reached target nu";
            return branch;
        }
        if (x_cur.beta >= beta_cap) {
            branch.status = BranchStatus::ReachedBetaCap;
            branch.stop_reason = "reached beta cap";
            return branch;
        }
        if (std::sqrt(nu_cur) < 3.0 * h) {
            branch.status = BranchStatus::GridResolutionLimit;
            branch.stop_reason = "interface width sqrt(nu) fell below 3h; refine the grid to continue";
            return branch;
        }

        ExtendedVector x_pred = x_cur;
        for (size_t j = 0; j < x_pred.v1.size(); ++j) {
            x_pred.v1[j] += ds * t_cur.v1[j];
            x_pred.v2[j] += ds * t_cur.v2[j];
        }
        x_pred.lambda1 += ds * t_cur.lambda1;
        x_pred.lambda2 += ds * t_cur.lambda2;
        x_pred.beta += ds * t_cur.beta;

        ContinuationAnchor anchor{x_cur, t_cur, ds, wb};
        NewtonResult corrected = x_pred.beta > 0.0
                                     ? newton_correct(grid, pair, std::move(x_pred), anchor)
                                     : NewtonResult{};

        bool accept = corrected.status == NewtonStatus::Converged;
        CandidateCheck check;
        SolutionState state;
        if (accept) {
            state = to_state(grid, pair, corrected.x, corrected.iterations);
            check = validate_candidate(grid, pair, state, k);
            accept = check.ok;
        }
        if (!accept) {
            if (check.label_mismatch) ++halvings_for_label;
            ds *= 0.5;
            if (ds < policy.ds_min) {
                if (check.label_mismatch || halvings_for_label > 0) {
                    branch.status = BranchStatus::BranchIntegrityFailure;
                    branch.stop_reason = check.reason.empty() ? "morphology label changed" : check.reason;
                } else {
                    branch.status = BranchStatus::StepUnderflow;
                    branch.stop_reason = "arclength step underflow";
                }
                return branch;
            }
            continue;
        }
        halvings_for_label = 0;

        x_cur = corrected.x;
        wb = 1.0 / std::max(1.0, x_cur.beta);
        ExtendedVector t_next = branch_tangent(grid, pair, x_cur, t_cur, wb, &stability);
        const bool fold = t_next.beta * t_cur.beta < 0.0;
        arclength += ds;
        branch.points.push_back({std::move(state), t_next, arclength, corrected.iterations, stability, fold});
        t_cur = std::move(t_next);
        if (corrected.iterations <= 4) ds = std::min(ds * policy.grow, policy.ds_max);
    }

    branch.status = BranchStatus::StepUnderflow;
    branch.stop_reason = "step budget exhausted";
    return branch;
}

std::optional<SolutionState> solve_on_branch_at_beta(const Grid& grid, const InteractionPair& pair, int k,
                                                     double beta_target, const StepPolicy& policy) {
    if (!(beta_target > 0.0)) throw std::invalid_argument("solve_on_branch_at_beta: beta_target must be positive");
    Branch branch = trace_branch(grid, pair, k, 1.0 / beta_target, policy);
    if (branch.points.empty()) return std::nullopt;
    if (branch.status != BranchStatus::ReachedTargetNu && branch.status != BranchStatus::ReachedBetaCap)
        return std::nullopt;

    ExtendedVector x;
    const SolutionState& last = branch.points.back().state;
    x.v1 = last.v1;
    x.v2 = last.v2;
    x.lambda1 = last.lambda1;
    x.lambda2 = last.lambda2;
    x.beta = beta_target;
    NewtonResult polished = newton_correct(grid, pair, std::move(x), std::nullopt);
    if (polished.status != NewtonStatus::Converged) return std::nullopt;
    SolutionState state = to_state(grid, pair, polished.x, polished.iterations);
    if (!validate_candidate(grid, pair, state, k).ok) return std::nullopt;
    return state;
}

}  // namespace mfgseg
