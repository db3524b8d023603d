#include "mfgseg/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace mfgseg {

SchrodingerOperator::SchrodingerOperator(const NeumannLaplacian& laplacian, double nu, ScalarField potential)
    : laplacian_(laplacian), nu_(nu), potential_(std::move(potential)) {
    if (!(nu > 0.0)) throw std::invalid_argument("SchrodingerOperator: nu must be positive");
    if (static_cast<int>(potential_.size()) != laplacian_.grid().size())
        throw std::invalid_argument("SchrodingerOperator: potential length does not match grid");
}

ScalarField SchrodingerOperator::apply(const ScalarField& f) const {
    ScalarField out = laplacian_.apply(f);
    for (size_t j = 0; j < out.size(); ++j) out[j] = nu_ * out[j] + potential_[j] * f[j];
    return out;
}

double SchrodingerOperator::scale() const {
    const double h = grid().spacing();
    return nu_ / (h * h) + sup_norm(potential_);
}

int sturm_count(const SchrodingerOperator& op, double x) {
    const int n = op.size();
    const double b2 = op.offdiag() * op.offdiag();
    int count = 0;
    double q = op.diag(0) - x;
    if (q < 0.0) ++count;
    for (int j = 1; j < n; ++j) {
        // IEEE semantics carry a vanished pivot through: b2/0 = inf makes the
        // next pivot -inf, which is counted and then recovers.
        q = (op.diag(j) - x) - b2 / q;
        if (q < 0.0) ++count;
    }
    return count;
}

namespace {

// PLU factorization of (A - sigma I) with partial pivoting between adjacent
// rows; U acquires a second superdiagonal where rows are swapped.
struct TriFactor {
    std::vector<double> u0, u1, u2, mult;
    std::vector<char> swapped;
};

TriFactor factor_shifted(const SchrodingerOperator& op, double sigma) {
    const int n = op.size();
    const double e = op.offdiag();
    TriFactor f;
    f.u0.resize(static_cast<size_t>(n));
    f.u1.assign(static_cast<size_t>(n), 0.0);
    f.u2.assign(static_cast<size_t>(n), 0.0);
    f.mult.assign(static_cast<size_t>(n), 0.0);
    f.swapped.assign(static_cast<size_t>(n), 0);

    const double tiny = 4.0 * std::numeric_limits<double>::epsilon() * op.scale() * 1e-3 +
                        std::numeric_limits<double>::min();
    double b = op.diag(0) - sigma;  // running pivot candidate
    double c = e;                   // running superdiagonal of the pivot row
    for (int i = 0; i + 1 < n; ++i) {
        const double e_next = (i + 2 < n) ? e : 0.0;
        if (std::fabs(b) >= std::fabs(e)) {
            double piv = b;
            if (std::fabs(piv) < tiny) piv = (piv < 0.0 ? -tiny : tiny);
            const double m = e / piv;
            f.u0[static_cast<size_t>(i)] = piv;
            f.u1[static_cast<size_t>(i)] = c;
            f.mult[static_cast<size_t>(i)] = m;
            b = (op.diag(i + 1) - sigma) - m * c;
            c = e_next;
        } else {
            f.swapped[static_cast<size_t>(i)] = 1;
            const double d_next = op.diag(i + 1) - sigma;
            const double m = b / e;
            f.u0[static_cast<size_t>(i)] = e;
            f.u1[static_cast<size_t>(i)] = d_next;
            f.u2[static_cast<size_t>(i)] = e_next;
            f.mult[static_cast<size_t>(i)] = m;
            b = c - m * d_next;
            c = -m * e_next;
        }
    }
    if (std::fabs(b) < tiny) b = (b < 0.0 ? -tiny : tiny);
    f.u0[static_cast<size_t>(n - 1)] = b;
    return f;
}

void solve_factored(const TriFactor& f, std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    for (int i = 0; i + 1 < n; ++i) {
        if (f.swapped[static_cast<size_t>(i)]) std::swap(x[static_cast<size_t>(i)], x[static_cast<size_t>(i + 1)]);
        x[static_cast<size_t>(i + 1)] -= f.mult[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
    }
    for (int i = n - 1; i >= 0; --i) {
        double acc = x[static_cast<size_t>(i)];
        if (i + 1 < n) acc -= f.u1[static_cast<size_t>(i)] * x[static_cast<size_t>(i + 1)];
        if (i + 2 < n) acc -= f.u2[static_cast<size_t>(i)] * x[static_cast<size_t>(i + 2)];
        x[static_cast<size_t>(i)] = acc / f.u0[static_cast<size_t>(i)];
    }
}

// No-pivot LU of (A - sigma I) for sigma strictly below the spectrum: the
// matrix is then a positive definite M-matrix (positive pivots, negative
// off-diagonals), so solving with a positive right-hand side involves only
// additions of positive quantities and preserves entrywise positivity in
// floating point. Used for the ground state.
struct MFactor {
    std::vector<double> pivots;
    std::vector<double> mult;  // negative subdiagonal multipliers
    double offdiag = 0.0;
    bool ok = false;
};

MFactor factor_m_matrix(const SchrodingerOperator& op, double sigma) {
    const int n = op.size();
    const double e = op.offdiag();
    MFactor f;
    f.offdiag = e;
    f.pivots.resize(static_cast<size_t>(n));
    f.mult.assign(static_cast<size_t>(n), 0.0);
    double d = op.diag(0) - sigma;
    for (int i = 0;; ++i) {
        if (!(d > 0.0)) return f;
        f.pivots[static_cast<size_t>(i)] = d;
        if (i + 1 == n) break;
        const double m = e / d;
        f.mult[static_cast<size_t>(i + 1)] = m;
        d = (op.diag(i + 1) - sigma) - m * e;
    }
    f.ok = true;
    return f;
}

void solve_m_factored(const MFactor& f, std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    for (int i = 1; i < n; ++i) x[static_cast<size_t>(i)] -= f.mult[static_cast<size_t>(i)] * x[static_cast<size_t>(i - 1)];
    x[static_cast<size_t>(n - 1)] /= f.pivots[static_cast<size_t>(n - 1)];
    for (int i = n - 2; i >= 0; --i)
        x[static_cast<size_t>(i)] =
            (x[static_cast<size_t>(i)] - f.offdiag * x[static_cast<size_t>(i + 1)]) / f.pivots[static_cast<size_t>(i)];
}

// Deterministic start vector; plain LCG so reruns are bit-identical.
std::vector<double> seeded_start(int n, int k) {
    std::vector<double> v(static_cast<size_t>(n));
    uint64_t state = 0x9e3779b97f4a7c15ULL ^ (static_cast<uint64_t>(n) << 20) ^ static_cast<uint64_t>(k + 1);
    for (auto& x : v) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        x = (static_cast<double>(state >> 11) / 9007199254740992.0) * 2.0 - 1.0;
    }
    return v;
}

double rayleigh_quotient(const SchrodingerOperator& op, const ScalarField& v) {
    const ScalarField av = op.apply(v);
    long double num = 0.0L, den = 0.0L;
    for (size_t j = 0; j < v.size(); ++j) {
        num += static_cast<long double>(v[j]) * av[j];
        den += static_cast<long double>(v[j]) * v[j];
    }
    return static_cast<double>(num / den);
}

double residual_inf(const SchrodingerOperator& op, const ScalarField& v, double lambda) {
    const ScalarField av = op.apply(v);
    double r = 0.0, vmax = 0.0;
    for (size_t j = 0; j < v.size(); ++j) {
        r = std::max(r, std::fabs(av[j] - lambda * v[j]));
        vmax = std::max(vmax, std::fabs(v[j]));
    }
    return r / vmax;
}

// Sturm counts just below/above lambda must bracket index k; the window is
// widened a few times to absorb roundoff in the count itself.
bool certify_index(const SchrodingerOperator& op, double lambda, int k) {
    double delta = std::max(1e-13 * std::fabs(lambda),
                            8.0 * std::numeric_limits<double>::epsilon() * op.scale());
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (sturm_count(op, lambda - delta) <= k && sturm_count(op, lambda + delta) >= k + 1) return true;
        delta *= 8.0;
    }
    return false;
}

struct Bracket {
    double lo = 0.0, hi = 0.0;  // count(lo) <= k < count(hi)
};

// Gershgorin enclosure refined by bisection on the Sturm count.
Bracket bisect_eigenvalue(const SchrodingerOperator& op, int k, double rel_tol) {
    const int n = op.size();
    double lo = op.diag(0), hi = op.diag(0);
    for (int j = 0; j < n; ++j) {
        lo = std::min(lo, op.diag(j));
        hi = std::max(hi, op.diag(j));
    }
    const double radius = 2.0 * std::fabs(op.offdiag());
    lo -= radius;
    hi += radius;
    while (sturm_count(op, lo) > 0) lo -= radius + 1.0;
    while (sturm_count(op, hi) < n) hi += radius + 1.0;

    const double eps = std::numeric_limits<double>::epsilon();
    while (true) {
        const double width = hi - lo;
        const double tol = rel_tol * std::max({std::fabs(lo), std::fabs(hi), 1e-30}) + 4.0 * eps * op.scale() * 1e-3;
        if (width <= tol) break;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(op, mid) >= k + 1)
            hi = mid;
        else
            lo = mid;
    }
    return {lo, hi};
}

}  // namespace

EigenPair kth_eigenpair(const SchrodingerOperator& op, int k) {
    const int n = op.size();
    if (k < 0 || k >= n) throw std::invalid_argument("kth_eigenpair: index out of range");

    const Bracket bracket = bisect_eigenvalue(op, k, 1e-13);
    const double lambda = 0.5 * (bracket.lo + bracket.hi);

    // Inverse iteration with occasional Rayleigh-shift refresh.
    const double res_target = 1e-11 * op.scale();
    TriFactor factors = factor_shifted(op, lambda);
    ScalarField v = seeded_start(n, k);
    int sweeps = 0;
    double rho = lambda;
    for (;;) {
        if (++sweeps > 200) throw std::runtime_error("kth_eigenpair: inverse iteration did not converge");
        solve_factored(factors, v);
        const double vmax = sup_norm(v);
        if (!(vmax > 0.0) || !std::isfinite(vmax)) {
            v = seeded_start(n, k + 7 * sweeps);
            continue;
        }
        for (auto& x : v) x /= vmax;
        rho = rayleigh_quotient(op, v);
        if (residual_inf(op, v, rho) <= res_target && certify_index(op, rho, k)) break;
        if (sweeps % 3 == 0) factors = factor_shifted(op, rho);
    }

    normalize_mass(op.grid(), v, 1.0);
    if (v[0] < 0.0)
        for (auto& x : v) x = -x;

    return EigenPair{rho, std::move(v), sweeps};
}

EigenPair principal_eigenpair(const SchrodingerOperator& op) {
    const int n = op.size();
    const Bracket ground = bisect_eigenvalue(op, 0, 1e-13);
    const Bracket excited = bisect_eigenvalue(op, 1, 1e-2);
    const double eps_floor = 64.0 * std::numeric_limits<double>::epsilon() * op.scale();
    const double gap = std::max(excited.lo - ground.hi, eps_floor);

    // Shift strictly below the ground energy: inverse iteration through the
    // M-matrix factorization then keeps every entry positive even when the
    // tails sit many orders of magnitude below the bulk.
    const double res_target = 1e-11 * op.scale();
    double margin = std::max(1e-3 * gap, eps_floor);
    for (int attempt = 0; attempt < 8; ++attempt, margin *= 10.0) {
        const double sigma = ground.lo - margin;
        const MFactor factors = factor_m_matrix(op, sigma);
        if (!factors.ok) continue;
        ScalarField v(static_cast<size_t>(n), 1.0);
        int sweeps = 0;
        while (sweeps < 200) {
            ++sweeps;
            solve_m_factored(factors, v);
            const double vmax = sup_norm(v);
            if (!(vmax > 0.0) || !std::isfinite(vmax)) break;
            for (auto& x : v) x /= vmax;
            const double rho = rayleigh_quotient(op, v);
            if (residual_inf(op, v, rho) <= res_target && certify_index(op, rho, 0)) {
                normalize_mass(op.grid(), v, 1.0);
                for (double x : v)
                    if (!(x > 0.0)) throw std::runtime_error("principal_eigenpair: ground state not strictly positive");
                return EigenPair{rho, std::move(v), sweeps};
            }
        }
    }
    throw std::runtime_error("principal_eigenpair: inverse iteration did not converge");
}

}  // namespace mfgseg
