#include "mfgseg/banded.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfgseg {

BandedMatrix::BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), ku_ext_(kl + ku), ld_(2 * kl + ku + 1) {
    if (n <= 0 || kl < 0 || ku < 0) throw std::invalid_argument("BandedMatrix: bad shape");
    ab_.assign(static_cast<size_t>(ld_) * n_, 0.0);
    pivot_.assign(static_cast<size_t>(n_), 0);
}

void BandedMatrix::clear() {
    std::fill(ab_.begin(), ab_.end(), 0.0);
    factored_ = false;
    det_sign_ = 0;
}

bool BandedMatrix::in_band(int i, int j) const {
    return i >= 0 && j >= 0 && i < n_ && j < n_ && i - j <= kl_ && j - i <= ku_ext_;
}

double& BandedMatrix::ref(int i, int j) {
    return ab_[static_cast<size_t>(j) * ld_ + static_cast<size_t>(kl_ + ku_ + i - j)];
}

double BandedMatrix::ref(int i, int j) const {
    return ab_[static_cast<size_t>(j) * ld_ + static_cast<size_t>(kl_ + ku_ + i - j)];
}

double BandedMatrix::get(int i, int j) const { return in_band(i, j) ? ref(i, j) : 0.0; }

void BandedMatrix::set(int i, int j, double value) {
    if (!in_band(i, j)) throw std::out_of_range("BandedMatrix::set: outside band");
    if (factored_) throw std::logic_error("BandedMatrix::set: already factored");
    ref(i, j) = value;
}

void BandedMatrix::add(int i, int j, double value) {
    if (!in_band(i, j)) throw std::out_of_range("BandedMatrix::add: outside band");
    if (factored_) throw std::logic_error("BandedMatrix::add: already factored");
    ref(i, j) += value;
}

bool BandedMatrix::factor(double pivot_scale) {
    const double tiny =
        16.0 * std::numeric_limits<double>::epsilon() * std::fabs(pivot_scale) + std::numeric_limits<double>::min();
    bool clean = true;
    det_sign_ = 1;
    for (int j = 0; j < n_; ++j) {
        const int last_row = std::min(n_ - 1, j + kl_);
        int p = j;
        double pmax = std::fabs(ref(j, j));
        for (int i = j + 1; i <= last_row; ++i) {
            const double a = std::fabs(ref(i, j));
            if (a > pmax) {
                pmax = a;
                p = i;
            }
        }
        pivot_[static_cast<size_t>(j)] = p;
        const int last_col = std::min(n_ - 1, j + ku_ext_);
        if (p != j) {
            det_sign_ = -det_sign_;
            for (int c = j; c <= last_col; ++c) std::swap(ref(j, c), ref(p, c));
        }
        double piv = ref(j, j);
        if (std::fabs(piv) < tiny) {
            piv = (piv < 0.0 ? -tiny : tiny);
            ref(j, j) = piv;
            clean = false;
            det_sign_ = 0;
        }
        if (det_sign_ != 0 && piv < 0.0) det_sign_ = -det_sign_;
        for (int i = j + 1; i <= last_row; ++i) {
            const double m = ref(i, j) / piv;
            ref(i, j) = m;
            if (m != 0.0)
                for (int c = j + 1; c <= last_col; ++c) ref(i, c) -= m * ref(j, c);
        }
    }
    factored_ = true;
    return clean;
}

void BandedMatrix::solve(std::vector<double>& rhs) const {
    if (!factored_) throw std::logic_error("BandedMatrix::solve: factor first");
    if (static_cast<int>(rhs.size()) != n_) throw std::invalid_argument("BandedMatrix::solve: bad rhs length");
    for (int j = 0; j + 1 < n_; ++j) {
        const int p = pivot_[static_cast<size_t>(j)];
        if (p != j) std::swap(rhs[static_cast<size_t>(j)], rhs[static_cast<size_t>(p)]);
        const int last_row = std::min(n_ - 1, j + kl_);
        for (int i = j + 1; i <= last_row; ++i) rhs[static_cast<size_t>(i)] -= ref(i, j) * rhs[static_cast<size_t>(j)];
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double acc = rhs[static_cast<size_t>(i)];
        const int last_col = std::min(n_ - 1, i + ku_ext_);
        for (int c = i + 1; c <= last_col; ++c) acc -= ref(i, c) * rhs[static_cast<size_t>(c)];
        rhs[static_cast<size_t>(i)] = acc / ref(i, i);
    }
}

}  // namespace mfgseg
