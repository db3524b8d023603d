#pragma once

#include <vector>

namespace mfgseg {

/// General banded matrix with LU factorization under partial pivoting
/// (LAPACK gbtrf-style storage: kl extra rows absorb pivoting fill, so U can
/// carry kl+ku superdiagonals).
class BandedMatrix {
  public:
    BandedMatrix(int n, int kl, int ku);

    int size() const { return n_; }
    void clear();

    double get(int i, int j) const;
    void set(int i, int j, double value);
    void add(int i, int j, double value);

    /// Factor in place. Vanishing pivots are perturbed to tiny * pivot_scale
    /// so downstream solves stay finite; returns false when that happened.
    bool factor(double pivot_scale = 1.0);
    void solve(std::vector<double>& rhs) const;

    /// Sign of det after factor(): +1/-1, or 0 when a pivot was perturbed.
    int det_sign() const { return det_sign_; }

  private:
    bool in_band(int i, int j) const;
    double& ref(int i, int j);
    double ref(int i, int j) const;

    int n_, kl_, ku_, ku_ext_, ld_;
    bool factored_ = false;
    int det_sign_ = 0;
    std::vector<double> ab_;
    std::vector<int> pivot_;
};

}  // namespace mfgseg
