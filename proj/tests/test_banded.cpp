#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "mfgseg/banded.hpp"
#include "test_rng.hpp"

using namespace mfgseg;

TEST_CASE("banded LU solves random pentadiagonal systems") {
    TestRng rng(314);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform() * 60);
        BandedMatrix banded(n, 2, 2);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
                const double value = rng.uniform(-1.0, 1.0) + (i == j ? 3.0 : 0.0);
                banded.set(i, j, value);
                dense(i, j) = value;
            }
        }
        std::vector<double> rhs(n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            rhs[i] = rng.uniform(-2.0, 2.0);
            b(i) = rhs[i];
        }
        CHECK(banded.factor(4.0));
        banded.solve(rhs);
        const Eigen::VectorXd x = dense.partialPivLu().solve(b);
        for (int i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(x(i)).epsilon(1e-9).scale(1.0 + x.norm()));
    }
}

TEST_CASE("det sign matches the dense determinant") {
    TestRng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng.uniform() * 20);
        BandedMatrix banded(n, 2, 2);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
                const double value = rng.uniform(-1.0, 1.0) + (i == j ? 1.5 : 0.0);
                banded.set(i, j, value);
                dense(i, j) = value;
            }
        }
        banded.factor(2.0);
        const double det = dense.determinant();
        if (std::fabs(det) > 1e-8) CHECK(banded.det_sign() == (det > 0.0 ? 1 : -1));
    }
}

TEST_CASE("heavy pivoting: dominant off-diagonals") {
    TestRng rng(555);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 12 + static_cast<int>(rng.uniform() * 30);
        BandedMatrix banded(n, 2, 2);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
                // Tiny diagonal, large band: every column needs a row swap.
                const double value = (i == j) ? 1e-3 * rng.uniform(-1.0, 1.0) : rng.uniform(-4.0, 4.0);
                banded.set(i, j, value);
                dense(i, j) = value;
            }
        }
        std::vector<double> rhs(n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            rhs[i] = rng.uniform(-1.0, 1.0);
            b(i) = rhs[i];
        }
        banded.factor(4.0);
        banded.solve(rhs);
        const Eigen::VectorXd x = dense.partialPivLu().solve(b);
        for (int i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(x(i)).epsilon(1e-8).scale(1.0 + x.norm()));
    }
}

TEST_CASE("pivoting handles zero leading diagonal") {
    BandedMatrix banded(4, 2, 2);
    // Row 0 has a zero pivot until rows are swapped.
    banded.set(0, 0, 0.0);
    banded.set(0, 1, 1.0);
    banded.set(1, 0, 2.0);
    banded.set(1, 1, 1.0);
    banded.set(2, 2, 1.0);
    banded.set(3, 3, 1.0);
    CHECK(banded.factor(1.0));
    std::vector<double> rhs = {1.0, 3.0, 2.0, 4.0};
    banded.solve(rhs);
    // Exact solution of [[0,1],[2,1]] x = (1,3) is x = (1,1).
    CHECK(rhs[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rhs[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("singular matrix reports sign zero") {
    BandedMatrix banded(3, 2, 2);
    banded.set(0, 0, 1.0);
    banded.set(1, 1, 1.0);
    // Row 2 left empty: structurally singular.
    CHECK_FALSE(banded.factor(1.0));
    CHECK(banded.det_sign() == 0);
}

TEST_CASE("out-of-band access is rejected") {
    BandedMatrix banded(10, 1, 1);
    CHECK_THROWS_AS(banded.set(0, 5, 1.0), std::out_of_range);
    CHECK_NOTHROW(banded.set(0, 1, 1.0));
    CHECK_NOTHROW(banded.set(0, 2, 1.0));  // within the pivoting fill band
}
