#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mfgseg/interactions.hpp"
#include "test_rng.hpp"

using namespace mfgseg;

TEST_CASE("eval on the linear family") {
    const InteractionSpec g = InteractionSpec::linear(2.0);
    CHECK(g.eval(0, 3.0) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(g.eval(1, 7.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g.eval(2, 0.3) == 0.0);
    CHECK(g.eval(3, 5.0) == 0.0);
    CHECK_THROWS_AS(g.eval(0, -0.1), std::domain_error);
    CHECK_THROWS_AS(g.eval(4, 1.0), std::invalid_argument);
}

TEST_CASE("eval on the rational family") {
    const InteractionSpec g = InteractionSpec::rational_perturbed(1.0, 0.5, 1.0);
    // d/ds [s^2/(1+s)] vanishes at s = 0.
    CHECK(g.eval(1, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.eval(0, 1.0) == doctest::Approx(1.0 + 0.25).epsilon(1e-14));
    CHECK(g.eval(2, 0.0) == doctest::Approx(1.0).epsilon(1e-14));  // 2a at s = 0
}

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(InteractionSpec::linear(0.0), std::invalid_argument);
    CHECK_THROWS_AS(InteractionSpec::linear(-2.0), std::invalid_argument);
    CHECK_THROWS_AS(InteractionSpec::rational_perturbed(1.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(InteractionSpec::rational_perturbed(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("h_part") {
    SUBCASE("vanishes identically for linear g") {
        const InteractionSpec g = InteractionSpec::linear(1.7);
        for (double s : {0.0, 0.5, 2.0, 9.0}) {
            CHECK(g.h_part(0, s) == 0.0);
            CHECK(g.h_part(1, s) == 0.0);
        }
    }
    SUBCASE("reference value and consistency with eval") {
        const InteractionSpec g = InteractionSpec::rational_perturbed(1.0, 1.0, 1.0);
        CHECK(g.h_part(0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
        for (double s : {0.1, 0.7, 3.0}) {
            CHECK(g.h_part(0, s) == doctest::Approx(g.eval(0, s) - g.gamma() * s).epsilon(1e-13));
            CHECK(g.h_part(1, s) == doctest::Approx(g.eval(1, s) - g.gamma()).epsilon(1e-13));
        }
    }
    SUBCASE("h(0) = h'(0) = 0 by construction") {
        for (const auto& g : {InteractionSpec::linear(2.0), InteractionSpec::rational_perturbed(1.5, 2.0, 3.0)}) {
            CHECK(g.h_part(0, 0.0) == 0.0);
            CHECK(g.h_part(1, 0.0) == 0.0);
        }
    }
    SUBCASE("h(s)/s -> 0 as s -> 0") {
        const InteractionSpec g = InteractionSpec::rational_perturbed(1.0, 2.0, 0.5);
        double prev = std::numeric_limits<double>::infinity();
        for (double s : {1e-2, 1e-4, 1e-6}) {
            const double ratio = g.h_part(0, s) / s;
            CHECK(ratio < prev);
            prev = ratio;
        }
        CHECK(prev < 1e-5);
    }
}

TEST_CASE("closed-form derivatives match finite differences") {
    TestRng rng(77);
    const InteractionSpec specs[] = {InteractionSpec::linear(1.3),
                                     InteractionSpec::rational_perturbed(1.0, 1.0, 1.0),
                                     InteractionSpec::rational_perturbed(0.7, 2.5, 4.0)};
    for (const auto& g : specs) {
        for (int trial = 0; trial < 100; ++trial) {
            const double s = rng.uniform(0.05, 4.0);
            const double step = 1e-5 * (1.0 + s);
            for (int order = 1; order <= 3; ++order) {
                const double fd = (g.eval(order - 1, s + step) - g.eval(order - 1, s - step)) / (2.0 * step);
                const double exact = g.eval(order, s);
                const double scale = std::max({1e-8, std::fabs(exact), std::fabs(fd)});
                CHECK(std::fabs(fd - exact) / scale <= 1e-6);
            }
        }
    }
}

TEST_CASE("audit") {
    SUBCASE("linear ratio is constant") {
        const AuditReport report = InteractionSpec::linear(3.0).audit(10.0);
        CHECK(report.monotone);
        CHECK(report.c_lower == doctest::Approx(3.0).epsilon(1e-13));
        CHECK(report.c_upper == doctest::Approx(3.0).epsilon(1e-13));
        CHECK(report.pass());
    }
    SUBCASE("rational ratio bounded by gamma + a/b") {
        const AuditReport report = InteractionSpec::rational_perturbed(1.0, 1.0, 1.0).audit(10.0);
        CHECK(report.monotone);
        CHECK(report.c_upper < 2.0);
        CHECK(report.c_upper == doctest::Approx(1.0 + 10.0 / 11.0).epsilon(1e-3));
        CHECK(report.c_lower == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("requires a sampling range beyond 1") { CHECK_THROWS(InteractionSpec::linear(1.0).audit(0.5)); }
}

TEST_CASE("pair audit gate") {
    CHECK_NOTHROW(InteractionPair(InteractionSpec::linear(1.0), InteractionSpec::rational_perturbed(1.0, 1.0, 1.0)));
    const InteractionPair pair(InteractionSpec::linear(0.5), InteractionSpec::linear(2.0));
    // C_g must serve both components: max(2, 1/0.5) = 2.
    CHECK(pair.audited_c_g(10.0) == doctest::Approx(2.0).epsilon(1e-12));
}
