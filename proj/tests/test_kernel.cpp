#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>

#include "doctest.h"
#include "mgmc/kernel.hpp"
#include "mgmc/quad.hpp"

using namespace mgmc;

TEST_CASE("quadrature utilities") {
    const auto rule = gauss_legendre(16);
    // exact on polynomials up to degree 31
    double acc = 0.0;
    for (std::size_t i = 0; i < 16; ++i)
        acc += rule.weights[i] * std::pow(rule.nodes[i], 10);
    CHECK(acc == doctest::Approx(2.0 / 11.0).epsilon(1e-14));

    // integrable log singularity: int_0^1 ln(1/x) dx = 1
    const double v = integrate_singular_at_zero(
        [](double x) { return -std::log(x); }, 1.0);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    std::array<double, 3> ls = {0.0, std::log(2.0), std::log(3.0)};
    CHECK(log_sum_exp(ls) == doctest::Approx(std::log(6.0)).epsilon(1e-14));

    std::array<double, 4> x = {1.0, 2.0, 3.0, 4.0};
    std::array<double, 4> y = {1.5, 3.5, 5.5, 7.5};
    std::array<double, 4> w = {1.0, 2.0, 1.0, 0.5};
    const auto fit = weighted_linear_fit(x, y, w);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(fit.intercept == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("1d cutoff kernel closed form") {
    // gamma2 = 1, L = 1, eps = 1/8:
    //   K(0) = ln 8 + 1, K(r) = K(0) - r/eps on [0, eps], K(r) = ln(1/r)
    //   on [eps, L], 0 beyond.
    KernelSpec spec{1, 1.0, 1.0, 0.125, 0.0};
    CutoffKernel k(spec);
    CHECK(k.at_zero() == doctest::Approx(3.0794415416798357).epsilon(1e-14));
    CHECK(k.at_radius(1.0 / 16.0) ==
          doctest::Approx(2.5794415416798357).epsilon(1e-14));
    CHECK(k.at_radius(0.5) == doctest::Approx(0.6931471805599453).epsilon(1e-14));
    CHECK(k.at_radius(2.0) == doctest::Approx(0.0));
    // continuity at the cutoff and at L
    CHECK(k.at_radius(0.125 * (1 - 1e-12)) ==
          doctest::Approx(k.at_radius(0.125)).epsilon(1e-9));
    CHECK(k.at_radius(1.0 - 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sigma_eps^2 = gamma2 (ln(L/eps) + 1) in every dimension") {
    for (int d : {1, 2, 3, 4}) {
        KernelSpec spec{d, 0.5, 2.0, 0.0625, 0.0};
        CutoffKernel k(spec);
        const double target =
            spec.gamma2 * (std::log(spec.L / spec.epsilon) + 1.0);
        CHECK(k.at_zero() == doctest::Approx(target).epsilon(1e-10));
    }
}

TEST_CASE("d = 3 sphere-average constant is exactly 1") {
    CHECK(CutoffKernel::sphere_log_constant(3) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bare kernel") {
    KernelSpec spec{2, 2.0, 1.0, 0.01, 0.3};
    std::array<double, 2> x = {0.3, 0.4};  // |x| = 0.5
    auto v = ln_plus_kernel(x, spec);
    REQUIRE(v.has_value());
    CHECK(*v == doctest::Approx(2.0 * std::log(2.0) + 0.3).epsilon(1e-14));
    std::array<double, 2> origin = {0.0, 0.0};
    CHECK(!ln_plus_kernel(origin, spec).has_value());
    std::array<double, 2> far = {3.0, 0.0};
    CHECK(*ln_plus_kernel(far, spec) == doctest::Approx(0.3));
}

TEST_CASE("positive definiteness of the cutoff constructions") {
    for (int d : {1, 2}) {
        KernelSpec spec{d, 1.0, 1.0, 0.05, 0.0};
        CutoffKernel k(spec);
        // regular grid of points in [0,1]^d
        std::vector<double> pts;
        std::size_t n = 0;
        const int side = d == 1 ? 40 : 8;
        for (int i = 0; i < side; ++i) {
            if (d == 1) {
                pts.push_back(i / static_cast<double>(side));
                ++n;
            } else {
                for (int j = 0; j < side; ++j) {
                    pts.push_back(i / static_cast<double>(side));
                    pts.push_back(j / static_cast<double>(side));
                    ++n;
                }
            }
        }
        const auto chk = check_positive_definite(k, pts, n, 1e-9);
        CHECK(chk.passed);
    }
}

TEST_CASE("parameter validation") {
    KernelSpec bad{1, -1.0, 1.0, 0.1, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    KernelSpec bad2{1, 1.0, 1.0, 2.0, 0.0};  // eps >= L
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
    KernelSpec chaos_bad{1, 1.5, 1.0, 0.1, 0.0};  // gamma2 >= d
    CHECK_NOTHROW(chaos_bad.validate());
    CHECK_THROWS_AS(chaos_bad.validate_for_chaos(), std::invalid_argument);
}
