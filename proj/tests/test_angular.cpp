#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>

#include "doctest.h"
#include "mgmc/angular.hpp"
#include "mgmc/rng.hpp"

using namespace mgmc;

TEST_CASE("sphere and von Mises-Fisher samplers") {
    auto rng = make_stream(4);
    for (int n : {2, 3, 6}) {
        const Eigen::VectorXd u = sample_sphere(n, rng);
        CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
        const Eigen::VectorXd v = sample_vmf_e1(n, 5.0, rng);
        CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // concentration: mean first coordinate grows with kappa
    double m1 = 0, m2 = 0;
    for (int s = 0; s < 20000; ++s) {
        m1 += sample_vmf_e1(3, 1.0, rng)(0);
        m2 += sample_vmf_e1(3, 20.0, rng)(0);
    }
    CHECK(m2 / 20000 > m1 / 20000);
    CHECK(m2 / 20000 > 0.9);
}

TEST_CASE("vMF mixture normalization") {
    // on S^2 the first coordinate is uniform on [-1,1]:
    // E[cosh(kappa t)] = sinh(kappa)/kappa
    for (double kappa : {0.5, 2.0, 10.0}) {
        CHECK(vmf_mixture_norm(3, kappa) ==
              doctest::Approx(std::sinh(kappa) / kappa).epsilon(1e-10));
        CHECK(log_vmf_mixture_norm(3, kappa) ==
              doctest::Approx(std::log(std::sinh(kappa) / kappa)).epsilon(1e-10));
    }
    // log version stays finite where the direct one overflows
    CHECK(std::isfinite(log_vmf_mixture_norm(3, 2000.0)));
    // MC consistency on S^4
    auto rng = make_stream(8);
    double acc = 0;
    const int ns = 400000;
    for (int s = 0; s < ns; ++s) acc += std::cosh(3.0 * sample_sphere(5, rng)(0));
    CHECK(std::abs(acc / ns - vmf_mixture_norm(5, 3.0)) < 0.05);
}

TEST_CASE("orthogonal-group exponential integral: MC vs O(2) quadrature vs Bessel") {
    std::array<double, 2> d = {1.0, -0.5};
    std::array<double, 2> dp = {0.3, 0.2};
    const double theta = 0.8;
    // closed form on O(2): e^{theta(u+v)/2} I_0(theta(u-v)/2) with
    // u = sum d_i dp_i, v = d_1 dp_2 + d_2 dp_1
    const double u = d[0] * dp[0] + d[1] * dp[1];
    const double v = d[0] * dp[1] + d[1] * dp[0];
    const double bessel = std::exp(theta * (u + v) / 2.0) *
                          std::cyl_bessel_i(0.0, std::abs(theta * (u - v) / 2.0));
    const double quad = hciz_o2_quadrature(d, dp, theta);
    CHECK(quad == doctest::Approx(bessel).epsilon(1e-10));
    auto rng = make_stream(14);
    const auto mc = hciz_mc(d, dp, theta, 200000, rng);
    CHECK(std::abs(mc.value - quad) < 4.0 * mc.std_error);
}

TEST_CASE("Haar moment integral with weight") {
    auto rng = make_stream(15);
    // coef = 0 reduces to E|O_ij|^2 = 1/N
    std::array<double, 3> u = {0.0, 0.0, 0.0};
    const auto plain = morozov_moment_mc(1, 2, u, u, 0.0, 100000, rng);
    CHECK(std::abs(plain.value - 1.0 / 3.0) < 4.0 * plain.std_error);

    // invariance under the index pattern used by the independence argument:
    // u_k = -c + (1+c) 1_{k=i} gives the same value at (0,0) and (1,1)
    const double c = 0.3;
    std::array<double, 3> u0 = {1.0, -c, -c};
    std::array<double, 3> u1 = {-c, 1.0, -c};
    auto rng_a = make_stream(16);
    auto rng_b = make_stream(17);
    const auto a = morozov_moment_mc(0, 0, u0, u0, 0.7, 400000, rng_a);
    const auto b = morozov_moment_mc(1, 1, u1, u1, 0.7, 400000, rng_b);
    CHECK(std::abs(a.value - b.value) <
          4.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error));
}

TEST_CASE("k-point trace estimator") {
    KernelSpec spec{1, 0.5, 1.0, 0.01, 0.0};
    IsotropyParams p{3, 0.1, 0.0};
    std::array<int, 2> cols = {0, 2};

    SUBCASE("zero exponent limit") {
        // points further apart than L: the exponential weight is 1 and the
        // estimator reduces to E<u1,u2>^2 = 1/N
        std::vector<std::vector<double>> far = {{0.0}, {5.0}};
        auto rng = make_stream(19);
        const auto est = kpoint_trace_mc(far, spec, p, cols, 200000, rng);
        CHECK(std::abs(est.value - 1.0 / 3.0) < 4.0 * est.std_error);
        // the tuple sum is exactly N^k times the fixed-tuple value
        auto rng2 = make_stream(19);
        const auto sum = kpoint_trace_sum_mc(far, spec, p, 2, 200000, rng2);
        CHECK(sum.value == doctest::Approx(9.0 * est.value).epsilon(1e-12));
    }

    SUBCASE("importance sampling is unbiased") {
        std::vector<std::vector<double>> pts = {{0.1}, {0.3}};
        auto rng_p = make_stream(20);
        const auto plain = kpoint_trace_mc(pts, spec, p, cols, 400000, rng_p);
        auto rng_i = make_stream(21);
        KPointOptions opts;
        opts.importance = true;
        const auto is = kpoint_trace_mc(pts, spec, p, cols, 400000, rng_i, opts);
        CHECK(is.ess > 100.0);
        CHECK(!is.ess_flagged);
        CHECK(std::abs(plain.value - is.value) <
              4.0 * std::sqrt(plain.std_error * plain.std_error +
                              is.std_error * is.std_error));
    }

    SUBCASE("coincident points are rejected") {
        std::vector<std::vector<double>> dup = {{0.1}, {0.1}};
        auto rng = make_stream(22);
        CHECK_THROWS_AS(kpoint_trace_mc(dup, spec, p, cols, 10, rng),
                        std::invalid_argument);
    }
}
