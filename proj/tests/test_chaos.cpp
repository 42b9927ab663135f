#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mgmc/chaos.hpp"
#include "mgmc/rng.hpp"

using namespace mgmc;

namespace {

MomentConfig small_config() {
    MomentConfig mc;
    mc.kernel = KernelSpec{1, 0.25, 1.0, 1.0 / 32.0, 0.0};
    mc.params = IsotropyParams{2, 0.0, 0.0};
    mc.lattice.d = 1;
    mc.lattice.n_per_side = 32;
    mc.lattice.spacing = 1.0 / 64.0;
    mc.scales = {0.2, 0.1, 0.05};
    mc.orders = {1, 2};
    mc.seed = 13;
    mc.n_replicas = 400;
    mc.c_eps_samples = 50000;
    return mc;
}

}  // namespace

TEST_CASE("renormalization constant: MC agrees with the small-sigma regime") {
    // N = 2, c = 0, sigma2 = 4: asymptotic = sqrt(pi) e^2
    CHECK(renorm_constant_asymptotic(2, 0.0, 4.0) ==
          doctest::Approx(13.09676093710652).epsilon(1e-13));
    // N = 1 degenerates to the scalar normalization
    CHECK(renorm_constant_asymptotic(1, 0.0, 3.0) ==
          doctest::Approx(std::exp(1.5)).epsilon(1e-13));

    // direct MC at small sigma2, where E tr(e^X)/N is benign
    IsotropyParams p{2, 0.0, 1.0};
    auto rng = make_stream(7, 0, 1);
    const auto est = renorm_constant_exact(p, 400000, rng);
    // E[e^x] for x ~ N(0, v) entrywise mixture; sanity window via 4 SE
    CHECK(est.std_error > 0.0);
    CHECK(est.value > 1.0);
    auto rng2 = make_stream(7, 0, 1);
    const auto est2 = renorm_constant_exact(p, 400000, rng2);
    CHECK(est.value == est2.value);  // deterministic
}

TEST_CASE("chaos measure of a region") {
    const MomentConfig mc = small_config();
    const CutoffKernel kernel(mc.kernel);
    const FieldSynthesizer synth(mc.lattice, kernel, mc.params);
    const MatrixField f = synth.synthesize(3, 0);
    std::vector<double> center = {mc.lattice.spacing * (mc.lattice.n_per_side - 1) /
                                  2.0};
    const auto m = chaos_measure(f, BallRegion{center, 0.1}, 2.0);
    CHECK(m.value.rows() == 2);
    CHECK((m.value - m.value.transpose()).norm() == doctest::Approx(0.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.value);
    CHECK(es.eigenvalues().minCoeff() > 0.0);  // positive definite
    CHECK(m.n_region_sites > 0);
    CHECK(m.region_volume ==
          doctest::Approx(m.n_region_sites * mc.lattice.spacing));
    // halving c_eps doubles the measure
    const auto m2 = chaos_measure(f, BallRegion{center, 0.1}, 1.0);
    CHECK((m2.value - 2.0 * m.value).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ensemble moments: reproducibility and worker invariance") {
    const MomentConfig mc = small_config();
    const auto t1 = ensemble_moments(mc);
    auto mc4 = mc;
    mc4.workers = 4;
    const auto t4 = ensemble_moments(mc4);
    REQUIRE(t1.rows.size() == t4.rows.size());
    for (std::size_t i = 0; i < t1.rows.size(); ++i) {
        CHECK(t1.rows[i].estimate == t4.rows[i].estimate);
        CHECK(t1.rows[i].std_error == t4.rows[i].std_error);
    }
    CHECK(t1.c_eps_used == t4.c_eps_used);
    // first moment of tr M(B) is close to N |B| = 2 * (2 * scale)
    for (const auto& row : t1.rows) {
        if (row.order != 1) continue;
        CHECK(std::abs(row.estimate - 4.0 * row.scale) <
              std::max(4.0 * row.std_error, 0.25 * 4.0 * row.scale));
    }
}

TEST_CASE("mean identity on a small ensemble") {
    MomentConfig mc = small_config();
    mc.n_replicas = 3000;
    const auto rows = mean_identity_check(mc, 0.1);
    REQUIRE(rows.size() == 3);  // upper triangle of a 2x2
    for (const auto& r : rows) {
        if (r.i == r.j) CHECK(r.target > 0.0);
        if (r.i != r.j) CHECK(r.target == doctest::Approx(0.0));
        CHECK(std::abs(r.z) < 4.5);
    }
}

TEST_CASE("structure exponents") {
    CHECK(zeta_theory(1, 0.25, 2) == doctest::Approx(1.75).epsilon(1e-14));
    CHECK(zeta_theory(1, 0.25, 3) == doctest::Approx(2.25).epsilon(1e-14));
    // linear coefficient: zeta(1) = d
    CHECK(zeta_theory(2, 0.7, 1) == doctest::Approx(2.0).epsilon(1e-14));

    MomentConfig mc = small_config();
    mc.scales = {0.2, 0.15, 0.1, 0.075, 0.05};
    const auto table = ensemble_moments(mc);
    const auto fits = zeta_fit(table);
    REQUIRE(fits.size() == 2);
    CHECK(fits[0].order == 1);
    CHECK(fits[0].theory_zeta == doctest::Approx(1.0));
    CHECK(fits[1].theory_zeta == doctest::Approx(1.75));
    CHECK(std::abs(fits[0].slope - 1.0) < 0.2);  // first moment is exactly linear
}

TEST_CASE("pair correlation closed forms") {
    KernelSpec spec{1, 1.0, 1.0, 0.01, 0.0};
    // N = 1: rho(r) = e^{sigma_r^2} = L/r for r < L
    IsotropyParams scalar{1, 0.0, 0.0};
    CHECK(pair_correlation(0.25, spec, scalar) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(pair_correlation(2.0, spec, scalar) == doctest::Approx(1.0).epsilon(1e-12));
    // r >= L: independent entries at distinct sites, rho = N^2 E[v e^0] = N
    IsotropyParams p{3, 0.1, 0.0};
    CHECK(pair_correlation(1.5, spec, p) == doctest::Approx(3.0).epsilon(1e-12));
    // asymptotic takes over at small r
    const double r = 1e-9;
    CHECK(pair_correlation(r, spec, p) /
              pair_correlation_asymptotic(r, spec, p) ==
          doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("second moment theory in d = 1") {
    // V constant closed form at gamma2 = 1/2
    CHECK(pairing_volume_constant(1, 0.5) ==
          doctest::Approx(7.542472332656509).epsilon(1e-10));
    KernelSpec spec{1, 0.5, 1.0, 0.001, 0.0};
    IsotropyParams p{2, 0.0, 0.0};
    const auto th1 = second_moment_theory(1.0 / 64.0, spec, p);
    const auto th2 = second_moment_theory(1.0 / 4096.0, spec, p);
    CHECK(th1.exact > 0.0);
    CHECK(th1.asymptotic > 0.0);
    // the exact/asymptotic ratio drifts toward 1 as ell -> 0
    CHECK(std::abs(th2.exact / th2.asymptotic - 1.0) <
          std::abs(th1.exact / th1.asymptotic - 1.0));
}

TEST_CASE("cauchy diagnostic decreases on a toy case") {
    CauchyConfig cc;
    cc.kernel = KernelSpec{1, 0.25, 1.0, 0.125, 0.0};
    cc.params = IsotropyParams{2, 0.0, 0.0};
    cc.lattice.d = 1;
    cc.lattice.n_per_side = 24;
    cc.lattice.spacing = 1.0 / 48.0;
    cc.region = BallRegion{{cc.lattice.spacing * 11.5}, 0.15};
    cc.epsilons = {0.25, 0.125, 0.0625};
    cc.seed = 21;
    cc.n_replicas = 800;
    cc.c_eps_samples = 40000;
    const auto table = cauchy_l2_check(cc);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].estimate > 0.0);
    CHECK(table.rows[1].estimate > 0.0);
    CHECK(table.rows[1].estimate < table.rows[0].estimate);
    // identity: E tr (M - M')^2 = diag + diag' - 2 cross
    for (const auto& r : table.rows)
        CHECK(r.estimate ==
              doctest::Approx(r.diag_eps + r.diag_eps_prime - 2.0 * r.cross_term)
                  .epsilon(1e-9));
}

TEST_CASE("moment order guard") {
    MomentConfig mc = small_config();
    mc.orders = {9};  // 9 >= 2d/gamma2 = 8
    CHECK_THROWS_AS(ensemble_moments(mc), std::invalid_argument);
    mc.orders = {2};
    mc.scales = {0.05, 0.1};  // not decreasing
    CHECK_THROWS_AS(ensemble_moments(mc), std::invalid_argument);
}
