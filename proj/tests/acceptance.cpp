// Acceptance gate: one pass/fail line per criterion. Exit code is the
// number of failed criteria.

#include <boost/math/special_functions/beta.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mgmc/angular.hpp"
#include "mgmc/chaos.hpp"
#include "mgmc/field.hpp"
#include "mgmc/kernel.hpp"
#include "mgmc/oracles.hpp"
#include "mgmc/rng.hpp"

using namespace mgmc;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
    std::printf("criterion %2d [%s] %s -- %s\n", id, passed ? "PASS" : "FAIL",
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!passed) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. covariance structure of the synthesized field

void criterion_1() {
    bool pass = true;
    std::ostringstream detail;
    for (double c : {0.0, 0.5}) {
        LatticeSpec lat;
        lat.d = 1;
        lat.n_per_side = 256;
        lat.spacing = 1.0 / 256.0;
        const CutoffKernel kernel(KernelSpec{1, 0.25, 1.0, 1.0 / 64.0, 0.0});
        const IsotropyParams params{3, c, 0.0};
        const FieldSynthesizer synth(lat, kernel, params, FieldBackend::Dense);
        std::vector<CovProbe> probes;
        const std::vector<std::pair<std::size_t, std::size_t>> site_pairs = {
            {0, 0}, {0, 32}, {0, 128}, {64, 192}};
        // entry pairs: variances, diagonal cross terms, off-diagonals, and
        // diagonal/off-diagonal cross terms that must vanish
        const std::vector<std::array<int, 4>> entries = {
            {0, 0, 0, 0}, {1, 1, 1, 1}, {0, 0, 1, 1}, {1, 1, 2, 2},
            {0, 1, 0, 1}, {1, 2, 1, 2}, {0, 0, 0, 1}, {0, 1, 1, 2},
        };
        for (const auto& sp : site_pairs)
            for (const auto& e : entries)
                probes.push_back({sp.first, sp.second, e[0], e[1], e[2], e[3]});
        const auto rows = empirical_covariance_report(synth, 101, 20000, probes, 1);
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, std::abs(r.z));
        if (worst >= 4.0) pass = false;
        detail << "c=" << c << " max|z|=" << fmt(worst) << "  ";
    }
    report(1, "field covariance structure", pass, detail.str());
}

// ---------------------------------------------------------------------------
// 2. renormalization constant vs its large-variance asymptotic

void criterion_2() {
    const std::vector<double> grid = {9.0, 25.0};
    const auto rows = laplace_cep_check(2, 0.0, grid, 1000000, 202);
    const double r9 = rows[0].ratio, r25 = rows[1].ratio;
    const bool in_band = r25 >= 0.85 && r25 <= 1.15;
    const bool closer = std::abs(r25 - 1.0) < std::abs(r9 - 1.0);
    report(2, "renormalization constant asymptotic", in_band && closer,
           "ratio(sigma2=9)=" + fmt(r9) + " ratio(sigma2=25)=" + fmt(r25));
}

// ---------------------------------------------------------------------------
// 3. mean normalization E[M^eps(A)] = |A| I

void criterion_3() {
    MomentConfig mc;
    mc.kernel = KernelSpec{1, 0.25, 1.0, 1.0 / 64.0, 0.0};
    mc.params = IsotropyParams{2, 0.5, 0.0};
    mc.lattice.d = 1;
    mc.lattice.n_per_side = 256;
    mc.lattice.spacing = 1.0 / 256.0;
    mc.scales = {0.25};
    mc.seed = 303;
    mc.n_replicas = 20000;
    const auto rows = mean_identity_check(mc, 0.25);
    bool pass = true;
    double worst = 0.0;
    for (const auto& r : rows) {
        worst = std::max(worst, std::abs(r.z));
        if (std::abs(r.z) >= 4.0) pass = false;
    }
    report(3, "mean normalization |A| I", pass, "max entry |z|=" + fmt(worst));
}

// ---------------------------------------------------------------------------
// 4. second-moment equivalent (deterministic quadrature route)

void criterion_4() {
    const KernelSpec spec{1, 0.25, 1.0, 1e-6, 0.0};
    const IsotropyParams p{2, 0.0, 0.0};
    std::vector<double> devs;
    std::ostringstream detail;
    bool monotone = true;
    double final_ratio = 0.0;
    for (int e = 8; e <= 14; e += 2) {
        const double ell = std::ldexp(1.0, -e);
        const auto th = second_moment_theory(ell, spec, p);
        const double ratio = th.exact / th.asymptotic;
        if (!devs.empty() && std::abs(ratio - 1.0) >= devs.back()) monotone = false;
        devs.push_back(std::abs(ratio - 1.0));
        final_ratio = ratio;
        detail << "l=2^-" << e << ":" << fmt(ratio) << " ";
    }
    const bool within = std::abs(final_ratio - 1.0) <= 0.10;
    report(4, "second-moment asymptotic ratio", monotone && within,
           detail.str() + (within ? "" : "(final ratio outside the 10% band; "
                                         "the approach is logarithmic in 1/l)"));
}

// ---------------------------------------------------------------------------
// 5. structure exponents zeta(k)

void criterion_5() {
    MomentConfig mc;
    mc.kernel = KernelSpec{1, 0.25, 1.0, std::ldexp(1.0, -10), 0.0};
    mc.params = IsotropyParams{2, 0.0, 0.0};
    mc.lattice.d = 1;
    mc.lattice.n_per_side = 257;  // covers a diameter-1/4 ball at 2^-10 steps
    mc.lattice.spacing = std::ldexp(1.0, -10);
    mc.scales = {std::ldexp(1.0, -3), std::ldexp(1.0, -4), std::ldexp(1.0, -5),
                 std::ldexp(1.0, -6), std::ldexp(1.0, -7)};
    mc.orders = {1, 2, 3};
    mc.seed = 505;
    mc.n_replicas = 20000;
    mc.workers = 4;
    mc.backend = FieldBackend::Dense;
    const auto table = ensemble_moments(mc);
    const auto fits = zeta_fit(table);
    double s1 = 0, s2 = 0, s3 = 0;
    for (const auto& f : fits) {
        if (f.order == 1) s1 = f.slope;
        if (f.order == 2) s2 = f.slope;
        if (f.order == 3) s3 = f.slope;
    }
    const bool ok2 = std::abs(s2 - 1.75) <= 0.15;
    const bool ok3 = std::abs(s3 - 2.25) <= 0.25;
    const bool concave = (s2 - s1) > (s3 - s2);
    report(5, "structure exponents", ok2 && ok3 && concave,
           "zeta_hat(1)=" + fmt(s1) + " zeta_hat(2)=" + fmt(s2) +
               " (theory 1.75) zeta_hat(3)=" + fmt(s3) + " (theory 2.25)" +
               (concave ? ", concave" : ", NOT concave"));
}

// ---------------------------------------------------------------------------
// 6. closed-form integrals vs quadrature and MC

void criterion_6() {
    bool pass = true;
    std::ostringstream detail;
    for (int n : {2, 3}) {
        GaussVandermondeParams p{n, 0.2, 0.1};
        for (bool reduced : {false, true}) {
            const double closed = reduced ? integral_reduced_vandermonde(p)
                                          : integral_full_vandermonde(p);
            const double quad = vandermonde_integral_quadrature(p, reduced, 128);
            const double rel = std::abs(quad / closed - 1.0);
            if (rel >= 1e-5) pass = false;
            detail << "N=" << n << (reduced ? "r" : "f") << " quad_rel=" << fmt(rel)
                   << " ";
            auto rng = make_stream(606, n, reduced ? 1 : 0);
            const auto mc = vandermonde_integral_mc(p, reduced, 1000000, rng);
            // reduced N = 2 has an empty Vandermonde weight: the estimator is
            // exact with zero variance, so compare directly there
            const double zs =
                mc.std_error > 0.0
                    ? std::abs(mc.value - closed) / mc.std_error
                    : (std::abs(mc.value / closed - 1.0) < 1e-12 ? 0.0
                                                                 : std::numeric_limits<double>::infinity());
            if (zs >= 3.0) pass = false;
            detail << "mc_z=" << fmt(zs) << " ";
        }
    }
    report(6, "closed-form integral oracles", pass, detail.str());
}

// ---------------------------------------------------------------------------
// 7. Kolmogorov-Smirnov: squared Haar entry vs Beta(1/2,(N-1)/2)

double kolmogorov_q(double x) {
    if (x <= 0.0) return 1.0;
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        s += (j % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * s));
}

void criterion_7() {
    bool pass = true;
    std::ostringstream detail;
    const std::size_t n = 100000;
    for (int N : {2, 3, 5}) {
        auto rng = make_stream(707, N, 0);
        std::vector<double> v(n);
        for (std::size_t s = 0; s < n; ++s) {
            const Eigen::MatrixXd O = sample_haar_orthogonal(N, rng);
            v[s] = O(0, 0) * O(0, 0);
        }
        std::sort(v.begin(), v.end());
        double dstat = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double F = boost::math::ibeta(0.5, (N - 1) / 2.0, v[i]);
            dstat = std::max(dstat, std::max((i + 1.0) / n - F, F - i * 1.0 / n));
        }
        const double sn = std::sqrt(static_cast<double>(n));
        const double p = kolmogorov_q((sn + 0.12 + 0.11 / sn) * dstat);
        if (p <= 0.01) pass = false;
        detail << "N=" << N << " p=" << fmt(p) << " ";
    }
    report(7, "Haar entry KS test", pass, detail.str());
}

// ---------------------------------------------------------------------------
// 8. k-point trace estimator vs the pair-correlation closed form

void criterion_8() {
    const KernelSpec spec{1, 0.5, 1.0, 1e-6, 0.0};
    const IsotropyParams p{3, 0.0, 0.0};
    bool pass = true;
    std::ostringstream detail;
    int stream = 0;
    for (double r : {0.5, 0.1, 0.02}) {
        const double rho = pair_correlation(r, spec, p);
        std::vector<std::vector<double>> pts = {{0.0}, {r}};
        auto rng = make_stream(808, stream++, 0);
        const auto est = kpoint_trace_sum_mc(pts, spec, p, 2, 400000, rng);
        const double z = std::abs(est.value - rho) / est.std_error;
        if (z >= 3.0) pass = false;
        detail << "r=" << r << " z=" << fmt(z) << " ";
    }
    report(8, "k-point trace vs pair correlation", pass, detail.str());
}

// ---------------------------------------------------------------------------
// 9. coupled Cauchy-in-epsilon differences

void criterion_9() {
    CauchyConfig cc;
    cc.kernel = KernelSpec{1, 0.25, 1.0, 0.125, 0.0};
    cc.params = IsotropyParams{2, 0.0, 0.0};
    cc.lattice.d = 1;
    cc.lattice.n_per_side = 128;
    cc.lattice.spacing = std::ldexp(1.0, -9);
    cc.region = BallRegion{{cc.lattice.spacing * 63.5}, 0.1};
    cc.epsilons = {std::ldexp(1.0, -3), std::ldexp(1.0, -4), std::ldexp(1.0, -5),
                   std::ldexp(1.0, -6), std::ldexp(1.0, -7)};
    cc.seed = 909;
    cc.n_replicas = 4000;
    const auto table = cauchy_l2_check(cc);
    bool pass = true;
    std::ostringstream detail;
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        detail << fmt(table.rows[k].estimate) << " ";
        if (k + 1 < table.rows.size() &&
            !(table.rows[k + 1].estimate < table.rows[k].estimate))
            pass = false;
    }
    // each step decrease must also be significant at 2 SE
    for (std::size_t k = 0; k < table.step_diff.size(); ++k)
        if (!(table.step_diff[k] > 2.0 * table.step_diff_se[k])) pass = false;
    report(9, "Cauchy-in-epsilon decrease", pass, "L2 diffs: " + detail.str());
}

// ---------------------------------------------------------------------------
// 10. scalar (N = 1) reduction against the independent oracle

void criterion_10() {
    const KernelSpec spec{1, 0.25, 1.0, 1.0 / 32.0, 0.0};
    const CutoffKernel kernel(spec);
    LatticeSpec lat;
    lat.d = 1;
    lat.n_per_side = 64;
    lat.spacing = 1.0 / 128.0;
    const BallRegion region{{lat.spacing * 31.5}, 0.1};
    const IsotropyParams params{1, 0.0, 0.0};
    const FieldSynthesizer synth(lat, kernel, params, FieldBackend::Dense);
    const double c_eps = std::exp(kernel.at_zero() / 2.0);
    double worst = 0.0;
    for (std::uint64_t r = 0; r < 32; ++r) {
        const MatrixField f = synth.synthesize(1010, r);
        const auto m = chaos_measure(f, region, c_eps);
        const double oracle = scalar_gmc_oracle(kernel, lat, region, 1010, r);
        worst = std::max(worst, std::abs(m.value(0, 0) / oracle - 1.0));
    }
    report(10, "scalar reduction", worst < 1e-10,
           "max relative deviation over 32 replicas = " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 11. worker-count determinism of the command-line tool

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void criterion_11(const std::string& cli) {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "mgmc_acceptance_workers";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path cfg = base / "moments.ini";
    {
        std::ofstream os(cfg);
        os << "[model]\nd = 1\nN = 2\ngamma2 = 0.25\nc = 0.0\nL = 1.0\n"
              "epsilon = 0.03125\n[grid]\nn_per_side = 48\nspacing = 0.015625\n"
              "[run]\nreplicas = 512\nseed = 11\nscales = 0.3, 0.2, 0.1\n"
              "orders = 1, 2\nc_eps_samples = 20000\n";
    }
    const fs::path ccfg = base / "cauchy.ini";
    {
        std::ofstream os(ccfg);
        os << "[model]\nd = 1\nN = 2\ngamma2 = 0.25\nc = 0.0\nL = 1.0\n"
              "epsilon = 0.03125\nepsilon_list = 0.25, 0.125, 0.0625\n"
              "[grid]\nn_per_side = 32\nspacing = 0.015625\n"
              "[run]\nreplicas = 256\nseed = 11\nc_eps_samples = 20000\n";
    }
    bool pass = true;
    std::ostringstream detail;
    for (int w : {1, 4, 8}) {
        const std::string out = (base / ("m" + std::to_string(w))).string();
        const std::string cmd = cli + " moments --config " + cfg.string() +
                                " --workers " + std::to_string(w) + " --out " + out;
        if (std::system(cmd.c_str()) != 0) pass = false;
        const std::string cout2 = (base / ("c" + std::to_string(w))).string();
        const std::string ccmd = cli + " cauchy --config " + ccfg.string() +
                                 " --workers " + std::to_string(w) + " --out " +
                                 cout2;
        if (std::system(ccmd.c_str()) != 0) pass = false;
    }
    for (const char* file : {"moments.csv", "zeta.csv"}) {
        const std::string ref = slurp(base / "m1" / file);
        if (ref.empty()) pass = false;
        for (int w : {4, 8})
            if (slurp(base / ("m" + std::to_string(w)) / file) != ref) {
                pass = false;
                detail << file << " differs at workers=" << w << " ";
            }
    }
    {
        const std::string ref = slurp(base / "c1" / "cauchy.csv");
        if (ref.empty()) pass = false;
        for (int w : {4, 8})
            if (slurp(base / ("c" + std::to_string(w)) / "cauchy.csv") != ref) {
                pass = false;
                detail << "cauchy.csv differs at workers=" << w << " ";
            }
    }
    if (pass) detail << "moments.csv, zeta.csv, cauchy.csv byte-identical for workers 1/4/8";
    report(11, "worker-count determinism", pass, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
    if (cli.empty()) {
        std::fprintf(stderr, "usage: acceptance --cli <path-to-mgmc-binary>\n");
        return 64;
    }
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11(cli);
    std::printf("%d of 11 criteria passed\n", 11 - g_failures);
    return g_failures;
}
