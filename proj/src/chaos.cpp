#include "mgmc/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "mgmc/quad.hpp"
#include "mgmc/rng.hpp"

namespace mgmc {

namespace {

// RNG channel reserved for internal c_eps estimation; driver channels are
// 0 .. N(N+1)/2 - 1, so any large constant is collision-free.
constexpr std::uint64_t kRenormChannel = 1000003;
constexpr double kRegionTol = 1e-12;

double sq(double x) { return x * x; }

// E[f(v)], v ~ Beta(1/2,(N-1)/2), with node doubling until convergence.
double beta_expectation_adaptive(int n, const std::function<double(double)>& f) {
    double prev = beta_entry_expectation(n, f, 128);
    for (std::size_t nodes = 256; nodes <= 8192; nodes *= 2) {
        const double cur = beta_entry_expectation(n, f, nodes);
        if (std::abs(cur - prev) <= 1e-10 * std::max(1.0, std::abs(cur)))
            return cur;
        prev = cur;
    }
    throw std::runtime_error("pair correlation quadrature did not converge");
}

double sigma_r2(double r, const KernelSpec& kernel) {
    if (r >= kernel.L) return 0.0;
    return kernel.gamma2 * std::log(kernel.L / r) + kernel.m;
}

// jackknife standard error of the mean, contiguous blocks of 32 replicas
double jackknife_se(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::size_t g = n / 32;
    double total = 0.0;
    for (double v : x) total += v;
    if (g < 2) {
        // too few replicas for blocking: plain SE of the mean
        const double mean = total / n;
        double ss = 0.0;
        for (double v : x) ss += sq(v - mean);
        return n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    }
    std::vector<double> block_sum(g, 0.0);
    std::vector<std::size_t> block_count(g, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = std::min(i / 32, g - 1);  // remainder joins last
        block_sum[b] += x[i];
        block_count[b] += 1;
    }
    std::vector<double> leave_out(g);
    double lo_mean = 0.0;
    for (std::size_t b = 0; b < g; ++b) {
        leave_out[b] = (total - block_sum[b]) / (n - block_count[b]);
        lo_mean += leave_out[b];
    }
    lo_mean /= g;
    double ss = 0.0;
    for (double v : leave_out) ss += sq(v - lo_mean);
    return std::sqrt((g - 1.0) / g * ss);
}

std::vector<double> region_center(const LatticeSpec& lat) {
    std::vector<double> c(lat.d, 0.0);
    for (int k = 0; k < lat.d; ++k)
        c[k] = (lat.origin.empty() ? 0.0 : lat.origin[k]) +
               lat.spacing * (lat.n_per_side - 1) / 2.0;
    return c;
}

double dist_to(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += sq(a[k] - b[k]);
    return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------------------

double renorm_constant_asymptotic(int N, double c, double sigma_eps2) {
    if (N < 1) throw std::invalid_argument("renorm asymptotic: N >= 1");
    if (!(sigma_eps2 > 0.0))
        throw std::invalid_argument("renorm asymptotic: sigma_eps2 > 0");
    if (N >= 2 && !(c > -1.0 && c <= 1.0 / (N - 1)))
        throw std::invalid_argument("renorm asymptotic: c in ]-1, 1/(N-1)]");
    const double log_val = -std::log(static_cast<double>(N)) + std::lgamma(0.5) -
                           std::lgamma(N / 2.0) + 0.5 * (N - 1) * std::log1p(c) +
                           0.5 * (N - 1) * std::log(sigma_eps2) + 0.5 * sigma_eps2;
    return std::exp(log_val);
}

RenormEstimate renorm_constant_exact(const IsotropyParams& params,
                                     std::size_t n_samples, std::mt19937_64& rng) {
    params.validate();
    if (n_samples < 1000)
        throw std::invalid_argument("renorm_constant_exact: n_samples >= 1000");
    if (params.sigma2 > 1400.0)
        throw std::invalid_argument(
            "renorm_constant_exact: sigma_eps2 > 1400 overflows even in log domain");
    const double log_n = std::log(static_cast<double>(n_samples));
    std::vector<double> t(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s)
        t[s] = log_trace_exp_symmetric(sample_isotropic(params, rng)) -
               std::log(static_cast<double>(params.N));
    std::vector<double> t2(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) t2[s] = 2.0 * t[s];
    const double l1 = log_sum_exp(t) - log_n;        // log mean
    const double l2 = log_sum_exp(t2) - log_n;       // log second moment
    RenormEstimate out;
    out.log_value = l1;
    out.value = std::exp(l1);
    out.n_samples = n_samples;
    // Var = E[x^2] - E[x]^2 = e^{l2} (1 - e^{2 l1 - l2}); Jensen gives
    // 2 l1 <= l2, so the bracket is in [0, 1].
    const double ratio = std::exp(std::min(0.0, 2.0 * l1 - l2));
    out.std_error = std::exp(0.5 * (l2 - log_n)) *
                    std::sqrt(std::max(0.0, 1.0 - ratio));
    return out;
}

// ---------------------------------------------------------------------------

ChaosMeasure chaos_measure(const MatrixField& field, const BallRegion& region,
                           double c_eps) {
    if (!(c_eps > 0.0)) throw std::invalid_argument("chaos_measure: c_eps > 0");
    if (static_cast<int>(region.center.size()) != field.lattice.d)
        throw std::invalid_argument("chaos_measure: region dimension mismatch");
    const std::size_t n_sites = field.lattice.n_sites();
    const int n = field.params.N;
    const double cell = field.lattice.cell_volume();
    ChaosMeasure out;
    out.value = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t s = 0; s < n_sites; ++s) {
        if (dist_to(field.lattice.site(s), region.center) >
            region.radius + kRegionTol)
            continue;
        out.value += matrix_exp_symmetric(field.matrix_at(s)) * cell;
        ++out.n_region_sites;
    }
    if (out.n_region_sites == 0)
        throw std::invalid_argument("chaos_measure: empty region");
    out.value /= c_eps;
    out.region = region;
    out.c_eps_used = c_eps;
    out.epsilon = field.kernel.epsilon;
    out.lattice = field.lattice;
    out.region_volume = out.n_region_sites * cell;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct EnsembleSetup {
    FieldSynthesizer synth;
    double c_eps;
    std::vector<double> center;

    EnsembleSetup(const MomentConfig& cfg, const CutoffKernel& kernel)
        : synth(cfg.lattice, kernel, cfg.params, cfg.backend),
          c_eps(cfg.c_eps),
          center(region_center(cfg.lattice)) {
        if (c_eps <= 0.0) {
            auto rng = make_stream(cfg.seed, 0, kRenormChannel);
            c_eps = renorm_constant_exact(synth.params(), cfg.c_eps_samples, rng)
                        .value;
        }
    }
};

void validate_orders(const MomentConfig& cfg) {
    if (cfg.orders.empty()) throw std::invalid_argument("moments: no orders");
    for (int k : cfg.orders) {
        if (k < 1) throw std::invalid_argument("moments: order >= 1");
        if (k >= 2 && !(k < 2.0 * cfg.kernel.d / cfg.kernel.gamma2))
            throw std::invalid_argument(
                "moments: order k must satisfy k < 2d/gamma2 (finite-moment "
                "hypothesis)");
    }
}

}  // namespace

MomentTable ensemble_moments(const MomentConfig& config) {
    config.kernel.validate_for_chaos();
    config.lattice.validate();
    validate_orders(config);
    if (config.scales.empty()) throw std::invalid_argument("moments: no scales");
    for (std::size_t i = 1; i < config.scales.size(); ++i)
        if (!(config.scales[i] < config.scales[i - 1]))
            throw std::invalid_argument("moments: scales must strictly decrease");
    if (config.n_replicas < 2)
        throw std::invalid_argument("moments: n_replicas >= 2");

    const CutoffKernel kernel(config.kernel);
    EnsembleSetup setup(config, kernel);
    const auto& lat = config.lattice;
    const std::size_t n_sites = lat.n_sites();

    // sites sorted by distance from the region center; each scale becomes a
    // prefix of this ordering
    std::vector<double> dist(n_sites);
    for (std::size_t s = 0; s < n_sites; ++s)
        dist[s] = dist_to(lat.site(s), setup.center);
    std::vector<std::size_t> order(n_sites);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    const std::size_t n_scales = config.scales.size();
    std::vector<std::size_t> prefix(n_scales);
    for (std::size_t si = 0; si < n_scales; ++si) {
        std::size_t cnt = 0;
        while (cnt < n_sites &&
               dist[order[cnt]] <= config.scales[si] + kRegionTol)
            ++cnt;
        if (cnt == 0)
            throw std::invalid_argument("moments: scale below lattice resolution");
        prefix[si] = cnt;
    }
    const std::size_t max_prefix = prefix[0];

    const int n = config.params.N;
    const std::size_t n_orders = config.orders.size();
    const double cell = lat.cell_volume();
    std::vector<double> stats(config.n_replicas * n_scales * n_orders, 0.0);

    const int workers = std::max(1, config.workers);
    auto run_block = [&](int w) {
        Eigen::MatrixXd acc(n, n);
        for (std::size_t r = w; r < config.n_replicas;
             r += static_cast<std::size_t>(workers)) {
            const MatrixField field = setup.synth.synthesize(config.seed, r);
            acc.setZero();
            std::size_t si = n_scales;  // scales ascend as prefixes ascend
            for (std::size_t j = 0; j < max_prefix; ++j) {
                acc += matrix_exp_symmetric(field.matrix_at(order[j]));
                while (si > 0 && prefix[si - 1] == j + 1) {
                    --si;
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                        acc * (cell / setup.c_eps), Eigen::EigenvaluesOnly);
                    for (std::size_t ki = 0; ki < n_orders; ++ki) {
                        double tr = 0.0;
                        for (int e = 0; e < n; ++e)
                            tr += std::pow(es.eigenvalues()(e), config.orders[ki]);
                        stats[(r * n_scales + si) * n_orders + ki] = tr;
                    }
                }
            }
        }
    };
    if (workers == 1) {
        run_block(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
        for (auto& t : pool) t.join();
    }

    MomentTable table;
    table.c_eps_used = setup.c_eps;
    table.kernel = config.kernel;
    table.params = setup.synth.params();
    table.seed = config.seed;
    std::vector<double> per_rep(config.n_replicas);
    for (std::size_t si = 0; si < n_scales; ++si)
        for (std::size_t ki = 0; ki < n_orders; ++ki) {
            CompensatedSum sum;
            for (std::size_t r = 0; r < config.n_replicas; ++r) {
                per_rep[r] = stats[(r * n_scales + si) * n_orders + ki];
                sum.add(per_rep[r]);
            }
            MomentRow row;
            row.scale = config.scales[si];
            row.order = config.orders[ki];
            row.estimate = sum.value() / config.n_replicas;
            row.std_error = jackknife_se(per_rep);
            row.n_replicas = config.n_replicas;
            table.rows.push_back(row);
        }
    return table;
}

std::vector<MeanCheckRow> mean_identity_check(const MomentConfig& config,
                                              double scale) {
    config.kernel.validate_for_chaos();
    config.lattice.validate();
    if (config.n_replicas < 2)
        throw std::invalid_argument("mean check: n_replicas >= 2");
    const CutoffKernel kernel(config.kernel);
    EnsembleSetup setup(config, kernel);
    const int n = config.params.N;
    BallRegion region{setup.center, scale};

    const int workers = std::max(1, config.workers);
    const std::size_t n_entries = static_cast<std::size_t>(n) * n;
    std::vector<double> entries(config.n_replicas * n_entries, 0.0);
    double region_volume = 0.0;
    auto run_block = [&](int w) {
        for (std::size_t r = w; r < config.n_replicas;
             r += static_cast<std::size_t>(workers)) {
            const ChaosMeasure m = chaos_measure(
                setup.synth.synthesize(config.seed, r), region, setup.c_eps);
            if (r == 0) region_volume = m.region_volume;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    entries[r * n_entries + i * n + j] = m.value(i, j);
        }
    };
    if (workers == 1) {
        run_block(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
        for (auto& t : pool) t.join();
    }
    if (region_volume == 0.0)
        region_volume = chaos_measure(setup.synth.synthesize(config.seed, 0),
                                      region, setup.c_eps)
                            .region_volume;

    std::vector<MeanCheckRow> rows;
    std::vector<double> x(config.n_replicas);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            CompensatedSum sum;
            for (std::size_t r = 0; r < config.n_replicas; ++r) {
                x[r] = entries[r * n_entries + i * n + j];
                sum.add(x[r]);
            }
            MeanCheckRow row;
            row.i = i;
            row.j = j;
            row.estimate = sum.value() / config.n_replicas;
            row.std_error = jackknife_se(x);
            row.target = (i == j) ? region_volume : 0.0;
            row.z = row.std_error > 0.0
                        ? (row.estimate - row.target) / row.std_error
                        : 0.0;
            rows.push_back(row);
        }
    return rows;
}

double zeta_theory(int d, double gamma2, int k) {
    return (d + gamma2 / 2.0) * k - gamma2 / 2.0 * k * k;
}

std::vector<ZetaRow> zeta_fit(const MomentTable& table) {
    std::vector<int> orders;
    for (const auto& row : table.rows)
        if (std::find(orders.begin(), orders.end(), row.order) == orders.end())
            orders.push_back(row.order);
    std::vector<ZetaRow> out;
    for (int k : orders) {
        std::vector<double> x, y, ycorr, w;
        for (const auto& row : table.rows) {
            if (row.order != k) continue;
            if (!(row.estimate > 0.0))
                throw std::invalid_argument("zeta_fit: non-positive estimate");
            x.push_back(std::log(row.scale));
            y.push_back(std::log(row.estimate));
            const double loglog = std::log(std::log(1.0 / row.scale));
            ycorr.push_back(y.back() + (k - 1) * (table.params.N - 1) / 2.0 * loglog);
            const double rel = row.std_error / row.estimate;
            w.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1.0);
        }
        if (x.size() < 4)
            throw std::invalid_argument("zeta_fit: need >= 4 scales per order");
        const LinearFit fit = weighted_linear_fit(x, y, w);
        const LinearFit fit_corr = weighted_linear_fit(x, ycorr, w);
        ZetaRow row;
        row.order = k;
        row.slope = fit.slope;
        row.intercept = fit.intercept;
        row.slope_se = fit.slope_se;
        row.slope_logcorrected = fit_corr.slope;
        row.theory_zeta = zeta_theory(table.kernel.d, table.kernel.gamma2, k);
        out.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------

CauchyTable cauchy_l2_check(const CauchyConfig& config) {
    KernelSpec base = config.kernel;
    base.epsilon = config.epsilons.empty() ? base.epsilon : config.epsilons[0];
    base.validate_for_chaos();
    config.lattice.validate();
    if (config.epsilons.size() < 2)
        throw std::invalid_argument("cauchy check: need >= 2 cutoffs");
    for (std::size_t i = 1; i < config.epsilons.size(); ++i)
        if (!(config.epsilons[i] < config.epsilons[i - 1]))
            throw std::invalid_argument("cauchy check: cutoffs must decrease");
    if (config.n_replicas < 2)
        throw std::invalid_argument("cauchy check: n_replicas >= 2");

    const std::size_t n_eps = config.epsilons.size();
    std::vector<std::unique_ptr<FieldSynthesizer>> synths;
    std::vector<double> c_eps(n_eps);
    for (std::size_t k = 0; k < n_eps; ++k) {
        KernelSpec spec = base;
        spec.epsilon = config.epsilons[k];
        const CutoffKernel kernel(spec);
        IsotropyParams p = config.params;
        p.sigma2 = 0.0;  // derived per cutoff
        synths.push_back(std::make_unique<FieldSynthesizer>(
            config.lattice, kernel, p, FieldBackend::Dense,
            FactorizationStyle::SymmetricSqrt));
        auto rng = make_stream(config.seed, k, kRenormChannel);
        c_eps[k] =
            renorm_constant_exact(synths[k]->params(), config.c_eps_samples, rng)
                .value;
    }

    const std::size_t n_pairs = n_eps - 1;
    struct PairStats {
        std::vector<double> diff, cross, diag_a, diag_b;
    };
    std::vector<PairStats> stats(n_pairs);
    for (auto& s : stats) {
        s.diff.resize(config.n_replicas);
        s.cross.resize(config.n_replicas);
        s.diag_a.resize(config.n_replicas);
        s.diag_b.resize(config.n_replicas);
    }

    const int workers = std::max(1, config.workers);
    auto run_block = [&](int w) {
        std::vector<Eigen::MatrixXd> measures(n_eps);
        for (std::size_t r = w; r < config.n_replicas;
             r += static_cast<std::size_t>(workers)) {
            const auto noise = synths[0]->sample_noise(config.seed, r);
            for (std::size_t k = 0; k < n_eps; ++k)
                measures[k] = chaos_measure(synths[k]->synthesize_with_noise(noise),
                                            config.region, c_eps[k])
                                  .value;
            for (std::size_t k = 0; k + 1 < n_eps; ++k) {
                const Eigen::MatrixXd d = measures[k] - measures[k + 1];
                stats[k].diff[r] = (d * d).trace();
                stats[k].cross[r] = (measures[k] * measures[k + 1]).trace();
                stats[k].diag_a[r] = (measures[k] * measures[k]).trace();
                stats[k].diag_b[r] = (measures[k + 1] * measures[k + 1]).trace();
            }
        }
    };
    if (workers == 1) {
        run_block(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
        for (auto& t : pool) t.join();
    }

    auto mean_of = [&](const std::vector<double>& v) {
        CompensatedSum s;
        for (double x : v) s.add(x);
        return s.value() / v.size();
    };
    CauchyTable table;
    for (std::size_t k = 0; k < n_pairs; ++k) {
        CauchyRow row;
        row.eps = config.epsilons[k];
        row.eps_prime = config.epsilons[k + 1];
        row.estimate = mean_of(stats[k].diff);
        row.std_error = jackknife_se(stats[k].diff);
        row.cross_term = mean_of(stats[k].cross);
        row.diag_eps = mean_of(stats[k].diag_a);
        row.diag_eps_prime = mean_of(stats[k].diag_b);
        table.rows.push_back(row);
    }
    std::vector<double> delta(config.n_replicas);
    for (std::size_t k = 0; k + 1 < n_pairs; ++k) {
        for (std::size_t r = 0; r < config.n_replicas; ++r)
            delta[r] = stats[k].diff[r] - stats[k + 1].diff[r];
        table.step_diff.push_back(mean_of(delta));
        table.step_diff_se.push_back(jackknife_se(delta));
    }
    return table;
}

// ---------------------------------------------------------------------------

double pair_correlation(double r, const KernelSpec& kernel,
                        const IsotropyParams& params) {
    if (!(r > 0.0)) throw std::invalid_argument("pair_correlation: r > 0");
    params.validate();
    const double s2 = sigma_r2(r, kernel);
    if (params.N == 1) return std::exp(s2);
    const double n2 = sq(static_cast<double>(params.N));
    const double coef = s2 * (1.0 + params.c);
    const double val = beta_expectation_adaptive(
        params.N, [&](double v) { return v * std::exp(coef * v); });
    return n2 * std::exp(-params.c * s2) * val;
}

double pair_correlation_asymptotic(double r, const KernelSpec& kernel,
                                   const IsotropyParams& params) {
    if (!(r > 0.0)) throw std::invalid_argument("pair_correlation: r > 0");
    params.validate();
    const double s2 = sigma_r2(r, kernel);
    if (!(s2 > 0.0))
        throw std::invalid_argument("pair_correlation_asymptotic: need r < L");
    const int n = params.N;
    const double log_val = 2.0 * std::log(static_cast<double>(n)) +
                           std::lgamma(n / 2.0) - std::lgamma(0.5) + s2 -
                           0.5 * (n - 1) * std::log1p(params.c) -
                           0.5 * (n - 1) * std::log(s2);
    return std::exp(log_val);
}

double pairing_volume_constant(int d, double gamma2, std::size_t mc_samples,
                               std::uint64_t mc_seed) {
    if (!(gamma2 > 0.0 && gamma2 < d))
        throw std::invalid_argument("V constant: need 0 < gamma2 < d");
    if (d == 1)
        return 2.0 * integrate_singular_at_zero(
                         [&](double t) { return (2.0 - t) * std::pow(t, -gamma2); },
                         2.0);
    // d >= 2: Monte Carlo over a pair of uniform points in the unit ball
    auto rng = make_stream(mc_seed, 0, 7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto draw_ball = [&](std::vector<double>& x) {
        for (;;) {
            double n2 = 0.0;
            for (int k = 0; k < d; ++k) {
                x[k] = unif(rng);
                n2 += sq(x[k]);
            }
            if (n2 <= 1.0) return;
        }
    };
    std::vector<double> u(d), v(d);
    CompensatedSum acc;
    for (std::size_t s = 0; s < mc_samples; ++s) {
        draw_ball(u);
        draw_ball(v);
        acc.add(std::pow(dist_to(u, v), -gamma2));
    }
    const double ball_vol =
        std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    return acc.value() / mc_samples * sq(ball_vol);
}

SecondMomentTheory second_moment_theory(double ell, const KernelSpec& kernel,
                                        const IsotropyParams& params,
                                        std::size_t mc_samples,
                                        std::uint64_t mc_seed) {
    if (!(ell > 0.0 && ell < 1.0))
        throw std::invalid_argument("second moment: 0 < ell < 1");
    if (!(kernel.gamma2 < kernel.d))
        throw std::invalid_argument("second moment: need gamma2 < d");
    params.validate();
    SecondMomentTheory out;
    out.v_constant = pairing_volume_constant(kernel.d, kernel.gamma2, mc_samples,
                                             mc_seed);
    const int n = params.N;
    const double s_ell2 = kernel.gamma2 * std::log(1.0 / ell);
    const double log_asym =
        2.0 * std::log(static_cast<double>(n)) + std::lgamma(n / 2.0) -
        std::lgamma(0.5) + std::log(out.v_constant) + kernel.gamma2 * std::log(kernel.L) +
        kernel.m - 0.5 * (n - 1) * std::log1p(params.c) +
        (2.0 * kernel.d - kernel.gamma2) * std::log(ell) -
        0.5 * (n - 1) * std::log(s_ell2);
    out.asymptotic = std::exp(log_asym);

    if (kernel.d == 1) {
        const double upper = std::min(2.0 * ell, kernel.L);
        double val = integrate_singular_at_zero(
            [&](double t) {
                return (2.0 * ell - t) * pair_correlation(t, kernel, params);
            },
            upper);
        if (2.0 * ell > kernel.L)
            val += n * sq(2.0 * ell - kernel.L) / 2.0;
        out.exact = 2.0 * val;
        return out;
    }
    // d >= 2: MC over B(0,ell)^2
    auto rng = make_stream(mc_seed, 1, 7);
    std::uniform_real_distribution<double> unif(-ell, ell);
    auto draw_ball = [&](std::vector<double>& x) {
        for (;;) {
            double n2 = 0.0;
            for (int k = 0; k < kernel.d; ++k) {
                x[k] = unif(rng);
                n2 += sq(x[k]);
            }
            if (n2 <= sq(ell)) return;
        }
    };
    std::vector<double> x(kernel.d), y(kernel.d);
    CompensatedSum acc;
    for (std::size_t s = 0; s < mc_samples; ++s) {
        draw_ball(x);
        draw_ball(y);
        acc.add(pair_correlation(dist_to(x, y), kernel, params));
    }
    const double ball_vol = std::pow(M_PI, kernel.d / 2.0) /
                            std::tgamma(kernel.d / 2.0 + 1.0) *
                            std::pow(ell, kernel.d);
    out.exact = acc.value() / mc_samples * sq(ball_vol);
    return out;
}

}  // namespace mgmc
