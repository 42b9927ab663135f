#include "mgmc/angular.hpp"

#include <cmath>

#include "mgmc/quad.hpp"

namespace mgmc {

namespace {

struct MeanVar {
    CompensatedSum sum, sumsq;
    std::size_t n = 0;
    void add(double x) {
        sum.add(x);
        sumsq.add(x * x);
        ++n;
    }
    double mean() const { return sum.value() / n; }
    double se() const {
        const double m = mean();
        const double var = std::max(0.0, sumsq.value() / n - m * m);
        return std::sqrt(var / n);
    }
};

double sq(double x) { return x * x; }

}  // namespace

Eigen::VectorXd sample_sphere(int n, std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("sample_sphere: n >= 1");
    std::normal_distribution<double> gauss;
    Eigen::VectorXd u(n);
    for (;;) {
        for (int i = 0; i < n; ++i) u(i) = gauss(rng);
        const double norm = u.norm();
        if (norm > 0.0) return u / norm;
    }
}

Eigen::VectorXd sample_vmf_e1(int n, double kappa, std::mt19937_64& rng) {
    if (n < 2) throw std::invalid_argument("sample_vmf_e1: n >= 2");
    if (kappa < 0.0) throw std::invalid_argument("sample_vmf_e1: kappa >= 0");
    // Wood's rejection sampler for the first coordinate t
    const double dim = n - 1.0;
    const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dim * dim)) / dim;
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + dim * std::log(1.0 - x0 * x0);
    std::gamma_distribution<double> gamma(dim / 2.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double t = 0.0;
    for (;;) {
        const double g1 = gamma(rng), g2 = gamma(rng);
        const double z = g1 / (g1 + g2);  // Beta((n-1)/2,(n-1)/2)
        const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        if (kappa * w + dim * std::log(1.0 - x0 * w) - c >= std::log(unif(rng))) {
            t = w;
            break;
        }
    }
    Eigen::VectorXd u(n);
    u(0) = t;
    if (n > 1) {
        const Eigen::VectorXd tang = sample_sphere(n - 1, rng);
        u.tail(n - 1) = std::sqrt(std::max(0.0, 1.0 - t * t)) * tang;
    }
    return u;
}

namespace {

double log_cosh(double x) {
    x = std::abs(x);
    return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

}  // namespace

double log_vmf_mixture_norm(int n, double kappa) {
    if (n < 2) throw std::invalid_argument("vmf_mixture_norm: n >= 2");
    // E[cosh(kappa t)] = e^kappa E[e^{kappa(|t|-1)} (1+e^{-2 kappa |t|})/2],
    // kept in log form so large kappa does not overflow
    const double val = beta_entry_expectation(
        n,
        [&](double v) {
            const double t = std::sqrt(v);
            return std::exp(kappa * (t - 1.0)) *
                   0.5 * (1.0 + std::exp(-2.0 * kappa * t));
        },
        512);
    return kappa + std::log(val);
}

double vmf_mixture_norm(int n, double kappa) {
    return std::exp(log_vmf_mixture_norm(n, kappa));
}

AngularEstimate hciz_mc(std::span<const double> d, std::span<const double> dp,
                        double theta, std::size_t n_samples, std::mt19937_64& rng) {
    if (d.size() != dp.size() || d.empty())
        throw std::invalid_argument("hciz_mc: eigenvalue lists must match");
    if (!std::isfinite(theta)) throw std::invalid_argument("hciz_mc: theta finite");
    if (n_samples < 1) throw std::invalid_argument("hciz_mc: n_samples >= 1");
    const int n = static_cast<int>(d.size());
    MeanVar acc;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const Eigen::MatrixXd O = sample_haar_orthogonal(n, rng);
        double tr = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) tr += d[i] * dp[j] * sq(O(i, j));
        acc.add(std::exp(theta * tr));
    }
    return AngularEstimate{acc.mean(), acc.se(), n_samples};
}

double hciz_o2_quadrature(std::span<const double> d, std::span<const double> dp,
                          double theta, std::size_t n_nodes) {
    if (d.size() != 2 || dp.size() != 2)
        throw std::invalid_argument("hciz_o2_quadrature: N = 2 only");
    const auto rule = gauss_legendre(n_nodes);
    // integrand is identical on the rotation and reflection components
    return gl_integrate(
               [&](double phi) {
                   const double c2 = sq(std::cos(phi)), s2 = sq(std::sin(phi));
                   const double tr = d[0] * (dp[0] * c2 + dp[1] * s2) +
                                     d[1] * (dp[0] * s2 + dp[1] * c2);
                   return std::exp(theta * tr);
               },
               0.0, 2.0 * M_PI, rule) /
           (2.0 * M_PI);
}

AngularEstimate morozov_moment_mc(int i, int j, std::span<const double> u,
                                  std::span<const double> up, double coef,
                                  std::size_t n_samples, std::mt19937_64& rng) {
    const int n = static_cast<int>(u.size());
    if (up.size() != u.size() || n < 1)
        throw std::invalid_argument("morozov_moment_mc: vector sizes must match");
    if (i < 0 || j < 0 || i >= n || j >= n)
        throw std::invalid_argument("morozov_moment_mc: index out of range");
    if (n_samples < 1)
        throw std::invalid_argument("morozov_moment_mc: n_samples >= 1");
    MeanVar acc;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const Eigen::MatrixXd O = sample_haar_orthogonal(n, rng);
        double expo = 0.0;
        for (int k = 0; k < n; ++k)
            for (int kp = 0; kp < n; ++kp) expo += u[k] * up[kp] * sq(O(k, kp));
        acc.add(sq(O(i, j)) * std::exp(coef * expo));
    }
    return AngularEstimate{acc.mean(), acc.se(), n_samples};
}

namespace {

// (1+c)-scaled pairwise coefficients of the k-point exponent
std::vector<std::vector<double>> kpoint_coefficients(
    const std::vector<std::vector<double>>& points, const KernelSpec& kernel,
    const IsotropyParams& params) {
    const std::size_t k = points.size();
    std::vector<std::vector<double>> s2(k, std::vector<double>(k, 0.0));
    for (std::size_t r = 0; r < k; ++r) {
        if (static_cast<int>(points[r].size()) != kernel.d)
            throw std::invalid_argument("kpoint: point dimension mismatch");
        for (std::size_t l = r + 1; l < k; ++l) {
            std::vector<double> diff(kernel.d);
            for (int a = 0; a < kernel.d; ++a)
                diff[a] = points[r][a] - points[l][a];
            const auto val = ln_plus_kernel(diff, kernel);
            if (!val)
                throw std::invalid_argument("kpoint: coincident points");
            s2[r][l] = (1.0 + params.c) * *val;
            s2[l][r] = s2[r][l];
        }
    }
    return s2;
}

}  // namespace

AngularEstimate kpoint_trace_mc(const std::vector<std::vector<double>>& points,
                                const KernelSpec& kernel,
                                const IsotropyParams& params,
                                std::span<const int> j_indices,
                                std::size_t n_samples, std::mt19937_64& rng,
                                const KPointOptions& opts) {
    params.validate();
    kernel.validate();
    const std::size_t k = points.size();
    if (k < 2) throw std::invalid_argument("kpoint: k >= 2");
    if (j_indices.size() != k)
        throw std::invalid_argument("kpoint: need one column index per point");
    for (int j : j_indices)
        if (j < 0 || j >= params.N)
            throw std::invalid_argument("kpoint: column index out of range");
    if (n_samples < 1) throw std::invalid_argument("kpoint: n_samples >= 1");
    const int n = params.N;
    const auto s2 = kpoint_coefficients(points, kernel, params);

    double kappa = opts.kappa;
    if (opts.importance && kappa <= 0.0) {
        double mean_row = 0.0;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t l = 0; l < k; ++l) mean_row += s2[r][l];
        kappa = std::max(1.0, mean_row / k);
    }
    const double log_mix_norm =
        opts.importance ? log_vmf_mixture_norm(n, kappa) : 0.0;

    std::vector<Eigen::VectorXd> u(k);
    std::uniform_int_distribution<int> coin(0, 1);
    MeanVar acc;
    CompensatedSum wsum, wsumsq;
    for (std::size_t s = 0; s < n_samples; ++s) {
        double log_w = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            if (opts.importance) {
                u[r] = sample_vmf_e1(n, kappa, rng);
                if (coin(rng)) u[r] = -u[r];
                log_w += log_mix_norm - log_cosh(kappa * u[r](0));
            } else {
                u[r] = sample_sphere(n, rng);
            }
        }
        double prefactor = 1.0;
        double expo = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            prefactor *= u[r].dot(u[(r + 1) % k]);
            for (std::size_t l = r + 1; l < k; ++l)
                expo += s2[r][l] * sq(u[r].dot(u[l]));
        }
        const double w = opts.importance ? std::exp(log_w) : 1.0;
        acc.add(w * prefactor * std::exp(expo));
        if (opts.importance) {
            wsum.add(w);
            wsumsq.add(w * w);
        }
    }
    AngularEstimate out{acc.mean(), acc.se(), n_samples};
    if (opts.importance) {
        out.ess = sq(wsum.value()) / std::max(wsumsq.value(), 1e-300);
        out.ess_flagged = out.ess < 100.0;
    }
    return out;
}

AngularEstimate kpoint_trace_sum_mc(const std::vector<std::vector<double>>& points,
                                    const KernelSpec& kernel,
                                    const IsotropyParams& params, int k,
                                    std::size_t n_samples, std::mt19937_64& rng,
                                    const KPointOptions& opts) {
    if (k < 2) throw std::invalid_argument("kpoint sum: k >= 2");
    if (points.size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("kpoint sum: point count must equal k");
    // The fixed-tuple expectation is tuple-independent (a Haar column is
    // uniform on the sphere whatever its index), so the full tuple sum is
    // exactly N^k times one estimate.
    std::vector<int> tuple(k, 0);
    AngularEstimate est =
        kpoint_trace_mc(points, kernel, params, tuple, n_samples, rng, opts);
    const double factor = std::pow(static_cast<double>(params.N), k);
    est.value *= factor;
    est.std_error *= factor;
    return est;
}

}  // namespace mgmc
