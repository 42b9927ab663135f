#include "mgmc/kernel.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "mgmc/quad.hpp"
#include "mgmc/rng.hpp"

namespace mgmc {

namespace {

// \int_{t0}^{T} (t - s)_+ nu_T(dt) with nu_T(dt) = 1_{[0,T]} dt/t^2 + (1/T) delta_T,
// in closed form.
double nu_cutoff_integral(double s, double t0, double T) {
    if (s >= T) return 0.0;
    if (s <= t0) return std::log(T / t0) + 1.0 - s / t0;
    return std::log(T / s);
}

double radius(std::span<const double> x) {
    double s = 0.0;
    for (double c : x) s += c * c;
    return std::sqrt(s);
}

}  // namespace

std::optional<double> ln_plus_kernel(std::span<const double> x, const KernelSpec& spec) {
    const double r = radius(x);
    if (r == 0.0) return std::nullopt;  // divergent at the origin
    if (r >= spec.L) return spec.m;
    return spec.gamma2 * std::log(spec.L / r) + spec.m;
}

CutoffKernel::CutoffKernel(KernelSpec spec, KernelKind kind, int sphere_nodes)
    : spec_(spec), kind_(kind), sphere_nodes_(sphere_nodes) {
    spec_.validate();
    if (kind_ == KernelKind::Auto) {
        kind_ = spec_.d == 1   ? KernelKind::NuIntegral1d
                : spec_.d == 2 ? KernelKind::Pasenchenko2d
                               : KernelKind::SphereAverage;
    }
    switch (kind_) {
        case KernelKind::NuIntegral1d:
            if (spec_.d != 1) throw std::invalid_argument("nu-integral kernel requires d = 1");
            if (spec_.m != 0.0) throw std::invalid_argument("d = 1 construction has m = 0");
            break;
        case KernelKind::Pasenchenko2d:
            if (spec_.d != 2) throw std::invalid_argument("Pasenchenko kernel requires d = 2");
            if (spec_.m != 0.0) throw std::invalid_argument("d = 2 construction has m = 0");
            break;
        case KernelKind::SphereAverage: {
            if (spec_.d < 3) throw std::invalid_argument("sphere-average kernel requires d >= 3");
            // Beta(1/2,(d-1)/2) expectation as a theta integral,
            // v = sin^2(theta): nodes store v, weights sum to 1.
            const auto rule = gauss_legendre(static_cast<std::size_t>(sphere_nodes_));
            const double cb = std::exp(std::lgamma(spec_.d / 2.0) - std::lgamma(0.5) -
                                       std::lgamma((spec_.d - 1) / 2.0));
            theta_nodes_.reserve(rule.nodes.size());
            theta_weights_.reserve(rule.nodes.size());
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double th = (rule.nodes[i] + 1.0) * (M_PI / 4.0);
                const double s = std::sin(th);
                theta_nodes_.push_back(s * s);
                theta_weights_.push_back(2.0 * cb * (M_PI / 4.0) * rule.weights[i] *
                                         std::pow(std::cos(th), spec_.d - 2));
            }
            break;
        }
        case KernelKind::NaiveTruncation:
            break;
        case KernelKind::Auto:
            break;
    }
}

double CutoffKernel::at_radius(double r) const {
    r = std::abs(r);
    const double g2 = spec_.gamma2;
    switch (kind_) {
        case KernelKind::NuIntegral1d:
            return g2 * nu_cutoff_integral(r, spec_.epsilon, spec_.L);
        case KernelKind::Pasenchenko2d:
            // Lower cutoff sqrt(e*eps) so that K_eps(0) = gamma2(ln(L/eps)+1);
            // the exact log match then holds for |x| >= e*eps.
            return 2.0 * g2 *
                   nu_cutoff_integral(std::sqrt(r), std::sqrt(M_E * spec_.epsilon),
                                      std::sqrt(spec_.L));
        case KernelKind::SphereAverage: {
            CompensatedSum acc;
            for (std::size_t i = 0; i < theta_nodes_.size(); ++i)
                acc.add(theta_weights_[i] *
                        nu_cutoff_integral(r * std::sqrt(theta_nodes_[i]), spec_.epsilon,
                                           spec_.L));
            return g2 * acc.value();
        }
        case KernelKind::NaiveTruncation: {
            const double rc = std::max(r, spec_.epsilon);
            return rc >= spec_.L ? 0.0 : g2 * std::log(spec_.L / rc);
        }
        case KernelKind::Auto:
            break;
    }
    throw std::logic_error("unreachable kernel kind");
}

double CutoffKernel::operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != spec_.d)
        throw std::invalid_argument("kernel: point dimension mismatch");
    return at_radius(radius(x));
}

SphereEval CutoffKernel::sphere_value_mc(std::span<const double> x, int n_samples,
                                         std::uint64_t seed) const {
    if (kind_ != KernelKind::SphereAverage)
        throw std::invalid_argument("sphere_value_mc: not a sphere-average kernel");
    if (n_samples < 1) throw std::invalid_argument("sphere_value_mc: n_samples >= 1");
    const double r = radius(x);
    auto rng = make_stream(seed);
    std::normal_distribution<double> gauss;
    CompensatedSum sum, sumsq;
    for (int i = 0; i < n_samples; ++i) {
        double z1 = gauss(rng), norm2 = z1 * z1;
        for (int k = 1; k < spec_.d; ++k) {
            const double z = gauss(rng);
            norm2 += z * z;
        }
        const double v = z1 * z1 / norm2;
        const double val =
            spec_.gamma2 * nu_cutoff_integral(r * std::sqrt(v), spec_.epsilon, spec_.L);
        sum.add(val);
        sumsq.add(val * val);
    }
    SphereEval out;
    out.value = sum.value() / n_samples;
    const double var =
        std::max(0.0, sumsq.value() / n_samples - out.value * out.value);
    out.std_error = std::sqrt(var / n_samples);
    return out;
}

double CutoffKernel::sphere_log_constant(int d, int n_nodes) {
    if (d < 3) throw std::invalid_argument("sphere_log_constant: d >= 3");
    // C = E[-(1/2) ln v], v ~ Beta(1/2,(d-1)/2); theta substitution gives
    // -E[ln sin(theta)] against the cos^{d-2} weight.
    const double cb =
        std::exp(std::lgamma(d / 2.0) - std::lgamma(0.5) - std::lgamma((d - 1) / 2.0));
    // -ln sin(theta) has a log singularity at 0; integrate with dyadic
    // refinement toward the endpoint instead of a single global rule.
    const double integral = integrate_singular_at_zero(
        [d](double th) {
            return std::pow(std::cos(th), d - 2) * (-std::log(std::sin(th)));
        },
        M_PI / 2.0, 1e-13, static_cast<std::size_t>(n_nodes));
    return 2.0 * cb * integral;
}

PdCheck check_positive_definite(const CutoffKernel& kernel,
                                std::span<const double> points_flat,
                                std::size_t n_points, double tol) {
    const int d = kernel.spec().d;
    if (points_flat.size() != n_points * static_cast<std::size_t>(d))
        throw std::invalid_argument("check_positive_definite: bad point array size");
    Eigen::MatrixXd gram(n_points, n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        for (std::size_t j = i; j < n_points; ++j) {
            double dist2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = points_flat[i * d + k] - points_flat[j * d + k];
                dist2 += diff * diff;
            }
            if (i != j && dist2 == 0.0)
                throw std::invalid_argument("check_positive_definite: duplicate points");
            const double val = kernel.at_radius(std::sqrt(dist2));
            gram(i, j) = val;
            gram(j, i) = val;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram,
                                                          Eigen::EigenvaluesOnly);
    PdCheck out;
    out.min_eigenvalue = solver.eigenvalues().minCoeff();
    out.n_points = n_points;
    out.passed = out.min_eigenvalue >= -tol;
    return out;
}

std::string pd_check_json(const PdCheck& check) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"min_eigenvalue\": " << check.min_eigenvalue
       << ", \"n_points\": " << check.n_points
       << ", \"passed\": " << (check.passed ? "true" : "false") << "}";
    return os.str();
}

}  // namespace mgmc
