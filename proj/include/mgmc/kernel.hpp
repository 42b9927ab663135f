#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgmc {

// Parameters of the log-correlated covariance family
//   K(x) = gamma2 * ln_+(L/|x|) + m
// together with the short-distance cutoff epsilon. m is the value of the
// bounded remainder at 0: it is 0 for the d<=2 constructions and the
// sphere-average constant gamma2*C for d>=3.
struct KernelSpec {
    int d = 1;
    double gamma2 = 1.0;
    double L = 1.0;
    double epsilon = 0.0625;
    double m = 0.0;

    void validate() const {
        if (d < 1) throw std::invalid_argument("kernel: d must be >= 1");
        if (gamma2 <= 0.0) throw std::invalid_argument("kernel: gamma2 must be > 0");
        if (L <= 0.0) throw std::invalid_argument("kernel: L must be > 0");
        if (!(epsilon > 0.0 && epsilon < L))
            throw std::invalid_argument("kernel: need 0 < epsilon < L");
    }
    // Subcritical-phase hypothesis for chaos-measure use; kernel evaluation
    // itself permits any gamma2 > 0.
    void validate_for_chaos() const {
        validate();
        if (gamma2 >= static_cast<double>(d))
            throw std::invalid_argument("chaos: need 0 < gamma2 < d");
    }
};

enum class KernelKind {
    Auto,             // per-dimension default construction
    NuIntegral1d,     // (t-|x|)_+ against nu_L, d = 1
    Pasenchenko2d,    // (t-|x|^{1/2})_+ against nu_{L^{1/2}}, d = 2
    SphereAverage,    // sphere average of the 1d cutoff, d >= 3
    NaiveTruncation,  // gamma2 ln_+(L/max(|x|,eps)); not PD in general
};

// The bare kernel gamma2*ln_+(L/|x|) + m; divergent at x = 0, signalled by
// an empty optional.
std::optional<double> ln_plus_kernel(std::span<const double> x, const KernelSpec& spec);

struct SphereEval {
    double value = 0.0;
    double std_error = 0.0;  // 0 for deterministic quadrature
};

// Immutable cutoff-kernel evaluator. Evaluation is pure and isotropic, so it
// can be shared freely between worker threads.
class CutoffKernel {
  public:
    explicit CutoffKernel(KernelSpec spec, KernelKind kind = KernelKind::Auto,
                          int sphere_nodes = 256);

    const KernelSpec& spec() const { return spec_; }
    KernelKind kind() const { return kind_; }

    double at_radius(double r) const;
    double operator()(std::span<const double> x) const;
    // sigma_eps^2 = K_eps(0)
    double at_zero() const { return at_radius(0.0); }

    // Sphere-average value with Monte Carlo nodes instead of the default
    // deterministic rule; reports the standard error.
    SphereEval sphere_value_mc(std::span<const double> x, int n_samples,
                               std::uint64_t seed) const;

    // The constant C = \int_S ln(1/|<e,s>|) sigma(ds) for the d>=3
    // construction (so m = gamma2 * C).
    static double sphere_log_constant(int d, int n_nodes = 512);

  private:
    KernelSpec spec_;
    KernelKind kind_;
    int sphere_nodes_;
    // quadrature for the sphere average, in the theta substitution
    // v = sin^2(theta) of the Beta(1/2,(d-1)/2) entry law
    std::vector<double> theta_nodes_;
    std::vector<double> theta_weights_;

    double cutoff_1d(double r, double eps_cut, double scale) const;
};

struct PdCheck {
    bool passed = false;
    double min_eigenvalue = 0.0;
    std::size_t n_points = 0;
};

// Builds the Gram matrix G_ij = K_eps(x_i - x_j) over the given points and
// reports whether its smallest eigenvalue is >= -tol. Points are flattened
// d-vectors; duplicates are rejected.
PdCheck check_positive_definite(const CutoffKernel& kernel,
                                std::span<const double> points_flat,
                                std::size_t n_points, double tol);

std::string pd_check_json(const PdCheck& check);

}  // namespace mgmc
