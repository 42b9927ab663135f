#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mgmc {

struct GaussLegendre {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Nodes/weights by Newton iteration on the Legendre recurrence.
GaussLegendre gauss_legendre(std::size_t n);

// Integrate f over [a, b] with an n-node rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    const GaussLegendre& rule);

// Integrate f over (0, b] where f may have an integrable power/log
// singularity at 0: dyadic panels [b 2^{-j-1}, b 2^{-j}], Gauss-Legendre on
// each, refined until the tail panel contributes less than rel_tol.
double integrate_singular_at_zero(const std::function<double(double)>& f,
                                  double b, double rel_tol = 1e-12,
                                  std::size_t nodes_per_panel = 32,
                                  std::size_t max_panels = 200);

// Integrate f over [a, b], doubling the node count until two successive
// estimates agree to rel_tol.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol = 1e-10,
                          std::size_t max_nodes = 1 << 14);

inline double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    double m = xs[0];
    for (double x : xs)
        if (x > m) m = x;
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Kahan-compensated accumulator, used where reduction order must not leak
// into reported results.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

// Weighted least squares of y against x (weights ~ 1/variance).
LinearFit weighted_linear_fit(std::span<const double> x,
                              std::span<const double> y,
                              std::span<const double> w);

}  // namespace mgmc
