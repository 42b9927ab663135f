#include "mgmc/quad.hpp"

#include <algorithm>
#include <cmath>

namespace mgmc {

GaussLegendre gauss_legendre(std::size_t n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    const GaussLegendre& rule) {
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    CompensatedSum acc;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc.add(rule.weights[i] * f(mid + hw * rule.nodes[i]));
    return hw * acc.value();
}

double integrate_singular_at_zero(const std::function<double(double)>& f,
                                  double b, double rel_tol,
                                  std::size_t nodes_per_panel,
                                  std::size_t max_panels) {
    const GaussLegendre rule = gauss_legendre(nodes_per_panel);
    CompensatedSum total;
    double hi = b;
    for (std::size_t j = 0; j < max_panels; ++j) {
        const double lo = hi * 0.5;
        const double part = gl_integrate(f, lo, hi, rule);
        total.add(part);
        hi = lo;
        if (j > 4 && std::abs(part) < rel_tol * std::abs(total.value())) break;
    }
    return total.value();
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, std::size_t max_nodes) {
    double prev = gl_integrate(f, a, b, gauss_legendre(16));
    for (std::size_t n = 32; n <= max_nodes; n *= 2) {
        const double cur = gl_integrate(f, a, b, gauss_legendre(n));
        if (std::abs(cur - prev) <= rel_tol * std::max(1e-300, std::abs(cur)))
            return cur;
        prev = cur;
    }
    return prev;
}

LinearFit weighted_linear_fit(std::span<const double> x,
                              std::span<const double> y,
                              std::span<const double> w) {
    if (x.size() != y.size() || x.size() != w.size() || x.size() < 2)
        throw std::invalid_argument("weighted_linear_fit: bad input sizes");
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
        swxx += w[i] * x[i] * x[i];
        swxy += w[i] * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (det <= 0.0 || !std::isfinite(det))
        throw std::runtime_error("weighted_linear_fit: degenerate design");
    LinearFit fit;
    fit.slope = (sw * swxy - swx * swy) / det;
    fit.intercept = (swxx * swy - swx * swxy) / det;
    fit.slope_se = std::sqrt(sw / det);
    return fit;
}

}  // namespace mgmc
