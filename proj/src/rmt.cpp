#include "mgmc/rmt.hpp"

#include <cmath>

#include "mgmc/quad.hpp"

namespace mgmc {

DiagCovariance diag_covariance(const IsotropyParams& params) {
    params.validate();
    const int n = params.N;
    const double c = params.c, s2 = params.sigma2;
    DiagCovariance out;
    out.A = (1.0 + c) * s2 * Eigen::MatrixXd::Identity(n, n) -
            c * s2 * Eigen::MatrixXd::Ones(n, n);
    if (params.at_trace_free_boundary())
        throw std::invalid_argument(
            "diag_covariance: A is singular at the trace-free boundary c = 1/(N-1)");
    // A^{-1} = 1/(s2(1+c)) I + c/(s2(1+c)(1+c(1-N))) P
    out.Ainv = Eigen::MatrixXd::Identity(n, n) / (s2 * (1.0 + c)) +
               Eigen::MatrixXd::Ones(n, n) * c /
                   (s2 * (1.0 + c) * (1.0 + c * (1.0 - n)));
    return out;
}

Eigen::MatrixXd diag_sqrt_factor(const IsotropyParams& params) {
    params.validate();
    const int n = params.N;
    const double sigma = std::sqrt(params.sigma2);
    const double w_ones = std::sqrt(std::max(0.0, 1.0 + params.c * (1.0 - n)));
    const double w_perp = std::sqrt(1.0 + params.c);
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Ones(n, n) / n;
    return sigma * (w_ones * proj +
                    w_perp * (Eigen::MatrixXd::Identity(n, n) - proj));
}

Eigen::MatrixXd sample_isotropic(const IsotropyParams& params, std::mt19937_64& rng) {
    params.validate();
    const int n = params.N;
    std::normal_distribution<double> gauss;
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = gauss(rng);
    const Eigen::VectorXd diag = diag_sqrt_factor(params) * g;
    Eigen::MatrixXd X(n, n);
    X.diagonal() = diag;
    const double off_sd = std::sqrt(params.sigma2 * (1.0 + params.c) / 2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = off_sd * gauss(rng);
            X(i, j) = v;
            X(j, i) = v;
        }
    return X;
}

Eigen::MatrixXd sample_haar_orthogonal(int n, std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("sample_haar_orthogonal: n >= 1");
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd G(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) G(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    return Q;
}

double haar_entry_sq_density(int n, double v) {
    if (n < 2) throw std::invalid_argument("haar_entry_sq_density: n >= 2");
    if (!(v > 0.0 && v < 1.0))
        throw std::invalid_argument("haar_entry_sq_density: v in (0,1)");
    const double lognorm =
        std::lgamma(n / 2.0) - std::lgamma(0.5) - std::lgamma((n - 1) / 2.0);
    return std::exp(lognorm - 0.5 * std::log(v) +
                    ((n - 3) / 2.0) * std::log1p(-v));
}

double beta_entry_expectation(int n, const std::function<double(double)>& f,
                              std::size_t n_nodes) {
    if (n < 2) throw std::invalid_argument("beta_entry_expectation: n >= 2");
    const double cb =
        std::exp(std::lgamma(n / 2.0) - std::lgamma(0.5) - std::lgamma((n - 1) / 2.0));
    const auto rule = gauss_legendre(n_nodes);
    CompensatedSum acc;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double th = (rule.nodes[i] + 1.0) * (M_PI / 4.0);
        const double s = std::sin(th);
        acc.add(2.0 * cb * (M_PI / 4.0) * rule.weights[i] *
                std::pow(std::cos(th), n - 2) * f(s * s));
    }
    return acc.value();
}

double log_zbar(const IsotropyParams& params) {
    params.validate();
    if (params.at_trace_free_boundary())
        throw std::invalid_argument("log_zbar: degenerate at c = 1/(N-1)");
    const int n = params.N;
    const double c = params.c;
    double lg = std::lgamma(n + 1.0) + 0.5 * n * std::log(2.0 * M_PI);
    for (int k = 1; k <= n; ++k) lg += std::lgamma(k / 2.0) - std::lgamma(0.5);
    lg += 0.25 * n * (n + 1.0) * std::log(params.sigma2);
    lg += 0.25 * (n - 1.0) * (n + 2.0) * std::log1p(c);
    lg += 0.5 * std::log(1.0 + c * (1.0 - n));
    return lg;
}

double eigenvalue_log_density(std::span<const double> lambdas,
                              const IsotropyParams& params) {
    params.validate();
    const int n = params.N;
    if (static_cast<int>(lambdas.size()) != n)
        throw std::invalid_argument("eigenvalue_log_density: wrong eigenvalue count");
    double sum = 0.0, sumsq = 0.0;
    for (double l : lambdas) {
        sum += l;
        sumsq += l * l;
    }
    const double alpha_density = (n >= 2 ? params.alpha() / params.sigma2 : 0.0);
    double logv = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double diff = std::abs(lambdas[j] - lambdas[i]);
            if (diff == 0.0) return -std::numeric_limits<double>::infinity();
            logv += std::log(diff);
        }
    return -alpha_density * sum * sum -
           sumsq / (2.0 * params.sigma2 * (1.0 + params.c)) + logv -
           log_zbar(params);
}

Eigen::MatrixXd matrix_exp_symmetric(const Eigen::MatrixXd& M) {
    if (!M.allFinite())
        throw std::invalid_argument("matrix_exp_symmetric: non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("matrix_exp_symmetric: eigendecomposition failed");
    return solver.eigenvectors() *
           solver.eigenvalues().array().exp().matrix().asDiagonal() *
           solver.eigenvectors().transpose();
}

double log_trace_exp_symmetric(const Eigen::MatrixXd& M) {
    if (!M.allFinite())
        throw std::invalid_argument("log_trace_exp_symmetric: non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("log_trace_exp_symmetric: eigendecomposition failed");
    const Eigen::VectorXd& ev = solver.eigenvalues();
    return log_sum_exp(std::span<const double>(ev.data(), ev.size()));
}

}  // namespace mgmc
