#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>

namespace mgmc {

// Law of an isotropic symmetric Gaussian N x N matrix: diagonal covariance
// (1+c) sigma2 I_N - c sigma2 P_N, off-diagonals independent with variance
// sigma2 (1+c)/2. N = 1 is admitted (with c = 0) as the scalar degeneration
// used by the reduction oracles.
struct IsotropyParams {
    int N = 2;
    double c = 0.0;
    double sigma2 = 1.0;

    void validate() const {
        if (N < 1) throw std::invalid_argument("isotropy: N >= 1");
        if (N == 1 && c != 0.0)
            throw std::invalid_argument("isotropy: N = 1 requires c = 0");
        if (sigma2 < 0.0) throw std::invalid_argument("isotropy: sigma2 >= 0");
        if (N >= 2 && !(c > -1.0 && c <= 1.0 / (N - 1)))
            throw std::invalid_argument("isotropy: need c in ]-1, 1/(N-1)]");
    }
    bool at_trace_free_boundary() const { return N >= 2 && c == 1.0 / (N - 1); }
    // alpha = c / (2 (1+c) (1 + c(1-N)))
    double alpha() const {
        if (at_trace_free_boundary())
            throw std::invalid_argument("alpha undefined at the trace-free boundary");
        return c / (2.0 * (1.0 + c) * (1.0 + c * (1.0 - N)));
    }
};

struct DiagCovariance {
    Eigen::MatrixXd A;     // (1+c) sigma2 I - c sigma2 P
    Eigen::MatrixXd Ainv;  // closed-form inverse; singular at c = 1/(N-1)
};

DiagCovariance diag_covariance(const IsotropyParams& params);

// B with B B^T = A, in the projector form
//   B = sqrt(1+c(1-N)) sigma P/N + sqrt(1+c) sigma (I - P/N),
// exact at the trace-free boundary (zero weight on the all-ones direction).
Eigen::MatrixXd diag_sqrt_factor(const IsotropyParams& params);

Eigen::MatrixXd sample_isotropic(const IsotropyParams& params, std::mt19937_64& rng);

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// R-diagonal sign fix that makes the factorization unique.
Eigen::MatrixXd sample_haar_orthogonal(int n, std::mt19937_64& rng);

// Beta(1/2,(N-1)/2) density of a squared Haar-column entry.
double haar_entry_sq_density(int n, double v);

// E[f(v)] with v ~ Beta(1/2,(N-1)/2), by deterministic quadrature
// (theta substitution, smooth integrand for every N >= 2).
double beta_entry_expectation(int n, const std::function<double(double)>& f,
                              std::size_t n_nodes = 256);

// Log of the unordered-eigenvalue density, normalization included.
double eigenvalue_log_density(std::span<const double> lambdas,
                              const IsotropyParams& params);

// log Zbar_N = log of N! (2 pi)^{N/2} prod Gamma(k/2)/Gamma(1/2)
//              * sigma^{N(N+1)/2} (1+c)^{(N-1)(N+2)/4} sqrt(1+c(1-N))
double log_zbar(const IsotropyParams& params);

// e^M by symmetric eigendecomposition.
Eigen::MatrixXd matrix_exp_symmetric(const Eigen::MatrixXd& M);

// log(tr e^M), accumulated in log-sum-exp form so large spectra do not
// overflow.
double log_trace_exp_symmetric(const Eigen::MatrixXd& M);

}  // namespace mgmc
