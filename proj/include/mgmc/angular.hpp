#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mgmc/kernel.hpp"
#include "mgmc/rmt.hpp"

namespace mgmc {

struct AngularEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    double ess = -1.0;        // effective sample size; -1 when not importance-sampled
    bool ess_flagged = false;  // set when importance sampling has ESS < 100
};

// Haar-MC estimate of \int exp(theta tr(D O D' O^T)) dO over the orthogonal
// group, D = diag(d), D' = diag(dp).
AngularEstimate hciz_mc(std::span<const double> d, std::span<const double> dp,
                        double theta, std::size_t n_samples, std::mt19937_64& rng);

// Deterministic N = 2 oracle: O(2) splits into rotations and reflections with
// equal Haar weight, and the integrand takes the same value on both
// components, so a single angle integral suffices.
double hciz_o2_quadrature(std::span<const double> d, std::span<const double> dp,
                          double theta, std::size_t n_nodes = 512);

// Haar-MC estimate of \int |O_{i,j}|^2 exp(coef sum_{k,k'} u_k u'_{k'}
// |O_{k,k'}|^2) dO. Indices are 0-based.
AngularEstimate morozov_moment_mc(int i, int j, std::span<const double> u,
                                  std::span<const double> up, double coef,
                                  std::size_t n_samples, std::mt19937_64& rng);

struct KPointOptions {
    bool importance = false;  // bias toward the aligned configuration
    double kappa = 0.0;       // concentration; 0 picks a default from the coefficients
};

// MC estimate of the k-point trace integrand for a fixed column tuple
// (j_1..j_k):
//   E[ prod_r (tO^{(r)} O^{(r+1)})_{j_r, j_{r+1}}
//      * exp((1+c) sum_{r<l} sigma2_{rl} (tO^{(r)} O^{(l)})^2_{j_r, j_l}) ]
// with sigma2_{rl} the bare kernel at distance |x_r - x_l| (the eps -> 0
// endpoint). The integrand involves only column j_r of each Haar matrix, and
// a Haar column is uniform on the sphere, so the estimator samples k unit
// vectors. In importance mode each vector is drawn from a symmetric
// von Mises-Fisher mixture around +-e_1 with exact reweighting.
AngularEstimate kpoint_trace_mc(const std::vector<std::vector<double>>& points,
                                const KernelSpec& kernel,
                                const IsotropyParams& params,
                                std::span<const int> j_indices,
                                std::size_t n_samples, std::mt19937_64& rng,
                                const KPointOptions& opts = {});

// Sum over all N^k column tuples. The single-tuple law does not depend on
// the tuple, so this is exactly N^k times the fixed-tuple estimate.
AngularEstimate kpoint_trace_sum_mc(const std::vector<std::vector<double>>& points,
                                    const KernelSpec& kernel,
                                    const IsotropyParams& params, int k,
                                    std::size_t n_samples, std::mt19937_64& rng,
                                    const KPointOptions& opts = {});

// Uniform unit vector on S^{n-1}.
Eigen::VectorXd sample_sphere(int n, std::mt19937_64& rng);

// von Mises-Fisher sample on S^{n-1} with mean direction e_1 (Wood's
// rejection algorithm for the first coordinate).
Eigen::VectorXd sample_vmf_e1(int n, double kappa, std::mt19937_64& rng);

// E[cosh(kappa t)] for t the first coordinate of a uniform unit vector;
// normalization of the +-e_1 vMF mixture weight.
double vmf_mixture_norm(int n, double kappa);
double log_vmf_mixture_norm(int n, double kappa);

}  // namespace mgmc
