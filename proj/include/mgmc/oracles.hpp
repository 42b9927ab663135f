#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mgmc/chaos.hpp"
#include "mgmc/field.hpp"
#include "mgmc/kernel.hpp"
#include "mgmc/rmt.hpp"

namespace mgmc {

// ---------------------------------------------------------------------------
// Gaussian-Vandermonde integrals

struct GaussVandermondeParams {
    int N = 2;
    double c = 0.0;
    double alpha = 0.0;

    void validate() const {
        if (N < 1) throw std::invalid_argument("gauss-vandermonde: N >= 1");
        if (!(c > -1.0)) throw std::invalid_argument("gauss-vandermonde: c > -1");
        if (!(1.0 + 2.0 * alpha * (1.0 + c) * N > 0.0))
            throw std::invalid_argument(
                "gauss-vandermonde: need 1 + 2 alpha (1+c) N > 0 for convergence");
    }
};

// Closed form of
//   int exp(-alpha (sum l)^2 - sum l^2 / (2(1+c))) prod_{i<j} |l_j - l_i| dl
//   = N! (2 pi)^{N/2} (prod_{k=1}^N Gamma(k/2)/Gamma(1/2))
//     (1+c)^{N(N+1)/4} / sqrt(1 + 2 alpha (1+c) N).
double integral_full_vandermonde(const GaussVandermondeParams& params);

// Same Gaussian weight against prod_{2<=i<j} |l_j - l_i| (first coordinate
// excluded from the Vandermonde):
//   sqrt(1+c) (N-1)! (2 pi)^{N/2} (prod_{k=1}^{N-1} Gamma(k/2)/Gamma(1/2))
//   (1+c)^{N(N-1)/4} / sqrt(1 + 2 alpha (1+c) N).
double integral_reduced_vandermonde(const GaussVandermondeParams& params);

// Independent validators for the closed forms: tensor Gauss-Legendre
// quadrature (N <= 3) and importance-sampled MC with the quadratic part as
// proposal and the Vandermonde as weight. Proposal covariance is inflated 2x
// when alpha sits near the convergence boundary.
double vandermonde_integral_quadrature(const GaussVandermondeParams& params,
                                       bool reduced,
                                       std::size_t nodes_per_dim = 96);
struct McValue {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
};
McValue vandermonde_integral_mc(const GaussVandermondeParams& params, bool reduced,
                                std::size_t n_samples, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Laplace-method checks for the renormalization constant

// Exact-shift importance-sampled MC of the eigenvalue representation
//   c_eps = (1/Zbar) int e^{sigma_eps u_1} e^{-alpha (sum u)^2 - sum u^2/(2(1+c))}
//           |Delta(u)| du
// (unit sigma_d), with the quadratic part as proposal centered so that the
// Gaussian factors cancel exactly; the Vandermonde is the only weight.
RenormEstimate renorm_eigenrep_is(int N, double c, double sigma_eps2,
                                  std::size_t n_samples, std::mt19937_64& rng);

struct LaplaceRow {
    double sigma_eps2 = 0.0;
    double estimate = 0.0;  // importance-sampled eigenvalue-representation MC
    double std_error = 0.0;
    double naive_estimate = 0.0;  // plain tr(e^X)/N mean; NaN when skipped
    double naive_std_error = 0.0;
    double asymptotic = 0.0;
    double ratio = 0.0;  // estimate / asymptotic
};

// For each sigma_eps^2 in the increasing grid: MC of the eigenvalue
// representation vs. the Laplace asymptotic. The naive estimator is run
// alongside where its relative error is tractable (sigma_eps2 <= 9).
std::vector<LaplaceRow> laplace_cep_check(int N, double c,
                                          std::span<const double> sigma_eps2_grid,
                                          std::size_t n_samples,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// scalar GMC reduction oracle

// Deliberately separate minimal scalar lognormal cell sum: factorizes the
// Gram matrix itself, draws the replica's noise from stream
// (seed, replica, 0), and returns sum exp(g_i - sigma_eps^2/2) * spacing^d
// over the region. Used to pin the N = 1 matrix pipeline.
double scalar_gmc_oracle(const CutoffKernel& kernel, const LatticeSpec& lattice,
                         const BallRegion& region, std::uint64_t seed,
                         std::uint64_t replica);

// ---------------------------------------------------------------------------
// conjecture probe (experimental; never acceptance-gated)

struct ProbeRow {
    double q = 0.0;
    double ell = 0.0;
    double heuristic = 0.0;  // ell^{dq} N C(q sigma_ell) / C(sigma_ell)^q
    double predicted = 0.0;  // ell^{zeta(q)} (ln 1/ell)^{(q-1)(1-N)/2}
    double ratio = 0.0;
};

struct ProbeFit {
    double q = 0.0;
    double fitted_exponent = 0.0;  // slope of ln(heuristic/ell^zeta) vs ln ln(1/ell)
    double fitted_se = 0.0;
    double predicted_exponent = 0.0;  // (q-1)(1-N)/2
};

struct ProbeTable {
    std::vector<ProbeRow> rows;
    std::vector<ProbeFit> fits;
    std::string label = "experimental";
};

ProbeTable conjecture_probe(const IsotropyParams& params, double gamma2, int d,
                            std::span<const double> q_grid,
                            std::span<const double> ell_grid,
                            std::size_t n_samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// validation suite

struct OracleCheck {
    std::string name;
    double closed_form = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
    std::string method;
    bool passed = false;
};

std::vector<OracleCheck> run_validation_suite(std::uint64_t seed);
std::string oracle_report_json(const std::vector<OracleCheck>& checks,
                               std::uint64_t seed);

}  // namespace mgmc
