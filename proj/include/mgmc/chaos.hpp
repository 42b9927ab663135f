#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "mgmc/field.hpp"
#include "mgmc/kernel.hpp"
#include "mgmc/rmt.hpp"

namespace mgmc {

// ---------------------------------------------------------------------------
// renormalization constant c_eps = E[tr e^X]/N

struct RenormEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double log_value = 0.0;
    std::size_t n_samples = 0;
};

// (1/N) (Gamma(1/2)/Gamma(N/2)) (1+c)^{(N-1)/2} sigma_eps^{N-1} e^{sigma_eps^2/2}.
// N = 1 is admitted as the scalar-consistency plug-in e^{sigma_eps^2/2}.
double renorm_constant_asymptotic(int N, double c, double sigma_eps2);

// Monte Carlo mean of tr(e^X)/N, accumulated in log domain.
RenormEstimate renorm_constant_exact(const IsotropyParams& params,
                                     std::size_t n_samples, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// the chaos measure

struct BallRegion {
    std::vector<double> center;
    double radius = 0.0;
};

struct ChaosMeasure {
    Eigen::MatrixXd value;  // symmetric positive definite
    BallRegion region;
    double c_eps_used = 0.0;
    double epsilon = 0.0;
    LatticeSpec lattice;
    std::size_t n_region_sites = 0;
    // Riemann volume of the discretized region (site count * cell volume);
    // this is the exact mean-normalization target on the lattice.
    double region_volume = 0.0;
};

ChaosMeasure chaos_measure(const MatrixField& field, const BallRegion& region,
                           double c_eps);

// ---------------------------------------------------------------------------
// ensemble moments and structure exponents

struct MomentRow {
    double scale = 0.0;
    int order = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_replicas = 0;
};

struct MomentConfig {
    LatticeSpec lattice;
    KernelSpec kernel;
    IsotropyParams params;          // sigma2 derived from the kernel when 0
    std::vector<double> scales;     // strictly decreasing ball radii
    std::vector<int> orders;        // each k >= 2 needs k < 2d/gamma2; k = 1 allowed
    std::uint64_t seed = 0;
    std::size_t n_replicas = 64;
    int workers = 1;
    double c_eps = 0.0;             // <= 0: estimated by renorm_constant_exact
    std::size_t c_eps_samples = 200000;
    FieldBackend backend = FieldBackend::Auto;
};

struct MomentTable {
    std::vector<MomentRow> rows;
    double c_eps_used = 0.0;
    KernelSpec kernel;
    IsotropyParams params;
    std::uint64_t seed = 0;
};

MomentTable ensemble_moments(const MomentConfig& config);

// Entrywise z-scores of the ensemble mean of M^eps(A) against |A| * I.
struct MeanCheckRow {
    int i = 0, j = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    double z = 0.0;
};
std::vector<MeanCheckRow> mean_identity_check(const MomentConfig& config,
                                              double scale);

struct ZetaRow {
    int order = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double slope_logcorrected = 0.0;
    double theory_zeta = 0.0;
};
// WLS of ln(estimate) against ln(scale); slope_logcorrected regresses
// ln(estimate) + (k-1)(N-1)/2 * ln ln(1/scale) instead.
std::vector<ZetaRow> zeta_fit(const MomentTable& table);

double zeta_theory(int d, double gamma2, int k);

// ---------------------------------------------------------------------------
// Cauchy-in-epsilon diagnostics

struct CauchyConfig {
    LatticeSpec lattice;       // spacing is the synthesis resolution
    KernelSpec kernel;         // epsilon field ignored; overridden per entry
    IsotropyParams params;     // sigma2 derived per epsilon
    BallRegion region;
    std::vector<double> epsilons;  // strictly decreasing, all > lattice spacing
    std::uint64_t seed = 0;
    std::size_t n_replicas = 256;
    std::size_t c_eps_samples = 200000;
    int workers = 1;
};

struct CauchyRow {
    double eps = 0.0;
    double eps_prime = 0.0;
    double estimate = 0.0;   // E[tr((M^eps - M^eps')^2)]
    double std_error = 0.0;
    double cross_term = 0.0;  // E[tr(M^eps M^eps')]
    double diag_eps = 0.0;    // E[tr((M^eps)^2)]
    double diag_eps_prime = 0.0;
};

struct CauchyTable {
    std::vector<CauchyRow> rows;  // consecutive (eps_k, eps_{k+1}) pairs
    // paired per-replica differences d_k - d_{k+1} between consecutive rows
    std::vector<double> step_diff;
    std::vector<double> step_diff_se;
};

// Couples the cutoffs through shared driver noise: each replica draws one
// set of white-noise vectors and pushes it through every epsilon's
// symmetric-sqrt factorization.
CauchyTable cauchy_l2_check(const CauchyConfig& config);

// ---------------------------------------------------------------------------
// two-point theory (eps -> 0 endpoint)

// N^2 e^{-c sigma_r^2} E[v e^{sigma_r^2 (1+c) v}], v ~ Beta(1/2,(N-1)/2),
// with sigma_r^2 = gamma2 ln(L/r) + m for r < L and 0 otherwise.
double pair_correlation(double r, const KernelSpec& kernel,
                        const IsotropyParams& params);

// Small-r equivalent N^2 (Gamma(N/2)/Gamma(1/2)) e^{sigma_r^2}
//                    / ((1+c)^{(N-1)/2} sigma_r^{N-1}).
double pair_correlation_asymptotic(double r, const KernelSpec& kernel,
                                   const IsotropyParams& params);

struct SecondMomentTheory {
    double exact = 0.0;       // \int_{B(0,l)^2} pair_correlation(|x-y|) dx dy
    double asymptotic = 0.0;  // power/log equivalent with the V constant
    double v_constant = 0.0;  // \int_{|u|,|v|<=1} |u-v|^{-gamma2} du dv
};

// d = 1 uses deterministic quadrature throughout; d >= 2 estimates the double
// integral and V by Monte Carlo with the given budget.
SecondMomentTheory second_moment_theory(double ell, const KernelSpec& kernel,
                                        const IsotropyParams& params,
                                        std::size_t mc_samples = 200000,
                                        std::uint64_t mc_seed = 0);

// V constant alone (quadrature for d = 1, MC otherwise).
double pairing_volume_constant(int d, double gamma2,
                               std::size_t mc_samples = 200000,
                               std::uint64_t mc_seed = 0);

}  // namespace mgmc
