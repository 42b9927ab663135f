#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mgmc/kernel.hpp"
#include "mgmc/rmt.hpp"

namespace mgmc {

struct LatticeSpec {
    int d = 1;
    int n_per_side = 2;
    double spacing = 1.0;
    std::vector<double> origin;  // corner point; defaults to 0

    void validate() const;
    std::size_t n_sites() const;
    // coordinates of site with flat index idx (row-major over dimensions)
    std::vector<double> site(std::size_t idx) const;
    double cell_volume() const;
};

// Lattice of symmetric N x N matrices. Entries are stored packed,
// site-major, upper triangle row-major.
struct MatrixField {
    LatticeSpec lattice;
    IsotropyParams params;
    KernelSpec kernel;
    std::uint64_t seed = 0;
    std::vector<double> values;

    std::size_t triangle_size() const {
        return static_cast<std::size_t>(params.N) * (params.N + 1) / 2;
    }
    Eigen::MatrixXd matrix_at(std::size_t site) const;
    void set_matrix_at(std::size_t site, const Eigen::MatrixXd& M);
};

enum class FieldBackend { Auto, Dense, Circulant };
enum class FactorizationStyle {
    Cholesky,       // default dense factorization
    SymmetricSqrt,  // PSD square root; used to couple fields across cutoffs
};

// Precomputed synthesizer for the matrix field on a lattice: factorizes the
// spatial Gram matrix once, then draws N(N+1)/2 independent scalar driver
// fields per replica and assembles the matrix entries. Immutable after
// construction; synthesize() is safe to call concurrently.
class FieldSynthesizer {
  public:
    FieldSynthesizer(LatticeSpec lattice, const CutoffKernel& kernel,
                     IsotropyParams params,
                     FieldBackend backend = FieldBackend::Auto,
                     FactorizationStyle style = FactorizationStyle::Cholesky);
    ~FieldSynthesizer();
    FieldSynthesizer(const FieldSynthesizer&) = delete;
    FieldSynthesizer& operator=(const FieldSynthesizer&) = delete;

    MatrixField synthesize(std::uint64_t seed, std::uint64_t replica) const;

    // Driver noise exposed separately so callers can couple several
    // synthesizers (e.g. different cutoffs) on the same white noise.
    std::vector<Eigen::VectorXd> sample_noise(std::uint64_t seed,
                                              std::uint64_t replica) const;
    MatrixField synthesize_with_noise(
        const std::vector<Eigen::VectorXd>& noise) const;
    // Gaussians consumed per scalar driver field.
    std::size_t noise_size() const;

    const LatticeSpec& lattice() const { return lattice_; }
    const IsotropyParams& params() const { return params_; }
    const KernelSpec& kernel_spec() const { return kernel_spec_; }
    FieldBackend backend_used() const { return backend_used_; }
    // set when a non-PD circulant embedding forced the dense fallback
    bool circulant_fallback() const { return circulant_fallback_; }

  private:
    struct CirculantPlan;

    LatticeSpec lattice_;
    KernelSpec kernel_spec_;
    IsotropyParams params_;
    FieldBackend backend_used_ = FieldBackend::Dense;
    bool circulant_fallback_ = false;
    Eigen::MatrixXd factor_;  // dense backend: factor_ * xi has covariance K
    Eigen::MatrixXd entry_mixer_;  // unit-variance diagonal mixer B/sigma
    std::unique_ptr<CirculantPlan> circ_;

    Eigen::VectorXd scalar_field_from_noise(const Eigen::VectorXd& xi) const;
    MatrixField assemble(const std::vector<Eigen::VectorXd>& fields) const;
};

// Streaming second-moment validation of an ensemble against the target
// covariance structure.
struct CovProbe {
    std::size_t site_a = 0, site_b = 0;
    int i1 = 0, j1 = 0, i2 = 0, j2 = 0;
};
struct CovReportRow {
    CovProbe probe;
    double empirical = 0.0;
    double theoretical = 0.0;
    double std_error = 0.0;
    double z = 0.0;
};
std::vector<CovReportRow> empirical_covariance_report(
    const FieldSynthesizer& synth, std::uint64_t seed, std::size_t n_replicas,
    const std::vector<CovProbe>& probes, int workers = 1);

// Binary snapshot (magic "MGMC") plus JSON sidecar at path + ".json".
void write_field_snapshot(const MatrixField& field, const std::string& path);
MatrixField read_field_snapshot(const std::string& path);

}  // namespace mgmc
