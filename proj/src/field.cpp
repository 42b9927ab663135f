#include "mgmc/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "mgmc/quad.hpp"
#include "mgmc/rng.hpp"

namespace mgmc {

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace {
constexpr double kJitterRel = 1e-10;  // relative diagonal jitter for LLT
constexpr std::uint32_t kSnapshotVersion = 1;
}  // namespace

void LatticeSpec::validate() const {
    if (d < 1 || d > 3) throw std::invalid_argument("lattice: d in {1,2,3}");
    if (n_per_side < 1) throw std::invalid_argument("lattice: n_per_side >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("lattice: spacing > 0");
    if (!origin.empty() && static_cast<int>(origin.size()) != d)
        throw std::invalid_argument("lattice: origin dimension mismatch");
}

std::size_t LatticeSpec::n_sites() const {
    std::size_t n = 1;
    for (int k = 0; k < d; ++k) n *= static_cast<std::size_t>(n_per_side);
    return n;
}

std::vector<double> LatticeSpec::site(std::size_t idx) const {
    std::vector<double> x(d, 0.0);
    for (int k = d - 1; k >= 0; --k) {
        x[k] = spacing * static_cast<double>(idx % n_per_side);
        idx /= n_per_side;
    }
    if (!origin.empty())
        for (int k = 0; k < d; ++k) x[k] += origin[k];
    return x;
}

double LatticeSpec::cell_volume() const { return std::pow(spacing, d); }

Eigen::MatrixXd MatrixField::matrix_at(std::size_t site) const {
    const int n = params.N;
    Eigen::MatrixXd M(n, n);
    std::size_t p = site * triangle_size();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            M(i, j) = values[p];
            M(j, i) = values[p];
            ++p;
        }
    return M;
}

void MatrixField::set_matrix_at(std::size_t site, const Eigen::MatrixXd& M) {
    const int n = params.N;
    std::size_t p = site * triangle_size();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) values[p++] = M(i, j);
}

// ---------------------------------------------------------------------------
// circulant embedding (d <= 2)

struct FieldSynthesizer::CirculantPlan {
    int m_side = 0;          // embedding side length
    std::size_t m_total = 0;  // total embedding size
    std::vector<double> sqrt_eigs;  // sqrt(lambda_j / M)
    fftw_plan plan = nullptr;
    fftw_complex* ctor_buf = nullptr;

    ~CirculantPlan() {
        if (plan) fftw_destroy_plan(plan);
        if (ctor_buf) fftw_free(ctor_buf);
    }
};

namespace {

// FFTW planning is not thread-safe; new-array execution is.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

FieldSynthesizer::FieldSynthesizer(LatticeSpec lattice, const CutoffKernel& kernel,
                                   IsotropyParams params, FieldBackend backend,
                                   FactorizationStyle style)
    : lattice_(std::move(lattice)), kernel_spec_(kernel.spec()), params_(params) {
    lattice_.validate();
    params_.validate();
    kernel_spec_.validate();
    if (lattice_.d != kernel_spec_.d)
        throw std::invalid_argument("synthesizer: lattice/kernel dimension mismatch");
    const double s2 = kernel.at_zero();
    if (params_.sigma2 == 0.0) {
        params_.sigma2 = s2;
    } else if (std::abs(params_.sigma2 - s2) > 1e-9 * std::max(1.0, s2)) {
        throw std::invalid_argument(
            "synthesizer: params.sigma2 must equal the kernel value at 0");
    }
    // unit-variance mixer for the diagonal entries
    entry_mixer_ = diag_sqrt_factor(IsotropyParams{params_.N, params_.c, 1.0});

    const std::size_t n = lattice_.n_sites();
    if (backend == FieldBackend::Auto)
        backend = (lattice_.d <= 2 && n > 2048 &&
                   style == FactorizationStyle::Cholesky)
                      ? FieldBackend::Circulant
                      : FieldBackend::Dense;
    if (backend == FieldBackend::Circulant) {
        if (lattice_.d > 2)
            throw std::invalid_argument("circulant backend supports d <= 2");
        if (style != FactorizationStyle::Cholesky)
            throw std::invalid_argument(
                "circulant backend has no symmetric-sqrt factorization");
        int m_side = 2;
        while (m_side < 2 * lattice_.n_per_side) m_side *= 2;
        auto circ = std::make_unique<CirculantPlan>();
        circ->m_side = m_side;
        circ->m_total = 1;
        for (int k = 0; k < lattice_.d; ++k) circ->m_total *= m_side;

        {
            std::lock_guard<std::mutex> lock(fftw_plan_mutex());
            circ->ctor_buf = fftw_alloc_complex(circ->m_total);
            if (lattice_.d == 1)
                circ->plan = fftw_plan_dft_1d(m_side, circ->ctor_buf, circ->ctor_buf,
                                              FFTW_FORWARD, FFTW_ESTIMATE);
            else
                circ->plan = fftw_plan_dft_2d(m_side, m_side, circ->ctor_buf,
                                              circ->ctor_buf, FFTW_FORWARD,
                                              FFTW_ESTIMATE);
        }
        // first column of the circulant extension of the Gram matrix
        for (std::size_t j = 0; j < circ->m_total; ++j) {
            double dist2 = 0.0;
            std::size_t rem = j;
            for (int k = 0; k < lattice_.d; ++k) {
                const int q = static_cast<int>(rem % m_side);
                rem /= m_side;
                const int wrapped = std::min(q, m_side - q);
                const double dx = lattice_.spacing * wrapped;
                dist2 += dx * dx;
            }
            circ->ctor_buf[j][0] = kernel.at_radius(std::sqrt(dist2));
            circ->ctor_buf[j][1] = 0.0;
        }
        fftw_execute(circ->plan);
        double max_eig = 0.0, min_eig = 0.0;
        for (std::size_t j = 0; j < circ->m_total; ++j) {
            max_eig = std::max(max_eig, circ->ctor_buf[j][0]);
            min_eig = std::min(min_eig, circ->ctor_buf[j][0]);
        }
        if (min_eig >= -1e-9 * max_eig) {
            circ->sqrt_eigs.resize(circ->m_total);
            for (std::size_t j = 0; j < circ->m_total; ++j)
                circ->sqrt_eigs[j] = std::sqrt(
                    std::max(0.0, circ->ctor_buf[j][0]) / circ->m_total);
            circ_ = std::move(circ);
            backend_used_ = FieldBackend::Circulant;
            return;
        }
        // non-PD embedding: fall through to the dense factorization
        circulant_fallback_ = true;
    }

    backend_used_ = FieldBackend::Dense;
    Eigen::MatrixXd gram(n, n);
    std::vector<std::vector<double>> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = lattice_.site(i);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double dist2 = 0.0;
            for (int k = 0; k < lattice_.d; ++k) {
                const double dx = coords[i][k] - coords[j][k];
                dist2 += dx * dx;
            }
            const double v = kernel.at_radius(std::sqrt(dist2));
            gram(i, j) = v;
            gram(j, i) = v;
        }
    if (style == FactorizationStyle::SymmetricSqrt) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("synthesizer: eigendecomposition failed");
        const double max_eig = solver.eigenvalues().maxCoeff();
        if (solver.eigenvalues().minCoeff() < -1e-8 * max_eig)
            throw std::runtime_error(
                "synthesizer: Gram matrix is not positive semi-definite; use a "
                "positive-definite cutoff construction");
        factor_ = solver.eigenvectors() *
                  solver.eigenvalues().array().max(0.0).sqrt().matrix().asDiagonal() *
                  solver.eigenvectors().transpose();
        return;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        gram.diagonal().array() += kJitterRel * s2;
        llt.compute(gram);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error(
                "synthesizer: Cholesky failed even with jitter; the kernel is "
                "not positive definite on this lattice");
    }
    factor_ = llt.matrixL();
}

FieldSynthesizer::~FieldSynthesizer() = default;

std::size_t FieldSynthesizer::noise_size() const {
    if (backend_used_ == FieldBackend::Circulant) return 2 * circ_->m_total;
    return lattice_.n_sites();
}

Eigen::VectorXd FieldSynthesizer::scalar_field_from_noise(
    const Eigen::VectorXd& xi) const {
    if (static_cast<std::size_t>(xi.size()) != noise_size())
        throw std::invalid_argument("synthesizer: wrong noise length");
    if (backend_used_ == FieldBackend::Dense) return factor_ * xi;

    const std::size_t mt = circ_->m_total;
    fftw_complex* in = fftw_alloc_complex(mt);
    fftw_complex* out = fftw_alloc_complex(mt);
    for (std::size_t j = 0; j < mt; ++j) {
        in[j][0] = circ_->sqrt_eigs[j] * xi(2 * j);
        in[j][1] = circ_->sqrt_eigs[j] * xi(2 * j + 1);
    }
    fftw_execute_dft(circ_->plan, in, out);
    const std::size_t n = lattice_.n_sites();
    Eigen::VectorXd field(n);
    if (lattice_.d == 1) {
        for (std::size_t i = 0; i < n; ++i) field(i) = out[i][0];
    } else {
        const int np = lattice_.n_per_side;
        for (int a = 0; a < np; ++a)
            for (int b = 0; b < np; ++b)
                field(static_cast<std::size_t>(a) * np + b) =
                    out[static_cast<std::size_t>(a) * circ_->m_side + b][0];
    }
    fftw_free(in);
    fftw_free(out);
    return field;
}

std::vector<Eigen::VectorXd> FieldSynthesizer::sample_noise(
    std::uint64_t seed, std::uint64_t replica) const {
    const std::size_t n_drivers =
        static_cast<std::size_t>(params_.N) * (params_.N + 1) / 2;
    const std::size_t len = noise_size();
    std::vector<Eigen::VectorXd> noise(n_drivers);
    for (std::size_t a = 0; a < n_drivers; ++a) {
        auto rng = make_stream(seed, replica, a);
        std::normal_distribution<double> gauss;
        noise[a].resize(len);
        for (std::size_t i = 0; i < len; ++i) noise[a](i) = gauss(rng);
    }
    return noise;
}

MatrixField FieldSynthesizer::assemble(
    const std::vector<Eigen::VectorXd>& fields) const {
    const int n = params_.N;
    const std::size_t sites = lattice_.n_sites();
    MatrixField out;
    out.lattice = lattice_;
    out.params = params_;
    out.kernel = kernel_spec_;
    out.values.resize(sites * static_cast<std::size_t>(n) * (n + 1) / 2);
    const double off_scale = std::sqrt((1.0 + params_.c) / 2.0);
    Eigen::VectorXd diag_drivers(n);
    Eigen::MatrixXd M(n, n);
    for (std::size_t s = 0; s < sites; ++s) {
        for (int i = 0; i < n; ++i) diag_drivers(i) = fields[i](s);
        M.diagonal() = entry_mixer_ * diag_drivers;
        std::size_t a = static_cast<std::size_t>(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double v = off_scale * fields[a++](s);
                M(i, j) = v;
                M(j, i) = v;
            }
        out.set_matrix_at(s, M);
    }
    return out;
}

MatrixField FieldSynthesizer::synthesize_with_noise(
    const std::vector<Eigen::VectorXd>& noise) const {
    const std::size_t n_drivers =
        static_cast<std::size_t>(params_.N) * (params_.N + 1) / 2;
    if (noise.size() != n_drivers)
        throw std::invalid_argument("synthesizer: wrong driver count");
    std::vector<Eigen::VectorXd> fields(n_drivers);
    for (std::size_t a = 0; a < n_drivers; ++a)
        fields[a] = scalar_field_from_noise(noise[a]);
    return assemble(fields);
}

MatrixField FieldSynthesizer::synthesize(std::uint64_t seed,
                                         std::uint64_t replica) const {
    MatrixField f = synthesize_with_noise(sample_noise(seed, replica));
    f.seed = seed;
    return f;
}

// ---------------------------------------------------------------------------
// ensemble covariance validation

std::vector<CovReportRow> empirical_covariance_report(
    const FieldSynthesizer& synth, std::uint64_t seed, std::size_t n_replicas,
    const std::vector<CovProbe>& probes, int workers) {
    if (n_replicas < 2)
        throw std::invalid_argument("covariance report: n_replicas >= 2");
    const int n = synth.params().N;
    for (const auto& p : probes) {
        if (p.site_a >= synth.lattice().n_sites() ||
            p.site_b >= synth.lattice().n_sites())
            throw std::invalid_argument("covariance report: site out of range");
        if (p.i1 < 0 || p.j1 < 0 || p.i2 < 0 || p.j2 < 0 || p.i1 >= n ||
            p.j1 >= n || p.i2 >= n || p.j2 >= n)
            throw std::invalid_argument("covariance report: entry out of range");
    }
    workers = std::max(1, workers);
    const std::size_t np = probes.size();
    // per-replica storage so the reduction below runs in replica order and
    // the report is bit-identical for every worker count
    std::vector<double> per_replica(n_replicas * np, 0.0);
    auto run_block = [&](int w) {
        for (std::size_t r = w; r < n_replicas; r += workers) {
            const MatrixField f = synth.synthesize(seed, r);
            for (std::size_t p = 0; p < np; ++p) {
                const auto& pr = probes[p];
                const Eigen::MatrixXd Ma = f.matrix_at(pr.site_a);
                const Eigen::MatrixXd Mb = f.matrix_at(pr.site_b);
                per_replica[r * np + p] = Ma(pr.i1, pr.j1) * Mb(pr.i2, pr.j2);
            }
        }
    };
    if (workers == 1) {
        run_block(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
        for (auto& t : pool) t.join();
    }

    const CutoffKernel kernel(synth.kernel_spec());
    const auto& lat = synth.lattice();
    const double c = synth.params().c;
    std::vector<CovReportRow> rows(np);
    for (std::size_t p = 0; p < np; ++p) {
        CompensatedSum sum, sumsq_acc;
        for (std::size_t r = 0; r < n_replicas; ++r) {
            const double v = per_replica[r * np + p];
            sum.add(v);
            sumsq_acc.add(v * v);
        }
        const double sumsq = sumsq_acc.value();
        const auto& pr = probes[p];
        const double mean = sum.value() / n_replicas;
        const double var =
            std::max(0.0, sumsq / n_replicas - mean * mean) / (n_replicas - 1);
        const auto xa = lat.site(pr.site_a);
        const auto xb = lat.site(pr.site_b);
        double dist2 = 0.0;
        for (int k = 0; k < lat.d; ++k) {
            const double dx = xa[k] - xb[k];
            dist2 += dx * dx;
        }
        const double kval = kernel.at_radius(std::sqrt(dist2));
        double entry_cov = 0.0;
        if (pr.i1 == pr.j1 && pr.i2 == pr.j2) {
            // diagonal block (1+c) delta - c: unit variance on the diagonal
            entry_cov = (pr.i1 == pr.i2 ? 1.0 : -c);
        } else if (pr.i1 != pr.j1 && pr.i2 != pr.j2 &&
                   std::minmax(pr.i1, pr.j1) == std::minmax(pr.i2, pr.j2)) {
            entry_cov = (1.0 + c) / 2.0;
        }
        rows[p].probe = pr;
        rows[p].empirical = mean;
        rows[p].theoretical = entry_cov * kval;
        rows[p].std_error = std::sqrt(var);
        rows[p].z = rows[p].std_error > 0.0
                        ? (rows[p].empirical - rows[p].theoretical) / rows[p].std_error
                        : 0.0;
    }
    return rows;
}

// ---------------------------------------------------------------------------
// snapshot I/O

namespace {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void write_field_snapshot(const MatrixField& field, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write("MGMC", 4);
    write_pod(os, kSnapshotVersion);
    write_pod(os, static_cast<std::uint32_t>(field.lattice.d));
    write_pod(os, static_cast<std::uint32_t>(field.params.N));
    write_pod(os, static_cast<std::uint32_t>(field.lattice.n_per_side));
    write_pod(os, field.lattice.spacing);
    write_pod(os, field.kernel.gamma2);
    write_pod(os, field.kernel.L);
    write_pod(os, field.kernel.epsilon);
    write_pod(os, field.params.c);
    write_pod(os, field.seed);
    os.write(reinterpret_cast<const char*>(field.values.data()),
             static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("short write to " + path);
    os.close();

    nlohmann::json side;
    side["format"] = "MGMC";
    side["version"] = kSnapshotVersion;
    side["d"] = field.lattice.d;
    side["N"] = field.params.N;
    side["n_per_side"] = field.lattice.n_per_side;
    side["spacing"] = field.lattice.spacing;
    side["gamma2"] = field.kernel.gamma2;
    side["L"] = field.kernel.L;
    side["epsilon"] = field.kernel.epsilon;
    side["m"] = field.kernel.m;
    side["c"] = field.params.c;
    side["sigma2"] = field.params.sigma2;
    side["seed"] = field.seed;
    side["n_sites"] = field.lattice.n_sites();
    side["entries_per_site"] = field.triangle_size();
    side["layout"] = "float64 little-endian, site-major, upper triangle row-major";
    std::ofstream js(path + ".json");
    if (!js) throw std::runtime_error("cannot open " + path + ".json for writing");
    js << side.dump(2) << "\n";
}

MatrixField read_field_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MGMC", 4) != 0)
        throw std::runtime_error(path + ": bad magic");
    std::uint32_t version = 0, d = 0, N = 0, n_per_side = 0;
    read_pod(is, version);
    if (version != kSnapshotVersion)
        throw std::runtime_error(path + ": unsupported snapshot version");
    read_pod(is, d);
    read_pod(is, N);
    read_pod(is, n_per_side);
    MatrixField f;
    f.lattice.d = static_cast<int>(d);
    f.params.N = static_cast<int>(N);
    f.lattice.n_per_side = static_cast<int>(n_per_side);
    read_pod(is, f.lattice.spacing);
    read_pod(is, f.kernel.gamma2);
    read_pod(is, f.kernel.L);
    read_pod(is, f.kernel.epsilon);
    read_pod(is, f.params.c);
    read_pod(is, f.seed);
    if (!is) throw std::runtime_error(path + ": truncated header");
    f.kernel.d = f.lattice.d;
    f.lattice.validate();
    // m and sigma2 live only in the sidecar; recover them when it is present
    std::ifstream js(path + ".json");
    if (js) {
        const auto side = nlohmann::json::parse(js, nullptr, false);
        if (!side.is_discarded()) {
            if (side.contains("m")) f.kernel.m = side["m"].get<double>();
            if (side.contains("sigma2"))
                f.params.sigma2 = side["sigma2"].get<double>();
        }
    }
    if (f.params.sigma2 == 1.0)
        f.params.sigma2 = CutoffKernel(f.kernel).at_zero();
    f.values.resize(f.lattice.n_sites() * f.triangle_size());
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is || is.gcount() !=
                   static_cast<std::streamsize>(f.values.size() * sizeof(double)))
        throw std::runtime_error(path + ": truncated payload");
    f.params.validate();
    return f;
}

}  // namespace mgmc
