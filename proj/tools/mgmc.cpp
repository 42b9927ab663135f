// Batch front-end: configuration parsing, experiment orchestration,
// deterministic seeding, CSV/JSON emission.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mgmc/angular.hpp"
#include "mgmc/chaos.hpp"
#include "mgmc/config.hpp"
#include "mgmc/field.hpp"
#include "mgmc/kernel.hpp"
#include "mgmc/oracles.hpp"
#include "mgmc/rng.hpp"

namespace {

using namespace mgmc;

// CSV numbers: '.' decimal, no locale, 17 significant digits
std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
};

int resolve_workers(const Config& cfg, const CliOverrides& cli) {
    // precedence: --workers flag, then config, then MGMC_WORKERS, then 1
    if (cli.workers) return std::max(1, *cli.workers);
    if (cfg.has("run", "workers"))
        return std::max(1, static_cast<int>(cfg.get_int("run", "workers", 1)));
    if (const char* env = std::getenv("MGMC_WORKERS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw ConfigError(std::string("MGMC_WORKERS is not an integer: '") +
                              env + "'");
        }
    }
    return 1;
}

std::uint64_t resolve_seed(const Config& cfg, const CliOverrides& cli) {
    if (cli.seed) return *cli.seed;
    return cfg.get_u64("run", "seed", 0);
}

std::filesystem::path resolve_outdir(const Config& cfg, const CliOverrides& cli) {
    const std::string dir =
        cli.out ? *cli.out : cfg.get_string("run", "output_dir", ".");
    std::filesystem::create_directories(dir);
    return dir;
}

// effective config: file values with CLI overrides folded in, so the
// manifest hash names exactly what was run
Config effective_config(Config cfg, const CliOverrides& cli,
                        std::uint64_t seed) {
    cfg.set("run", "seed", std::to_string(seed));
    if (cli.out) cfg.set("run", "output_dir", *cli.out);
    return cfg;
}

void write_manifest(const std::filesystem::path& outdir,
                    const std::string& command, const Config& effective,
                    int workers, const std::vector<std::string>& outputs) {
    std::ofstream os(outdir / "manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest.json");
    os << "{\n";
    os << "  \"command\": \"" << command << "\",\n";
    os << "  \"config_hash\": \"" << std::hex << effective.hash() << std::dec
       << "\",\n";
    os << "  \"seed\": " << effective.get_u64("run", "seed", 0) << ",\n";
    os << "  \"workers\": " << workers << ",\n";
    os << "  \"timestamp_unix\": "
       << std::chrono::duration_cast<std::chrono::seconds>(
              std::chrono::system_clock::now().time_since_epoch())
              .count()
       << ",\n";
    os << "  \"outputs\": [";
    for (std::size_t i = 0; i < outputs.size(); ++i)
        os << "\"" << outputs[i] << "\"" << (i + 1 < outputs.size() ? ", " : "");
    os << "],\n";
    os << "  \"config\": " << '"';
    for (char ch : effective.serialize()) {
        if (ch == '\n')
            os << "\\n";
        else if (ch == '"')
            os << "\\\"";
        else
            os << ch;
    }
    os << "\"\n}\n";
}

// ---------------------------------------------------------------------------
// config -> domain objects (numeric constraints re-validated here so errors
// surface as config errors with source locations)

const std::vector<std::string> kModelKeys = {
    "model.d",       "model.N", "model.gamma2",       "model.c",
    "model.L",       "model.m", "model.epsilon",      "model.epsilon_list",
};
const std::vector<std::string> kGridKeys = {"grid.n_per_side", "grid.spacing"};
const std::vector<std::string> kRunKeys = {
    "run.replicas",  "run.seed",    "run.orders",        "run.scales",
    "run.backend",   "run.n_samples", "run.output_dir",  "run.workers",
    "run.c_eps",     "run.region_radius", "run.r_list",  "run.c_eps_samples",
};
const std::vector<std::string> kAngularKeys = {
    "angular.kind", "angular.k",         "angular.theta", "angular.coef",
    "angular.i",    "angular.j",         "angular.d_values",
    "angular.dp_values", "angular.u_values", "angular.up_values",
    "angular.r_values", "angular.j_indices", "angular.importance",
    "angular.kappa", "angular.n_samples",
};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> ls) {
    std::vector<std::string> out;
    for (const auto& l : ls) out.insert(out.end(), l.begin(), l.end());
    return out;
}

KernelSpec kernel_from(const Config& cfg, bool chaos_use) {
    KernelSpec spec;
    spec.d = static_cast<int>(cfg.get_int("model", "d", 1));
    spec.gamma2 = cfg.get_double("model", "gamma2", 0.25);
    spec.L = cfg.get_double("model", "L", 1.0);
    spec.m = cfg.get_double("model", "m", 0.0);
    spec.epsilon = cfg.get_double("model", "epsilon", 1.0 / 64.0);
    try {
        if (chaos_use)
            spec.validate_for_chaos();
        else
            spec.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(cfg.source_name() + ": [model]: " + ex.what() +
                          (chaos_use ? " (chaos commands need 0 < gamma2 < d)"
                                     : ""));
    }
    return spec;
}

IsotropyParams params_from(const Config& cfg) {
    IsotropyParams p;
    p.N = static_cast<int>(cfg.get_int("model", "N", 2));
    p.c = cfg.get_double("model", "c", 0.0);
    p.sigma2 = 0.0;  // derived from the kernel downstream
    try {
        p.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(cfg.source_name() + ": [model]: " + ex.what());
    }
    return p;
}

LatticeSpec lattice_from(const Config& cfg, int d) {
    LatticeSpec lat;
    lat.d = d;
    lat.n_per_side = static_cast<int>(cfg.get_int("grid", "n_per_side", 64));
    lat.spacing = cfg.get_double("grid", "spacing", 1.0 / 64.0);
    try {
        lat.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(cfg.source_name() + ": [grid]: " + ex.what());
    }
    return lat;
}

FieldBackend backend_from(const Config& cfg) {
    const std::string b = cfg.get_string("run", "backend", "auto");
    if (b == "auto") return FieldBackend::Auto;
    if (b == "dense") return FieldBackend::Dense;
    if (b == "circulant") return FieldBackend::Circulant;
    throw ConfigError(cfg.source_name() +
                      ": run.backend must be auto|dense|circulant, got '" + b +
                      "'");
}

// ---------------------------------------------------------------------------
// commands

int cmd_validate(const Config& cfg, const CliOverrides& cli) {
    const std::uint64_t seed = resolve_seed(cfg, cli);
    const auto outdir = resolve_outdir(cfg, cli);
    const auto checks = run_validation_suite(seed);
    {
        std::ofstream os(outdir / "oracle_report.json");
        if (!os) throw std::runtime_error("cannot write oracle_report.json");
        os << oracle_report_json(checks, seed);
    }
    write_manifest(outdir, "validate", effective_config(cfg, cli, seed),
                   resolve_workers(cfg, cli), {"oracle_report.json"});
    for (const auto& c : checks) {
        if (!c.passed) {
            std::cerr << "validation failed: " << c.name
                      << " (closed=" << fmt17(c.closed_form)
                      << ", numeric=" << fmt17(c.numeric) << ")\n";
            return 1;
        }
    }
    std::cout << checks.size() << " oracle checks passed\n";
    return 0;
}

int cmd_synth(const Config& cfg, const CliOverrides& cli) {
    cfg.check_allowed(concat({kModelKeys, kGridKeys, kRunKeys}));
    const KernelSpec spec = kernel_from(cfg, false);
    const IsotropyParams params = params_from(cfg);
    const LatticeSpec lattice = lattice_from(cfg, spec.d);
    const std::uint64_t seed = resolve_seed(cfg, cli);
    const auto outdir = resolve_outdir(cfg, cli);
    const CutoffKernel kernel(spec);
    const FieldSynthesizer synth(lattice, kernel, params, backend_from(cfg));
    const MatrixField field = synth.synthesize(seed, 0);
    write_field_snapshot(field, (outdir / "field.bin").string());
    write_manifest(outdir, "synth", effective_config(cfg, cli, seed),
                   resolve_workers(cfg, cli), {"field.bin", "field.bin.json"});
    return 0;
}

int cmd_moments(const Config& cfg, const CliOverrides& cli) {
    cfg.check_allowed(concat({kModelKeys, kGridKeys, kRunKeys}));
    MomentConfig mc;
    mc.kernel = kernel_from(cfg, true);
    mc.params = params_from(cfg);
    mc.lattice = lattice_from(cfg, mc.kernel.d);
    mc.scales = cfg.get_double_list("run", "scales");
    mc.orders = cfg.get_int_list("run", "orders");
    if (mc.orders.empty()) mc.orders = {1, 2};
    mc.seed = resolve_seed(cfg, cli);
    mc.n_replicas = static_cast<std::size_t>(cfg.get_int("run", "replicas", 256));
    mc.workers = resolve_workers(cfg, cli);
    mc.c_eps = cfg.get_double("run", "c_eps", 0.0);
    mc.c_eps_samples =
        static_cast<std::size_t>(cfg.get_int("run", "c_eps_samples", 200000));
    mc.backend = backend_from(cfg);
    if (mc.scales.empty())
        throw ConfigError(cfg.source_name() + ": run.scales is required");

    MomentTable table;
    try {
        table = ensemble_moments(mc);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(cfg.source_name() + ": " + ex.what());
    }
    const auto outdir = resolve_outdir(cfg, cli);
    {
        std::ofstream os(outdir / "moments.csv");
        os << "scale,order,estimate,std_error,n_replicas,epsilon,gamma2,N,c,d,"
              "seed\n";
        for (const auto& r : table.rows)
            os << fmt17(r.scale) << "," << r.order << "," << fmt17(r.estimate)
               << "," << fmt17(r.std_error) << "," << r.n_replicas << ","
               << fmt17(mc.kernel.epsilon) << "," << fmt17(mc.kernel.gamma2)
               << "," << mc.params.N << "," << fmt17(mc.params.c) << ","
               << mc.kernel.d << "," << mc.seed << "\n";
    }
    {
        std::ofstream os(outdir / "zeta.csv");
        os << "order,slope,slope_se,slope_logcorrected,theory_zeta\n";
        if (mc.scales.size() >= 4) {
            for (const auto& z : zeta_fit(table))
                os << z.order << "," << fmt17(z.slope) << "," << fmt17(z.slope_se)
                   << "," << fmt17(z.slope_logcorrected) << ","
                   << fmt17(z.theory_zeta) << "\n";
        }
    }
    write_manifest(outdir, "moments", effective_config(cfg, cli, mc.seed),
                   mc.workers, {"moments.csv", "zeta.csv"});
    return 0;
}

int cmd_pair_correlation(const Config& cfg, const CliOverrides& cli) {
    cfg.check_allowed(concat({kModelKeys, kGridKeys, kRunKeys}));
    const KernelSpec spec = kernel_from(cfg, true);
    const IsotropyParams params = params_from(cfg);
    const std::vector<double> rs = cfg.get_double_list("run", "r_list");
    if (rs.empty())
        throw ConfigError(cfg.source_name() + ": run.r_list is required");
    const std::uint64_t seed = resolve_seed(cfg, cli);
    const auto outdir = resolve_outdir(cfg, cli);
    std::ofstream os(outdir / "paircorr.csv");
    os << "r,exact,asymptotic,ratio\n";
    for (double r : rs) {
        if (!(r > 0.0))
            throw ConfigError(cfg.source_name() + ": run.r_list entries must be > 0");
        const double exact = pair_correlation(r, spec, params);
        const double asym = r < spec.L
                                ? pair_correlation_asymptotic(r, spec, params)
                                : std::numeric_limits<double>::quiet_NaN();
        os << fmt17(r) << "," << fmt17(exact) << "," << fmt17(asym) << ","
           << fmt17(exact / asym) << "\n";
    }
    os.close();
    write_manifest(outdir, "pair-correlation", effective_config(cfg, cli, seed),
                   resolve_workers(cfg, cli), {"paircorr.csv"});
    return 0;
}

int cmd_angular(const Config& cfg, const CliOverrides& cli) {
    cfg.check_allowed(concat({kModelKeys, kGridKeys, kRunKeys, kAngularKeys}));
    const IsotropyParams params = params_from(cfg);
    const std::uint64_t seed = resolve_seed(cfg, cli);
    const std::size_t n_samples =
        static_cast<std::size_t>(cfg.get_int("angular", "n_samples", 100000));
    const std::string kind = cfg.get_string("angular", "kind", "hciz");
    const auto outdir = resolve_outdir(cfg, cli);
    auto rng = make_stream(seed, 0, 31);

    AngularEstimate est;
    int k = 0;
    std::ostringstream pjson;
    pjson.precision(17);
    if (kind == "hciz") {
        const auto d = cfg.get_double_list("angular", "d_values");
        const auto dp = cfg.get_double_list("angular", "dp_values");
        const double theta = cfg.get_double("angular", "theta", 1.0);
        if (d.empty() || d.size() != dp.size())
            throw ConfigError(cfg.source_name() +
                              ": angular.d_values/dp_values must match");
        est = hciz_mc(d, dp, theta, n_samples, rng);
        pjson << "{\"theta\": " << theta << "}";
    } else if (kind == "morozov") {
        const auto u = cfg.get_double_list("angular", "u_values");
        const auto up = cfg.get_double_list("angular", "up_values");
        const int i = static_cast<int>(cfg.get_int("angular", "i", 0));
        const int j = static_cast<int>(cfg.get_int("angular", "j", 0));
        const double coef = cfg.get_double("angular", "coef", 1.0);
        est = morozov_moment_mc(i, j, u, up, coef, n_samples, rng);
        pjson << "{\"i\": " << i << ", \"j\": " << j << ", \"coef\": " << coef
              << "}";
    } else if (kind == "kpoint") {
        const KernelSpec spec = kernel_from(cfg, false);
        const auto rvals = cfg.get_double_list("angular", "r_values");
        k = static_cast<int>(cfg.get_int("angular", "k", 2));
        if (spec.d != 1 || static_cast<int>(rvals.size()) != k)
            throw ConfigError(cfg.source_name() +
                              ": kpoint command expects d = 1 and one coordinate "
                              "per point in angular.r_values");
        std::vector<std::vector<double>> points;
        for (double r : rvals) points.push_back({r});
        KPointOptions opts;
        opts.importance = cfg.get_int("angular", "importance", 0) != 0;
        opts.kappa = cfg.get_double("angular", "kappa", 0.0);
        auto j_indices = cfg.get_int_list("angular", "j_indices");
        if (j_indices.empty()) j_indices.assign(k, 0);
        est = kpoint_trace_mc(points, spec, params, j_indices, n_samples, rng,
                              opts);
        pjson << "{\"k\": " << k << ", \"importance\": "
              << (opts.importance ? "true" : "false") << "}";
    } else {
        throw ConfigError(cfg.source_name() +
                          ": angular.kind must be hciz|morozov|kpoint, got '" +
                          kind + "'");
    }

    std::ofstream os(outdir / "angular.csv");
    os << "integral_kind,N,k,parameters_json,estimate,std_error,ess,n_samples,"
          "seed\n";
    std::string pq;  // CSV-quote the JSON: double any embedded quotes
    for (char ch : pjson.str()) {
        pq += ch;
        if (ch == '"') pq += '"';
    }
    os << kind << "," << params.N << "," << k << ",\"" << pq << "\","
       << fmt17(est.value) << "," << fmt17(est.std_error) << ","
       << fmt17(est.ess) << "," << est.n_samples << "," << seed << "\n";
    os.close();
    write_manifest(outdir, "angular", effective_config(cfg, cli, seed),
                   resolve_workers(cfg, cli), {"angular.csv"});
    return 0;
}

int cmd_cauchy(const Config& cfg, const CliOverrides& cli) {
    cfg.check_allowed(concat({kModelKeys, kGridKeys, kRunKeys}));
    CauchyConfig cc;
    cc.kernel = kernel_from(cfg, true);
    cc.params = params_from(cfg);
    cc.lattice = lattice_from(cfg, cc.kernel.d);
    cc.epsilons = cfg.get_double_list("model", "epsilon_list");
    if (cc.epsilons.empty())
        throw ConfigError(cfg.source_name() + ": model.epsilon_list is required");
    cc.seed = resolve_seed(cfg, cli);
    cc.n_replicas = static_cast<std::size_t>(cfg.get_int("run", "replicas", 256));
    cc.c_eps_samples =
        static_cast<std::size_t>(cfg.get_int("run", "c_eps_samples", 200000));
    cc.workers = resolve_workers(cfg, cli);
    const double radius = cfg.get_double(
        "run", "region_radius", cc.lattice.spacing * cc.lattice.n_per_side / 4.0);
    std::vector<double> center(cc.lattice.d, 0.0);
    for (int a = 0; a < cc.lattice.d; ++a)
        center[a] = cc.lattice.spacing * (cc.lattice.n_per_side - 1) / 2.0;
    cc.region = BallRegion{center, radius};

    CauchyTable table;
    try {
        table = cauchy_l2_check(cc);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(cfg.source_name() + ": " + ex.what());
    }
    const auto outdir = resolve_outdir(cfg, cli);
    std::ofstream os(outdir / "cauchy.csv");
    os << "eps,eps_prime,estimate,std_error,cross_term,diag_eps,diag_eps_prime\n";
    for (const auto& r : table.rows)
        os << fmt17(r.eps) << "," << fmt17(r.eps_prime) << ","
           << fmt17(r.estimate) << "," << fmt17(r.std_error) << ","
           << fmt17(r.cross_term) << "," << fmt17(r.diag_eps) << ","
           << fmt17(r.diag_eps_prime) << "\n";
    os.close();
    write_manifest(outdir, "cauchy", effective_config(cfg, cli, cc.seed),
                   cc.workers, {"cauchy.csv"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matrix-chaos simulation and verification toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    CliOverrides cli;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0;
    std::string out_flag;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* copt = sub->add_option("--config", config_path, "config file path");
        if (config_required) copt->required();
        sub->add_option("--seed", seed_flag, "RNG seed override")
            ->each([&](const std::string& s) { cli.seed = std::stoull(s); });
        sub->add_option("--workers", workers_flag, "worker thread count")
            ->each([&](const std::string& s) { cli.workers = std::stoi(s); });
        sub->add_option("--out", out_flag, "output directory")
            ->each([&](const std::string& s) { cli.out = s; });
    };

    auto* validate = app.add_subcommand("validate", "run the oracle suite");
    add_common(validate, false);
    auto* synth = app.add_subcommand("synth", "write a field snapshot");
    add_common(synth, true);
    auto* moments =
        app.add_subcommand("moments", "ensemble moments and exponent fits");
    add_common(moments, true);
    auto* paircorr = app.add_subcommand("pair-correlation",
                                        "two-point theory vs. its equivalent");
    add_common(paircorr, true);
    auto* angular = app.add_subcommand("angular", "orthogonal-group integrals");
    add_common(angular, true);
    auto* cauchy = app.add_subcommand("cauchy", "coupled-cutoff L2 differences");
    add_common(cauchy, true);

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = config_path.empty() ? Config::parse_string("", "<default>")
                                         : Config::parse_file(config_path);
        if (validate->parsed()) return cmd_validate(cfg, cli);
        if (synth->parsed()) return cmd_synth(cfg, cli);
        if (moments->parsed()) return cmd_moments(cfg, cli);
        if (paircorr->parsed()) return cmd_pair_correlation(cfg, cli);
        if (angular->parsed()) return cmd_angular(cfg, cli);
        if (cauchy->parsed()) return cmd_cauchy(cfg, cli);
        return 2;
    } catch (const mgmc::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "runtime error: " << ex.what() << "\n";
        return 3;
    }
}
