#include "sklimit/cli.hpp"

#include "sklimit/assumptions.hpp"
#include "sklimit/config.hpp"
#include "sklimit/exper.hpp"
#include "sklimit/io.hpp"
#include "sklimit/matx.hpp"
#include "sklimit/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sklimit {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct RunFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 1;
};

Matrix matrix_field(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) {
        throw Error(ErrorCode::ValidationError, std::string("missing matrix \"") + key + "\"");
    }
    const nlohmann::json& v = doc[key];
    if (!v.is_array() || v.empty()) {
        throw Error(ErrorCode::ValidationError, std::string(key) + " must be a non-empty array of rows");
    }
    std::vector<std::vector<double>> rows;
    for (const auto& row : v) {
        if (!row.is_array()) {
            throw Error(ErrorCode::ValidationError, std::string(key) + " must be an array of rows");
        }
        std::vector<double> r;
        for (const auto& x : row) {
            if (!x.is_number()) {
                throw Error(ErrorCode::ValidationError, std::string(key) + " entries must be numbers");
            }
            r.push_back(x.get<double>());
        }
        rows.push_back(std::move(r));
    }
    Matrix m = Matrix::from_rows(rows);
    if (m.rows() != m.cols()) {
        throw Error(ErrorCode::ValidationError, std::string(key) + " must be square");
    }
    return m;
}

nlohmann::json parse_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

int run_solve(const std::string& input, bool oracle, double tol, std::ostream& out) {
    const nlohmann::json doc = parse_json(read_file(input));
    if (!doc.is_object()) {
        throw Error(ErrorCode::ValidationError, "problem must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (key != "gamma" && key != "Q" && key != "A" && key != "B" && key != "C") {
            throw Error(ErrorCode::ValidationError, "unknown key \"" + key + "\"");
        }
    }
    ojson result = ojson::object();
    if (doc.contains("gamma") || doc.contains("Q")) {
        if (doc.contains("A") || doc.contains("B") || doc.contains("C")) {
            throw Error(ErrorCode::ValidationError, "give either {gamma, Q} or {A, B, C}");
        }
        const Matrix gamma = matrix_field(doc, "gamma");
        const Matrix q = matrix_field(doc, "Q");
        const Matrix j = solve_lyapunov(gamma, q);
        result["J"] = matrix_to_json(j);
        result["residual"] = lyapunov_residual(gamma, j, q);
        if (oracle) {
            result["oracle_gap"] = (lyapunov_by_quadrature(gamma, q, tol) - j).frobenius_norm();
        }
    } else {
        const Matrix a = matrix_field(doc, "A");
        const Matrix b = matrix_field(doc, "B");
        const Matrix c = matrix_field(doc, "C");
        const Matrix y = solve_sylvester(a, b, c);
        result["Y"] = matrix_to_json(y);
        result["residual"] = sylvester_residual(a, b, y, c);
        if (oracle) {
            result["oracle_gap"] = (sylvester_by_quadrature(a, b, c, tol) - y).frobenius_norm();
        }
    }
    out << dump_json(result, -1) << '\n';
    return kExitOk;
}

RunConfig load_config(const RunFlags& flags) {
    RunConfig cfg = parse_config(read_file(flags.config));
    if (flags.seed) {
        cfg.seed = *flags.seed;
    }
    if (flags.out) {
        cfg.output_dir = *flags.out;
    }
    return cfg;
}

ojson assumption_json(const AssumptionReport& rep) {
    ojson o = ojson::object();
    o["min_lambda"] = rep.min_lambda;
    o["argmin_point"] = rep.argmin_point;
    o["lip_force_x"] = rep.lip_force_x;
    o["lip_noise_x"] = rep.lip_noise_x;
    o["lip_friction_x"] = rep.lip_friction_x;
    o["lip_friction_dx"] = rep.lip_friction_dx;
    o["lip_force_mu"] = rep.lip_force_mu;
    o["lip_noise_mu"] = rep.lip_noise_mu;
    o["lip_friction_mu"] = rep.lip_friction_mu;
    o["max_friction_dmu"] = rep.max_friction_dmu;
    o["probes"] = rep.probes;
    o["violated"] = rep.violated;
    return o;
}

int run_validate(const RunFlags& flags, std::ostream& out) {
    const RunConfig cfg = load_config(flags);
    const ModelPtr model = model_library(cfg.model);
    const AssumptionReport rep = validate_assumptions(*model, cfg.probe);
    ojson o = ojson::object();
    o["model"] = model_to_json(cfg.model);
    o["assumptions"] = assumption_json(rep);
    out << dump_json(o) << '\n';
    return kExitOk;
}

int run_simulate(const RunFlags& flags, std::ostream& out) {
    const RunConfig cfg = load_config(flags);
    const SimulationBlock& sim = cfg.simulation;
    const ModelPtr model = model_library(cfg.model);
    (void)validate_assumptions(*model, cfg.probe);
    const double eps = sim.epsilons.front();
    CoupledRunConfig run;
    run.eps = eps;
    run.horizon = sim.horizon;
    run.coarse_step = sim.coarse_step;
    run.fine_step = resolve_fine_step(sim.rule, eps, sim.coarse_step);
    run.particles = sim.particles;
    run.scheme = scheme_for(sim.rule);
    run.kappa = sim.rule.kappa;
    run.x0 = sim.x0;
    run.v0 = sim.v0;
    run.record_paths = true;
    run.exclude_self_term = sim.exclude_self_term;

    std::vector<CoupledResult> results(sim.replicas);
    parallel_for(sim.replicas, flags.threads,
                 [&](std::size_t r) { results[r] = simulate_coupled(*model, run, r, cfg.seed); });

    std::ostringstream csv;
    Vec sups;
    for (std::size_t r = 0; r < results.size(); ++r) {
        write_path_csv(csv, results[r].paths, r == 0);
        sups.push_back(results[r].sup_diff);
    }
    const fs::path path = fs::path(cfg.output_dir) / "paths.csv";
    write_file(path, csv.str());

    double mean = 0.0;
    for (double s : sups) {
        mean += s;
    }
    mean /= static_cast<double>(sups.size());
    double ss = 0.0;
    for (double s : sups) {
        ss += (s - mean) * (s - mean);
    }
    const double n = static_cast<double>(sups.size());
    ojson o = ojson::object();
    o["epsilon"] = eps;
    o["fine_step"] = run.fine_step;
    o["Delta"] = run.coarse_step;
    o["replicas"] = sups.size();
    o["mean_sup_diff"] = mean;
    o["stderr"] = sups.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    o["paths"] = path.string();
    out << dump_json(o) << '\n';
    return kExitOk;
}

int run_converge(const RunFlags& flags, std::ostream& out) {
    const RunConfig cfg = load_config(flags);
    const ConvergenceReport report = run_convergence(cfg.model, convergence_setup(cfg, flags.threads));
    const std::string json = dump_json(report_to_json(report)) + "\n";
    const fs::path dir(cfg.output_dir);
    write_file(dir / "report.json", json);
    write_file(dir / "report.csv", report_csv(report));
    out << json;
    return kExitOk;
}

int run_reduce_check(const RunFlags& flags, bool force_tilde, std::ostream& out) {
    const RunConfig cfg = load_config(flags);
    if (cfg.model.family != "constant") {
        throw Error(ErrorCode::ValidationError, "reduce-check needs the constant family, got \"" +
                                                    cfg.model.family + "\"");
    }
    const SimulationBlock& sim = cfg.simulation;
    const ModelPtr model = model_library(cfg.model);
    ReductionSetup setup;
    setup.horizon = sim.horizon;
    setup.coarse_step = sim.coarse_step;
    setup.particles = sim.particles;
    setup.replicas = sim.replicas;
    setup.rule = sim.rule;
    setup.x0 = sim.x0;
    setup.v0 = sim.v0;
    setup.threads = flags.threads;
    setup.force_tilde_term = force_tilde;
    const ReductionResult res = constant_reduction_check(*model, sim.epsilons.back(), cfg.seed, setup);
    ojson o = ojson::object();
    o["max_path_gap"] = res.max_path_gap;
    o["epsilon"] = res.eps;
    o["eps_error"] = res.eps_error;
    o["eps_stderr"] = res.eps_std_error;
    o["replicas"] = res.replicas;
    out << dump_json(o) << '\n';
    return kExitOk;
}

void add_run_flags(CLI::App* sub, RunFlags& flags) {
    sub->add_option("--config", flags.config, "JSON run configuration")->required();
    sub->add_option("--seed", flags.seed, "override the configured seed");
    sub->add_option("--out", flags.out, "override the configured output directory");
    sub->add_option("--threads", flags.threads, "worker threads for replica fan-out")
        ->check(CLI::Range(1u, 1024u));
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::ValidationError:
        case ErrorCode::UnknownFamily:
        case ErrorCode::ParameterViolation:
        case ErrorCode::InsufficientReplicas:
        case ErrorCode::GridMismatch:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::CountMismatch:
        case ErrorCode::SizeLimitExceeded:
        case ErrorCode::StepTooLarge:
            return kExitValidation;
        case ErrorCode::AssumptionViolated:
        case ErrorCode::NumericalBlowup:
        case ErrorCode::UnstableFriction:
        case ErrorCode::SingularSystem:
        case ErrorCode::SpectrumOverlap:
        case ErrorCode::ToleranceNotMet:
        case ErrorCode::NonFinite:
        case ErrorCode::DegenerateFit:
            return kExitNumerical;
        case ErrorCode::IoError:
            return kExitIo;
    }
    return kExitNumerical;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small-mass limit simulator for Langevin systems with state- and law-dependent friction"};
    app.name("sklimit");
    app.require_subcommand(1);

    std::string input;
    bool oracle = false;
    double tol = 1e-9;
    CLI::App* solve = app.add_subcommand("solve", "solve a Lyapunov {gamma, Q} or Sylvester {A, B, C} problem");
    solve->add_option("--input", input, "JSON problem file")->required();
    solve->add_flag("--oracle", oracle, "cross-check against the integral representation");
    solve->add_option("--tol", tol, "quadrature tolerance for --oracle")->check(CLI::PositiveNumber);

    RunFlags flags;
    bool force_tilde = false;
    CLI::App* validate = app.add_subcommand("validate", "probe the model assumptions");
    CLI::App* simulate = app.add_subcommand("simulate", "coupled run at the first eps, writes paths.csv");
    CLI::App* converge = app.add_subcommand("converge", "convergence study, writes report.json and report.csv");
    CLI::App* reduce = app.add_subcommand("reduce-check", "constant-friction reduction check");
    for (CLI::App* sub : {validate, simulate, converge, reduce}) {
        add_run_flags(sub, flags);
    }
    reduce->add_flag("--force-tilde", force_tilde, "evaluate the S~ solves even for constant friction");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (solve->parsed()) {
            return run_solve(input, oracle, tol, out);
        }
        if (validate->parsed()) {
            return run_validate(flags, out);
        }
        if (simulate->parsed()) {
            return run_simulate(flags, out);
        }
        if (converge->parsed()) {
            return run_converge(flags, out);
        }
        if (reduce->parsed()) {
            return run_reduce_check(flags, force_tilde, out);
        }
    } catch (const Error& e) {
        err << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    err << "usage error: no subcommand\n";
    return kExitUsage;
}

}  // namespace sklimit
