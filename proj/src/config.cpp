#include "sklimit/config.hpp"

#include "sklimit/error.hpp"
#include "sklimit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include <json.hpp>

namespace sklimit {

namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ValidationError, field + " " + what);
}

void allow_only(const json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) {
        invalid(where.empty() ? "document" : where, "must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw Error(ErrorCode::ValidationError,
                        "unknown key \"" + (where.empty() ? key : where + "." + key) + "\"");
        }
    }
}

double number(const json& v, const std::string& field) {
    if (!v.is_number()) {
        invalid(field, "must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        invalid(field, "must be finite");
    }
    return d;
}

double positive(const json& v, const std::string& field) {
    const double d = number(v, field);
    if (!(d > 0.0)) {
        invalid(field, "must be > 0");
    }
    return d;
}

std::uint64_t count(const json& v, const std::string& field, std::uint64_t min_value) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        invalid(field, "must be a non-negative integer");
    }
    const auto n = v.get<std::uint64_t>();
    if (n < min_value) {
        invalid(field, "must be >= " + std::to_string(min_value));
    }
    return n;
}

Vec number_list(const json& v, const std::string& field) {
    if (!v.is_array()) {
        invalid(field, "must be an array of numbers");
    }
    Vec out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
}

ParamValue param_value(const json& v, const std::string& field) {
    if (v.is_number()) {
        return ParamValue::scalar(number(v, field));
    }
    if (!v.is_array() || v.empty()) {
        invalid(field, "must be a number, a non-empty array or an array of rows");
    }
    if (!v[0].is_array()) {
        return ParamValue::vector(number_list(v, field));
    }
    ParamValue p;
    const std::size_t cols = v[0].size();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec row = number_list(v[i], field + "[" + std::to_string(i) + "]");
        if (row.size() != cols || cols == 0) {
            invalid(field, "rows must be non-empty and of equal length");
        }
        p.values.insert(p.values.end(), row.begin(), row.end());
    }
    p.shape = {v.size(), cols};
    return p;
}

std::size_t byte_to_line_col(std::string_view text, std::size_t byte, std::size_t& col) {
    std::size_t line = 1;
    col = 1;
    const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return line;
}

void parse_model(const json& m, RunConfig& cfg) {
    allow_only(m, "model", {"family", "params"});
    if (!m.contains("family") || !m["family"].is_string()) {
        invalid("model.family", "is required and must be a string");
    }
    cfg.model.family = m["family"].get<std::string>();
    if (m.contains("params")) {
        const json& params = m["params"];
        if (!params.is_object()) {
            invalid("model.params", "must be an object");
        }
        for (const auto& [name, value] : params.items()) {
            cfg.model.params[name] = param_value(value, "model.params." + name);
        }
    }
}

void parse_simulation(const json& s, RunConfig& cfg) {
    allow_only(s, "simulation",
               {"d", "k", "N", "T", "epsilon", "epsilon_list", "delta_rule", "Delta", "replicas", "x0", "v0", "mode",
                "exclude_self_term"});
    SimulationBlock& sim = cfg.simulation;
    if (s.contains("d")) {
        sim.d = count(s["d"], "simulation.d", 1);
    }
    if (s.contains("k")) {
        sim.k = count(s["k"], "simulation.k", 1);
    }
    if (s.contains("N")) {
        sim.particles = count(s["N"], "simulation.N", 1);
    }
    if (s.contains("T")) {
        sim.horizon = positive(s["T"], "simulation.T");
    }
    if (s.contains("epsilon") && s.contains("epsilon_list")) {
        invalid("simulation.epsilon", "and simulation.epsilon_list are mutually exclusive");
    }
    if (s.contains("epsilon")) {
        sim.epsilons = {positive(s["epsilon"], "simulation.epsilon")};
    }
    if (s.contains("epsilon_list")) {
        sim.epsilons = number_list(s["epsilon_list"], "simulation.epsilon_list");
        if (sim.epsilons.empty()) {
            invalid("simulation.epsilon_list", "must not be empty");
        }
        for (double e : sim.epsilons) {
            if (!(e > 0.0)) {
                invalid("simulation.epsilon_list", "entries must be > 0");
            }
        }
        for (std::size_t i = 1; i < sim.epsilons.size(); ++i) {
            if (!(sim.epsilons[i] < sim.epsilons[i - 1])) {
                throw Error(ErrorCode::ValidationError, "epsilon_list must be strictly decreasing");
            }
        }
    }
    if (s.contains("delta_rule")) {
        const json& r = s["delta_rule"];
        allow_only(r, "simulation.delta_rule", {"kind", "kappa", "delta"});
        const std::string kind = r.contains("kind") && r["kind"].is_string() ? r["kind"].get<std::string>() : "";
        if (kind == "explicit") {
            sim.rule.kind = DeltaRule::Kind::Explicit;
            if (r.contains("delta")) {
                invalid("simulation.delta_rule.delta", "is only valid for the exponential rule");
            }
            if (r.contains("kappa")) {
                sim.rule.kappa = positive(r["kappa"], "simulation.delta_rule.kappa");
            }
        } else if (kind == "exponential") {
            sim.rule.kind = DeltaRule::Kind::Exponential;
            if (r.contains("kappa")) {
                invalid("simulation.delta_rule.kappa", "is only valid for the explicit rule");
            }
            if (!r.contains("delta")) {
                invalid("simulation.delta_rule.delta", "is required for the exponential rule");
            }
            sim.rule.delta = positive(r["delta"], "simulation.delta_rule.delta");
        } else {
            invalid("simulation.delta_rule.kind", "must be \"explicit\" or \"exponential\"");
        }
    }
    if (s.contains("Delta")) {
        sim.coarse_step = positive(s["Delta"], "simulation.Delta");
    }
    if (s.contains("replicas")) {
        sim.replicas = count(s["replicas"], "simulation.replicas", 1);
    }
    if (s.contains("x0")) {
        sim.x0 = number_list(s["x0"], "simulation.x0");
    }
    if (s.contains("v0")) {
        sim.v0 = number_list(s["v0"], "simulation.v0");
    }
    if (s.contains("mode")) {
        const std::string mode = s["mode"].is_string() ? s["mode"].get<std::string>() : "";
        if (mode == "state-only") {
            cfg.model.mode = ModelMode::StateOnly;
        } else if (mode == "extension") {
            cfg.model.mode = ModelMode::Extension;
        } else {
            invalid("simulation.mode", "must be \"state-only\" or \"extension\"");
        }
    }
    if (s.contains("exclude_self_term")) {
        if (!s["exclude_self_term"].is_boolean()) {
            invalid("simulation.exclude_self_term", "must be a boolean");
        }
        sim.exclude_self_term = s["exclude_self_term"].get<bool>();
    }
}

void parse_probe(const json& p, RunConfig& cfg) {
    allow_only(p, "probe", {"lo", "hi", "points_per_axis", "measures", "measure_samples", "seed", "fd_step"});
    ProbeConfig& probe = cfg.probe;
    if (p.contains("lo")) {
        probe.lo = number(p["lo"], "probe.lo");
    }
    if (p.contains("hi")) {
        probe.hi = number(p["hi"], "probe.hi");
    }
    if (!(probe.lo <= probe.hi)) {
        invalid("probe.lo", "must not exceed probe.hi");
    }
    if (p.contains("points_per_axis")) {
        probe.points_per_axis = count(p["points_per_axis"], "probe.points_per_axis", 1);
    }
    if (p.contains("measures")) {
        probe.measures = count(p["measures"], "probe.measures", 1);
    }
    if (p.contains("measure_samples")) {
        probe.measure_samples = count(p["measure_samples"], "probe.measure_samples", 1);
    }
    if (p.contains("seed")) {
        probe.seed = count(p["seed"], "probe.seed", 0);
    }
    if (p.contains("fd_step")) {
        probe.fd_step = positive(p["fd_step"], "probe.fd_step");
    }
}

void check_consistency(const RunConfig& cfg) {
    const SimulationBlock& sim = cfg.simulation;
    const ModelPtr model = model_library(cfg.model);
    if (sim.d && *sim.d != model->dim()) {
        invalid("simulation.d", "is " + std::to_string(*sim.d) + " but the model has dimension " +
                                    std::to_string(model->dim()));
    }
    if (sim.k && *sim.k != model->noise_dim()) {
        invalid("simulation.k", "is " + std::to_string(*sim.k) + " but the model has noise dimension " +
                                    std::to_string(model->noise_dim()));
    }
    if (!sim.x0.empty() && sim.x0.size() != model->dim()) {
        invalid("simulation.x0", "must have " + std::to_string(model->dim()) + " entries");
    }
    if (!sim.v0.empty() && sim.v0.size() != model->dim()) {
        invalid("simulation.v0", "must have " + std::to_string(model->dim()) + " entries");
    }
    for (double eps : sim.epsilons) {
        const double delta = resolve_fine_step(sim.rule, eps, sim.coarse_step);
        try {
            (void)grid_shape(delta, sim.coarse_step, sim.horizon);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::GridMismatch) {
                throw;
            }
            invalid("simulation.Delta", "must be an integer multiple of delta and divide T (eps = " +
                                            std::to_string(eps) + "): " + e.what());
        }
    }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t col = 0;
        const std::size_t line = byte_to_line_col(text, e.byte, col);
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                               e.what());
    }
    RunConfig cfg;
    allow_only(doc, "", {"seed", "output_dir", "model", "simulation", "probe"});
    if (doc.contains("seed")) {
        cfg.seed = count(doc["seed"], "seed", 0);
    }
    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string() || doc["output_dir"].get<std::string>().empty()) {
            invalid("output_dir", "must be a non-empty string");
        }
        cfg.output_dir = doc["output_dir"].get<std::string>();
    }
    if (!doc.contains("model")) {
        invalid("model", "is required");
    }
    parse_model(doc["model"], cfg);
    if (doc.contains("simulation")) {
        parse_simulation(doc["simulation"], cfg);
    }
    if (doc.contains("probe")) {
        parse_probe(doc["probe"], cfg);
    }
    check_consistency(cfg);
    return cfg;
}

ConvergenceSetup convergence_setup(const RunConfig& cfg, unsigned threads) {
    const SimulationBlock& sim = cfg.simulation;
    ConvergenceSetup setup;
    setup.epsilons = sim.epsilons;
    setup.horizon = sim.horizon;
    setup.coarse_step = sim.coarse_step;
    setup.particles = sim.particles;
    setup.replicas = sim.replicas;
    setup.seed = cfg.seed;
    setup.rule = sim.rule;
    setup.x0 = sim.x0;
    setup.v0 = sim.v0;
    setup.threads = threads;
    setup.exclude_self_term = sim.exclude_self_term;
    setup.probe = cfg.probe;
    return setup;
}

}  // namespace sklimit
