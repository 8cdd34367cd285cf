#pragma once

#include "sklimit/assumptions.hpp"
#include "sklimit/exper.hpp"
#include "sklimit/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sklimit {

struct SimulationBlock {
    std::optional<std::size_t> d;  ///< checked against the model when given
    std::optional<std::size_t> k;
    std::size_t particles = 1;
    double horizon = 1.0;
    Vec epsilons{0.1, 0.05, 0.02, 0.01};
    DeltaRule rule;
    double coarse_step = 0.01;
    std::size_t replicas = 100;
    Vec x0;
    Vec v0;
    bool exclude_self_term = false;
};

/// Document layout:
///   {"seed": 0, "output_dir": ".",
///    "model": {"family": "...", "params": {...}},
///    "simulation": {"d", "k", "N", "T", "epsilon" | "epsilon_list",
///                   "delta_rule": {"kind": "explicit", "kappa"} | {"kind": "exponential", "delta"},
///                   "Delta", "replicas", "x0", "v0", "mode", "exclude_self_term"},
///    "probe": {"lo", "hi", "points_per_axis", "measures", "measure_samples", "seed"}}
/// Only "model.family" is required.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    ModelSpec model;
    SimulationBlock simulation;
    ProbeConfig probe;
};

/// Strict: unknown keys are rejected. Throws ParseError (with line and
/// column) for malformed JSON and ValidationError naming the offending field.
/// Model parameters are checked by building the model, so UnknownFamily and
/// ParameterViolation propagate.
[[nodiscard]] RunConfig parse_config(std::string_view text);

[[nodiscard]] ConvergenceSetup convergence_setup(const RunConfig& cfg, unsigned threads);

}  // namespace sklimit
