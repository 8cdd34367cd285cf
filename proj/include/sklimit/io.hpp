#pragma once

#include "sklimit/exper.hpp"
#include "sklimit/sim.hpp"

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

namespace sklimit {

/// 17 significant digits, round-trip exact for doubles.
/// Non-finite values become "nan", "inf" or "-inf".
[[nodiscard]] std::string format_double(double v);

/// Serializes with 17-significant-digit numbers (non-finite as null) and
/// insertion-ordered keys; indent < 0 gives a single line.
[[nodiscard]] std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

[[nodiscard]] nlohmann::ordered_json model_to_json(const ModelSpec& spec);
[[nodiscard]] nlohmann::ordered_json matrix_to_json(const Matrix& m);

/// Fields: model, particles, T, Delta, epsilons, errors, stderrs, replicas,
/// fine_steps, mean_abs_S_tilde, ratios, slope, intercept, r2.
[[nodiscard]] nlohmann::ordered_json report_to_json(const ConvergenceReport& report);
/// epsilon,error,stderr,ratio_sqrt
[[nodiscard]] std::string report_csv(const ConvergenceReport& report);
/// t,replica,particle,component,x_eps,v_eps,x_limit
void write_path_csv(std::ostream& os, std::span<const PathRow> rows, bool header = true);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
/// Creates parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace sklimit
