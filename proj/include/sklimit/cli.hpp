#pragma once

#include "sklimit/error.hpp"

#include <ostream>

namespace sklimit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitUsage = 64;

[[nodiscard]] int exit_code_for(ErrorCode code) noexcept;

/// Subcommands: solve, validate, simulate, converge, reduce-check.
/// Returns the process exit code; expected failures are reported on `err` as
/// "<ErrorName>: message".
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sklimit
