#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sklimit {

enum class ErrorCode {
    NonFinite,
    UnstableFriction,
    SingularSystem,
    SpectrumOverlap,
    ToleranceNotMet,
    UnknownFamily,
    ParameterViolation,
    DimensionMismatch,
    CountMismatch,
    SizeLimitExceeded,
    StepTooLarge,
    NumericalBlowup,
    GridMismatch,
    AssumptionViolated,
    InsufficientReplicas,
    DegenerateFit,
    ParseError,
    ValidationError,
    IoError,
};

[[nodiscard]] std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the assumption validator; carries the probe point where the
/// friction lost uniform ellipticity.
class AssumptionViolatedError : public Error {
public:
    AssumptionViolatedError(const std::string& message, std::vector<double> probe_point)
        : Error(ErrorCode::AssumptionViolated, message), point_(std::move(probe_point)) {}

    [[nodiscard]] const std::vector<double>& probe_point() const noexcept { return point_; }

private:
    std::vector<double> point_;
};

}  // namespace sklimit
