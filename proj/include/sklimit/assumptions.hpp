#pragma once

#include "sklimit/matrix.hpp"
#include "sklimit/model.hpp"

#include <cstddef>
#include <cstdint>

namespace sklimit {

inline constexpr double kEllipticityFloor = 1e-8;

/// Probe set: a tensor grid over [lo, hi]^d (random points in the box when
/// the grid would exceed max_points), crossed with `measures` random sample
/// clouds of `measure_samples` points each drawn from the same box.
struct ProbeConfig {
    double lo = -2.0;
    double hi = 2.0;
    std::size_t points_per_axis = 9;
    std::size_t max_points = 4096;
    std::size_t measures = 4;
    std::size_t measure_samples = 8;
    std::uint64_t seed = 7;
    double fd_step = 1e-4;
};

struct AssumptionReport {
    double min_lambda = 0.0;
    Vec argmin_point;
    /// max |f(x + h e_l) - f(x)| / h over probes
    double lip_force_x = 0.0;
    double lip_noise_x = 0.0;
    double lip_friction_x = 0.0;
    double lip_friction_dx = 0.0;
    /// max |f(x, mu) - f(x, nu)| / W2(mu, nu) over probe pairs
    double lip_force_mu = 0.0;
    double lip_noise_mu = 0.0;
    double lip_friction_mu = 0.0;
    double max_friction_dmu = 0.0;
    std::size_t probes = 0;
    bool violated = false;
};

/// Evaluates every probe and records the worst cases; never throws on a
/// violation.
[[nodiscard]] AssumptionReport probe_assumptions(const SystemModel& model, const ProbeConfig& cfg = {});

/// As probe_assumptions, but throws AssumptionViolatedError carrying the
/// offending point when min lambda_1 of sym(gamma) <= 1e-8.
AssumptionReport validate_assumptions(const SystemModel& model, const ProbeConfig& cfg = {});

}  // namespace sklimit
