#pragma once

#include "sklimit/assumptions.hpp"
#include "sklimit/matrix.hpp"
#include "sklimit/model.hpp"
#include "sklimit/sim.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sklimit {

/// How the fine step of the eps-system is chosen. Explicit: the largest
/// delta <= eps/kappa that divides Delta. Exponential: a fixed delta, with
/// the exponential stepper.
struct DeltaRule {
    enum class Kind { Explicit, Exponential };
    Kind kind = Kind::Explicit;
    double kappa = kDefaultKappa;
    double delta = 0.0;
};

[[nodiscard]] double resolve_fine_step(const DeltaRule& rule, double eps, double coarse_step);
[[nodiscard]] Scheme scheme_for(const DeltaRule& rule) noexcept;

struct ConvergenceSetup {
    Vec epsilons;  ///< strictly decreasing
    double horizon = 1.0;
    double coarse_step = 0.01;
    std::size_t particles = 1;
    std::size_t replicas = 100;
    std::uint64_t seed = 0;
    DeltaRule rule;
    Vec x0;
    Vec v0;
    unsigned threads = 1;
    bool exclude_self_term = false;
    bool validate = true;
    ProbeConfig probe;
};

struct EpsilonRow {
    double eps = 0.0;
    double error = 0.0;
    double std_error = 0.0;
    double ratio_sqrt = 0.0;  ///< error / sqrt(eps)
    double fine_step = 0.0;
    std::size_t replicas = 0;
    /// Mean |S~| over all limit-system evaluations; 0 when S~ was skipped.
    double mean_abs_tilde = 0.0;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

struct ConvergenceReport {
    ModelSpec model;
    std::size_t particles = 0;
    double horizon = 0.0;
    double coarse_step = 0.0;
    std::vector<EpsilonRow> rows;
    /// Present when fit_rate succeeds on the rows.
    std::optional<RateFit> fit;
};

/// Monte Carlo estimate of E sup_t |x^eps_t - x_t|^2 per eps. Replica r uses
/// noise key r for every eps. Replicas run on `threads` workers; aggregation
/// is in replica order, so the report does not depend on the thread count.
[[nodiscard]] ConvergenceReport run_convergence(const SystemModel& model, const ConvergenceSetup& setup);
[[nodiscard]] ConvergenceReport run_convergence(const ModelSpec& spec, const ConvergenceSetup& setup);

/// OLS of log error on log eps. Throws DegenerateFit with fewer than 3 points
/// or any non-positive error.
[[nodiscard]] RateFit fit_rate(const ConvergenceReport& report);
[[nodiscard]] RateFit fit_power_law(std::span<const double> eps, std::span<const double> errors);

struct ReductionSetup {
    double horizon = 1.0;
    double coarse_step = 0.01;
    std::size_t particles = 1;
    std::size_t replicas = 100;
    DeltaRule rule;
    Vec x0;
    Vec v0;
    unsigned threads = 1;
    /// Run the limit stepper with the S~ solves even though gamma is constant.
    bool force_tilde_term = false;
    /// Also estimate E sup |x^eps - x|^2 at eps_smallest.
    bool compare_eps_system = true;
};

struct ReductionResult {
    /// max over replicas, grid points and coordinates of
    /// |limit stepper - naive overdamped stepper|
    double max_path_gap = 0.0;
    double eps = 0.0;
    double eps_error = 0.0;
    double eps_std_error = 0.0;
    std::size_t replicas = 0;
};

/// Requires constant friction (zero x- and mu-derivatives). Throws
/// ValidationError otherwise.
[[nodiscard]] ReductionResult constant_reduction_check(const SystemModel& model, double eps_smallest,
                                                       std::uint64_t seed, const ReductionSetup& setup = {});

}  // namespace sklimit
