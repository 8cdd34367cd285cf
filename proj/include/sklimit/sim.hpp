#pragma once

#include "sklimit/matrix.hpp"
#include "sklimit/measure.hpp"
#include "sklimit/model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sklimit {

inline constexpr double kDefaultKappa = 20.0;
inline constexpr double kDefaultBlowupCap = 1e8;

/// State of the inertial system. x and v are N x d row-major.
struct ParticleEnsembleFull {
    double t = 0.0;
    double eps = 1.0;
    std::size_t particles = 0;
    std::size_t dim = 0;
    Vec x;
    Vec v;

    /// Every particle starts at (x0, v0); empty v0 means rest.
    static ParticleEnsembleFull uniform(double eps, std::size_t particles, std::span<const double> x0,
                                        std::span<const double> v0 = {});

    [[nodiscard]] EmpiricalMeasure position_measure() const { return {dim, x}; }
};

struct ParticleEnsembleLimit {
    double t = 0.0;
    std::size_t particles = 0;
    std::size_t dim = 0;
    Vec x;

    static ParticleEnsembleLimit uniform(std::size_t particles, std::span<const double> x0);

    [[nodiscard]] EmpiricalMeasure position_measure() const { return {dim, x}; }
};

struct FullStepOptions {
    double kappa = kDefaultKappa;
    double blowup_cap = kDefaultBlowupCap;
};

/// x <- x + v delta;  v <- v + (F - gamma v) delta/eps + sigma dW / eps,
/// all coefficients taken at the pre-step state. `dw` holds N*k increments,
/// particle-major. Throws StepTooLarge when delta > eps/kappa.
void step_full_em(ParticleEnsembleFull& ens, const SystemModel& model, double delta, std::span<const double> dw,
                  const FullStepOptions& opts = {});

/// Frozen-coefficient exponential step:
///   v' = E v + gamma^{-1}(I - E) F + e^{-gamma delta/(2 eps)} sigma dW / eps,  E = e^{-gamma delta/eps}
///   x' = x + delta (v + v') / 2
/// No stiffness restriction on delta.
void step_full_exponential(ParticleEnsembleFull& ens, const SystemModel& model, double delta,
                           std::span<const double> dw, const FullStepOptions& opts = {});

struct LimitStepOptions {
    /// Evaluate S~ even when the model reports a measure-independent friction.
    bool force_tilde_term = false;
    /// Leave the particle's own sample out of the S~ average.
    bool exclude_self_term = false;
    double blowup_cap = kDefaultBlowupCap;
};

struct LimitStepStats {
    double tilde_norm_sum = 0.0;
    std::size_t tilde_evaluations = 0;
};

/// x <- x + [gamma^{-1} F + S + S~] Delta + gamma^{-1} sigma dW
void step_limit_em(ParticleEnsembleLimit& ens, const SystemModel& model, double step, std::span<const double> dw,
                   const LimitStepOptions& opts = {}, LimitStepStats* stats = nullptr);

enum class Scheme { ExplicitEuler, Exponential };

struct CoupledRunConfig {
    double eps = 0.1;
    double horizon = 1.0;
    double fine_step = 0.0;
    double coarse_step = 0.0;
    std::size_t particles = 1;
    Scheme scheme = Scheme::ExplicitEuler;
    double kappa = kDefaultKappa;
    Vec x0;  ///< empty means the origin
    Vec v0;  ///< empty means rest
    bool record_paths = false;
    bool exclude_self_term = false;
    double blowup_cap = kDefaultBlowupCap;
};

struct PathRow {
    double t;
    std::uint64_t replica;
    std::size_t particle;
    std::size_t component;
    double x_eps;
    double v_eps;
    double x_limit;
};

struct CoupledResult {
    double sup_diff = 0.0;
    std::vector<PathRow> paths;
    double tilde_norm_sum = 0.0;
    std::size_t tilde_evaluations = 0;
};

/// Number of fine steps per coarse window and of coarse windows in
/// [0, horizon]. Throws GridMismatch unless both ratios are integral to 1e-9.
struct GridShape {
    std::size_t steps_per_window;
    std::size_t windows;
};
[[nodiscard]] GridShape grid_shape(double fine_step, double coarse_step, double horizon);

/// Runs both systems from the same initial positions on synchronously
/// coupled noise. sup_diff is the max over coarse grid points and particles
/// of |x^eps_i - x_i|^2.
[[nodiscard]] CoupledResult simulate_coupled(const SystemModel& model, const CoupledRunConfig& cfg,
                                             std::uint64_t replica, std::uint64_t seed);

struct VelocityDiagConfig {
    double eps = 0.1;
    double horizon = 1.0;
    double fine_step = 0.0;
    /// Grid on which eps E|v_t|^2 is sampled; must be a multiple of fine_step.
    double sample_step = 0.0;
    std::size_t particles = 1;
    Scheme scheme = Scheme::ExplicitEuler;
    double kappa = kDefaultKappa;
    Vec x0;
    Vec v0;
    unsigned threads = 1;
};

struct VelocityDiagnostics {
    /// sup over the sample grid of the replica mean of eps |v_t|^2
    /// (averaged over particles), and its standard error at the argmax.
    double mean_e_v2 = 0.0;
    double mean_e_v2_stderr = 0.0;
    double argmax_time = 0.0;
    /// E[(sup over the fine grid of |eps v_t|)^4]
    double mean_sup_ev_4 = 0.0;
    double mean_sup_ev_4_stderr = 0.0;
    std::vector<double> times;
    std::vector<double> e_v2_curve;
    std::size_t replicas = 0;
};

[[nodiscard]] VelocityDiagnostics diagnostics_velocity(const SystemModel& model, const VelocityDiagConfig& cfg,
                                                       std::size_t replicas, std::uint64_t seed);

}  // namespace sklimit
