#include "sklimit/sim.hpp"

#include "sklimit/drift.hpp"
#include "sklimit/error.hpp"
#include "sklimit/matx.hpp"
#include "sklimit/noise.hpp"
#include "sklimit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sklimit {

namespace {

void check_increments(std::span<const double> dw, std::size_t particles, std::size_t k) {
    if (dw.size() != particles * k) {
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(particles * k) +
                                                      " noise increments, got " + std::to_string(dw.size()));
    }
}

void check_blowup(std::span<const double> state, double cap, const char* what) {
    for (double s : state) {
        if (!std::isfinite(s) || std::abs(s) >= cap) {
            throw Error(ErrorCode::NumericalBlowup, std::string(what) + " left the region |state| < " +
                                                        std::to_string(cap));
        }
    }
}

Vec initial_point(std::span<const double> p, std::size_t d, const char* name) {
    if (p.empty()) {
        return Vec(d, 0.0);
    }
    if (p.size() != d) {
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must have " + std::to_string(d) + " entries");
    }
    return {p.begin(), p.end()};
}

double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return s / static_cast<double>(xs.size());
}

double stderr_of(std::span<const double> xs, double mean) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : xs) {
        s += (x - mean) * (x - mean);
    }
    return std::sqrt(s / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

}  // namespace

ParticleEnsembleFull ParticleEnsembleFull::uniform(double eps, std::size_t particles, std::span<const double> x0,
                                                   std::span<const double> v0) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw Error(ErrorCode::ValidationError, "eps must be positive");
    }
    if (particles == 0 || x0.empty()) {
        throw Error(ErrorCode::CountMismatch, "ensemble needs at least one particle and one dimension");
    }
    const std::size_t d = x0.size();
    const Vec v = initial_point(v0, d, "v0");
    ParticleEnsembleFull ens{0.0, eps, particles, d, Vec(particles * d), Vec(particles * d)};
    for (std::size_t i = 0; i < particles; ++i) {
        std::copy(x0.begin(), x0.end(), ens.x.begin() + static_cast<std::ptrdiff_t>(i * d));
        std::copy(v.begin(), v.end(), ens.v.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    require_finite(ens.x, "x0");
    require_finite(ens.v, "v0");
    return ens;
}

ParticleEnsembleLimit ParticleEnsembleLimit::uniform(std::size_t particles, std::span<const double> x0) {
    if (particles == 0 || x0.empty()) {
        throw Error(ErrorCode::CountMismatch, "ensemble needs at least one particle and one dimension");
    }
    const std::size_t d = x0.size();
    ParticleEnsembleLimit ens{0.0, particles, d, Vec(particles * d)};
    for (std::size_t i = 0; i < particles; ++i) {
        std::copy(x0.begin(), x0.end(), ens.x.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    require_finite(ens.x, "x0");
    return ens;
}

void step_full_em(ParticleEnsembleFull& ens, const SystemModel& model, double delta, std::span<const double> dw,
                  const FullStepOptions& opts) {
    if (!(delta >= 0.0) || delta > ens.eps / opts.kappa * (1.0 + 1e-9)) {
        throw Error(ErrorCode::StepTooLarge, "explicit step " + std::to_string(delta) + " exceeds eps/kappa = " +
                                                 std::to_string(ens.eps / opts.kappa));
    }
    const std::size_t d = ens.dim;
    const std::size_t k = model.noise_dim();
    check_increments(dw, ens.particles, k);
    const EmpiricalMeasure mu = ens.position_measure();
    Vec x_next(ens.x.size());
    Vec v_next(ens.v.size());
    const double rate = delta / ens.eps;
    for (std::size_t i = 0; i < ens.particles; ++i) {
        const auto xi = mu.sample(i);
        const std::span<const double> vi(ens.v.data() + i * d, d);
        const Vec f = model.force(xi, mu);
        const Matrix gamma = model.friction(xi, mu);
        const Vec gv = gamma * vi;
        const Vec kick = model.noise(xi, mu) * dw.subspan(i * k, k);
        for (std::size_t l = 0; l < d; ++l) {
            x_next[i * d + l] = xi[l] + vi[l] * delta;
            v_next[i * d + l] = vi[l] + (f[l] - gv[l]) * rate + kick[l] / ens.eps;
        }
    }
    check_blowup(x_next, opts.blowup_cap, "position");
    check_blowup(v_next, opts.blowup_cap, "velocity");
    ens.x = std::move(x_next);
    ens.v = std::move(v_next);
    ens.t += delta;
}

void step_full_exponential(ParticleEnsembleFull& ens, const SystemModel& model, double delta,
                           std::span<const double> dw, const FullStepOptions& opts) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw Error(ErrorCode::ValidationError, "step must be finite and non-negative");
    }
    const std::size_t d = ens.dim;
    const std::size_t k = model.noise_dim();
    check_increments(dw, ens.particles, k);
    const EmpiricalMeasure mu = ens.position_measure();
    Vec x_next(ens.x.size());
    Vec v_next(ens.v.size());
    const Matrix id = Matrix::identity(d);
    for (std::size_t i = 0; i < ens.particles; ++i) {
        const auto xi = mu.sample(i);
        const std::span<const double> vi(ens.v.data() + i * d, d);
        const Matrix gamma = model.friction(xi, mu);
        const Matrix decay = expm(gamma * (-delta / ens.eps));
        const Matrix half = expm(gamma * (-delta / (2.0 * ens.eps)));
        const Vec ev = decay * vi;
        const Vec drive = inverse(StableMatrix::check(gamma).matrix()) * (id - decay) * model.force(xi, mu);
        const Vec kick = half * (model.noise(xi, mu) * dw.subspan(i * k, k));
        for (std::size_t l = 0; l < d; ++l) {
            const double v_new = ev[l] + drive[l] + kick[l] / ens.eps;
            v_next[i * d + l] = v_new;
            x_next[i * d + l] = xi[l] + delta * (vi[l] + v_new) / 2.0;
        }
    }
    check_blowup(x_next, opts.blowup_cap, "position");
    check_blowup(v_next, opts.blowup_cap, "velocity");
    ens.x = std::move(x_next);
    ens.v = std::move(v_next);
    ens.t += delta;
}

void step_limit_em(ParticleEnsembleLimit& ens, const SystemModel& model, double step, std::span<const double> dw,
                   const LimitStepOptions& opts, LimitStepStats* stats) {
    if (!(step >= 0.0) || !std::isfinite(step)) {
        throw Error(ErrorCode::ValidationError, "step must be finite and non-negative");
    }
    const std::size_t d = ens.dim;
    const std::size_t k = model.noise_dim();
    check_increments(dw, ens.particles, k);
    const EmpiricalMeasure mu = ens.position_measure();
    const SampleCoefficients at = evaluate_at_samples(model, mu);
    const bool with_tilde = opts.force_tilde_term || !model.friction_measure_independent();
    Vec x_next(ens.x.size());
    for (std::size_t i = 0; i < ens.particles; ++i) {
        const auto xi = mu.sample(i);
        const Matrix& gamma = at.friction[i];
        const Matrix& sigma = at.noise[i];
        const Matrix inv = inverse(StableMatrix::check(gamma).matrix());
        Vec drift = inv * model.force(xi, mu);
        const Vec s = drift_S(model, xi, mu, gamma, sigma);
        Vec s_tilde(d, 0.0);
        if (with_tilde) {
            TildeDriftOptions topts;
            if (opts.exclude_self_term) {
                topts.exclude_sample = i;
            }
            s_tilde = drift_S_tilde(model, xi, mu, at, gamma, sigma, topts);
            if (stats != nullptr) {
                stats->tilde_norm_sum += norm2(s_tilde);
                ++stats->tilde_evaluations;
            }
        }
        const Vec kick = inv * (sigma * dw.subspan(i * k, k));
        for (std::size_t l = 0; l < d; ++l) {
            drift[l] = drift[l] + s[l] + s_tilde[l];
            x_next[i * d + l] = xi[l] + drift[l] * step + kick[l];
        }
    }
    check_blowup(x_next, opts.blowup_cap, "position");
    ens.x = std::move(x_next);
    ens.t += step;
}

GridShape grid_shape(double fine_step, double coarse_step, double horizon) {
    if (!(fine_step > 0.0) || !(coarse_step > 0.0) || !(horizon > 0.0) || !std::isfinite(fine_step) ||
        !std::isfinite(coarse_step) || !std::isfinite(horizon)) {
        throw Error(ErrorCode::ValidationError, "steps and horizon must be positive and finite");
    }
    const double m = std::round(coarse_step / fine_step);
    if (m < 1.0 || std::abs(m * fine_step - coarse_step) > 1e-9 * coarse_step) {
        throw Error(ErrorCode::GridMismatch, "coarse step " + std::to_string(coarse_step) +
                                                 " is not an integer multiple of fine step " +
                                                 std::to_string(fine_step));
    }
    const double n = std::round(horizon / coarse_step);
    if (n < 1.0 || std::abs(n * coarse_step - horizon) > 1e-9 * horizon) {
        throw Error(ErrorCode::GridMismatch, "horizon " + std::to_string(horizon) +
                                                 " is not an integer multiple of coarse step " +
                                                 std::to_string(coarse_step));
    }
    return {static_cast<std::size_t>(m), static_cast<std::size_t>(n)};
}

CoupledResult simulate_coupled(const SystemModel& model, const CoupledRunConfig& cfg, std::uint64_t replica,
                               std::uint64_t seed) {
    const GridShape grid = grid_shape(cfg.fine_step, cfg.coarse_step, cfg.horizon);
    const std::size_t d = model.dim();
    const std::size_t k = model.noise_dim();
    const std::size_t n = cfg.particles;
    const Vec x0 = initial_point(cfg.x0, d, "x0");
    const Vec v0 = initial_point(cfg.v0, d, "v0");
    const NoiseDriver driver(seed, cfg.fine_step, grid.steps_per_window);
    ParticleEnsembleFull full = ParticleEnsembleFull::uniform(cfg.eps, n, x0, v0);
    ParticleEnsembleLimit lim = ParticleEnsembleLimit::uniform(n, x0);
    const FullStepOptions fopts{cfg.kappa, cfg.blowup_cap};
    LimitStepOptions lopts;
    lopts.exclude_self_term = cfg.exclude_self_term;
    lopts.blowup_cap = cfg.blowup_cap;
    LimitStepStats stats;

    const std::size_t block = n * k;
    Vec fine(grid.steps_per_window * block);
    Vec coarse(block);
    CoupledResult out;
    auto record = [&](double t) {
        if (!cfg.record_paths) {
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < d; ++l) {
                out.paths.push_back({t, replica, i, l, full.x[i * d + l], full.v[i * d + l], lim.x[i * d + l]});
            }
        }
    };
    record(0.0);
    for (std::size_t w = 0; w < grid.windows; ++w) {
        driver.window(replica, w, n, k, fine, coarse);
        for (std::size_t j = 0; j < grid.steps_per_window; ++j) {
            const std::span<const double> dw(fine.data() + j * block, block);
            if (cfg.scheme == Scheme::Exponential) {
                step_full_exponential(full, model, cfg.fine_step, dw, fopts);
            } else {
                step_full_em(full, model, cfg.fine_step, dw, fopts);
            }
        }
        step_limit_em(lim, model, cfg.coarse_step, coarse, lopts, &stats);
        const double t = static_cast<double>(w + 1) * cfg.coarse_step;
        full.t = t;
        lim.t = t;
        for (std::size_t i = 0; i < n; ++i) {
            double sq = 0.0;
            for (std::size_t l = 0; l < d; ++l) {
                const double diff = full.x[i * d + l] - lim.x[i * d + l];
                sq += diff * diff;
            }
            out.sup_diff = std::max(out.sup_diff, sq);
        }
        record(t);
    }
    out.tilde_norm_sum = stats.tilde_norm_sum;
    out.tilde_evaluations = stats.tilde_evaluations;
    return out;
}

VelocityDiagnostics diagnostics_velocity(const SystemModel& model, const VelocityDiagConfig& cfg,
                                         std::size_t replicas, std::uint64_t seed) {
    if (replicas == 0) {
        throw Error(ErrorCode::InsufficientReplicas, "diagnostics need at least one replica");
    }
    const GridShape grid = grid_shape(cfg.fine_step, cfg.sample_step, cfg.horizon);
    const std::size_t d = model.dim();
    const std::size_t k = model.noise_dim();
    const std::size_t n = cfg.particles;
    const Vec x0 = initial_point(cfg.x0, d, "x0");
    const Vec v0 = initial_point(cfg.v0, d, "v0");
    const NoiseDriver driver(seed, cfg.fine_step, grid.steps_per_window);
    const FullStepOptions fopts{cfg.kappa, kDefaultBlowupCap};
    const std::size_t points = grid.windows + 1;

    std::vector<Vec> curves(replicas);
    Vec sup4(replicas);
    parallel_for(replicas, cfg.threads, [&](std::size_t r) {
        ParticleEnsembleFull ens = ParticleEnsembleFull::uniform(cfg.eps, n, x0, v0);
        const std::size_t block = n * k;
        Vec fine(grid.steps_per_window * block);
        Vec coarse(block);
        Vec curve(points);
        Vec sup_speed(n, 0.0);
        auto observe = [&](std::size_t point) {
            double e_v2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double speed = cfg.eps * norm2(std::span<const double>(ens.v.data() + i * d, d));
                sup_speed[i] = std::max(sup_speed[i], speed);
                if (point < points) {
                    e_v2 += speed * speed / cfg.eps;
                }
            }
            if (point < points) {
                curve[point] = e_v2 / static_cast<double>(n);
            }
        };
        observe(0);
        for (std::size_t w = 0; w < grid.windows; ++w) {
            driver.window(r, w, n, k, fine, coarse);
            for (std::size_t j = 0; j < grid.steps_per_window; ++j) {
                const std::span<const double> dw(fine.data() + j * block, block);
                if (cfg.scheme == Scheme::Exponential) {
                    step_full_exponential(ens, model, cfg.fine_step, dw, fopts);
                } else {
                    step_full_em(ens, model, cfg.fine_step, dw, fopts);
                }
                observe(j + 1 == grid.steps_per_window ? w + 1 : points);
            }
        }
        double s4 = 0.0;
        for (double s : sup_speed) {
            s4 += s * s * s * s;
        }
        sup4[r] = s4 / static_cast<double>(n);
        curves[r] = std::move(curve);
    });

    VelocityDiagnostics out;
    out.replicas = replicas;
    Vec column(replicas);
    for (std::size_t p = 0; p < points; ++p) {
        for (std::size_t r = 0; r < replicas; ++r) {
            column[r] = curves[r][p];
        }
        const double m = mean_of(column);
        out.times.push_back(static_cast<double>(p) * cfg.sample_step);
        out.e_v2_curve.push_back(m);
        if (p == 0 || m > out.mean_e_v2) {
            out.mean_e_v2 = m;
            out.mean_e_v2_stderr = stderr_of(column, m);
            out.argmax_time = out.times.back();
        }
    }
    out.mean_sup_ev_4 = mean_of(sup4);
    out.mean_sup_ev_4_stderr = stderr_of(sup4, out.mean_sup_ev_4);
    return out;
}

}  // namespace sklimit
