#include "sklimit/exper.hpp"

#include "sklimit/error.hpp"
#include "sklimit/matx.hpp"
#include "sklimit/noise.hpp"
#include "sklimit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sklimit {

namespace {

struct Moments {
    double mean;
    double std_error;
};

Moments moments(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    const double n = static_cast<double>(xs.size());
    const double mean = s / n;
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

void check_epsilons(std::span<const double> eps) {
    if (eps.empty()) {
        throw Error(ErrorCode::ValidationError, "epsilon list must not be empty");
    }
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0) || !std::isfinite(eps[i])) {
            throw Error(ErrorCode::ValidationError, "epsilon values must be positive and finite");
        }
        if (i > 0 && !(eps[i] < eps[i - 1])) {
            throw Error(ErrorCode::ValidationError, "epsilon_list must be strictly decreasing");
        }
    }
}

// dx = gamma^{-1} F dt + gamma^{-1} sigma dW with every coefficient at the
// pre-step state.
void naive_overdamped_step(const SystemModel& model, Vec& x, std::size_t particles, double step,
                           std::span<const double> dw) {
    const std::size_t d = model.dim();
    const std::size_t k = model.noise_dim();
    const EmpiricalMeasure mu(d, x);
    Vec next(x.size());
    for (std::size_t i = 0; i < particles; ++i) {
        const auto xi = mu.sample(i);
        const Matrix inv = inverse(model.friction(xi, mu));
        const Vec drift = inv * model.force(xi, mu);
        const Vec kick = inv * (model.noise(xi, mu) * dw.subspan(i * k, k));
        for (std::size_t l = 0; l < d; ++l) {
            next[i * d + l] = xi[l] + drift[l] * step + kick[l];
        }
    }
    x = std::move(next);
}

}  // namespace

double resolve_fine_step(const DeltaRule& rule, double eps, double coarse_step) {
    if (!(coarse_step > 0.0) || !(eps > 0.0)) {
        throw Error(ErrorCode::ValidationError, "eps and Delta must be positive");
    }
    if (rule.kind == DeltaRule::Kind::Exponential) {
        if (!(rule.delta > 0.0) || !std::isfinite(rule.delta)) {
            throw Error(ErrorCode::ValidationError, "delta_rule.delta must be positive");
        }
        return rule.delta;
    }
    if (!(rule.kappa > 0.0) || !std::isfinite(rule.kappa)) {
        throw Error(ErrorCode::ValidationError, "delta_rule.kappa must be positive");
    }
    const double m = std::max(1.0, std::ceil(coarse_step * rule.kappa / eps - 1e-9));
    return coarse_step / m;
}

Scheme scheme_for(const DeltaRule& rule) noexcept {
    return rule.kind == DeltaRule::Kind::Exponential ? Scheme::Exponential : Scheme::ExplicitEuler;
}

ConvergenceReport run_convergence(const SystemModel& model, const ConvergenceSetup& setup) {
    check_epsilons(setup.epsilons);
    if (setup.replicas < 2) {
        throw Error(ErrorCode::InsufficientReplicas, "need at least 2 replicas, got " +
                                                         std::to_string(setup.replicas));
    }
    if (setup.particles == 0) {
        throw Error(ErrorCode::ValidationError, "N must be positive");
    }
    if (setup.validate) {
        (void)validate_assumptions(model, setup.probe);
    }
    ConvergenceReport report;
    report.particles = setup.particles;
    report.horizon = setup.horizon;
    report.coarse_step = setup.coarse_step;
    for (double eps : setup.epsilons) {
        CoupledRunConfig cfg;
        cfg.eps = eps;
        cfg.horizon = setup.horizon;
        cfg.coarse_step = setup.coarse_step;
        cfg.fine_step = resolve_fine_step(setup.rule, eps, setup.coarse_step);
        cfg.particles = setup.particles;
        cfg.scheme = scheme_for(setup.rule);
        cfg.kappa = setup.rule.kappa;
        cfg.x0 = setup.x0;
        cfg.v0 = setup.v0;
        cfg.exclude_self_term = setup.exclude_self_term;
        (void)grid_shape(cfg.fine_step, cfg.coarse_step, cfg.horizon);

        std::vector<CoupledResult> results(setup.replicas);
        parallel_for(setup.replicas, setup.threads, [&](std::size_t r) {
            results[r] = simulate_coupled(model, cfg, r, setup.seed);
        });
        Vec sups(setup.replicas);
        double tilde_sum = 0.0;
        std::size_t tilde_count = 0;
        for (std::size_t r = 0; r < setup.replicas; ++r) {
            sups[r] = results[r].sup_diff;
            tilde_sum += results[r].tilde_norm_sum;
            tilde_count += results[r].tilde_evaluations;
        }
        const Moments m = moments(sups);
        EpsilonRow row;
        row.eps = eps;
        row.error = m.mean;
        row.std_error = m.std_error;
        row.ratio_sqrt = m.mean / std::sqrt(eps);
        row.fine_step = cfg.fine_step;
        row.replicas = setup.replicas;
        row.mean_abs_tilde = tilde_count > 0 ? tilde_sum / static_cast<double>(tilde_count) : 0.0;
        report.rows.push_back(row);
    }
    try {
        report.fit = fit_rate(report);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateFit) {
            throw;
        }
    }
    return report;
}

ConvergenceReport run_convergence(const ModelSpec& spec, const ConvergenceSetup& setup) {
    const ModelPtr model = model_library(spec);
    ConvergenceReport report = run_convergence(*model, setup);
    report.model = spec;
    return report;
}

RateFit fit_rate(const ConvergenceReport& report) {
    Vec eps;
    Vec err;
    for (const EpsilonRow& row : report.rows) {
        eps.push_back(row.eps);
        err.push_back(row.error);
    }
    return fit_power_law(eps, err);
}

RateFit fit_power_law(std::span<const double> eps, std::span<const double> errors) {
    if (eps.size() != errors.size()) {
        throw Error(ErrorCode::CountMismatch, "eps and error lists differ in length");
    }
    if (eps.size() < 3) {
        throw Error(ErrorCode::DegenerateFit, "rate fit needs at least 3 points");
    }
    const std::size_t n = eps.size();
    Vec lx(n);
    Vec ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(errors[i] > 0.0) || !(eps[i] > 0.0)) {
            throw Error(ErrorCode::DegenerateFit, "rate fit needs positive errors, got " + std::to_string(errors[i]) +
                                                      " at eps = " + std::to_string(eps[i]));
        }
        lx[i] = std::log(eps[i]);
        ly[i] = std::log(errors[i]);
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw Error(ErrorCode::DegenerateFit, "rate fit needs distinct eps values");
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ssr += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    return fit;
}

ReductionResult constant_reduction_check(const SystemModel& model, double eps_smallest, std::uint64_t seed,
                                         const ReductionSetup& setup) {
    const std::size_t d = model.dim();
    const std::size_t k = model.noise_dim();
    const std::size_t n = setup.particles;
    Vec x0 = setup.x0.empty() ? Vec(d, 0.0) : setup.x0;
    if (x0.size() != d) {
        throw Error(ErrorCode::DimensionMismatch, "x0 must have " + std::to_string(d) + " entries");
    }
    {
        const EmpiricalMeasure probe = EmpiricalMeasure::dirac(x0);
        bool constant = model.friction_measure_independent();
        for (const Matrix& s : model.friction_dx(x0, probe)) {
            constant = constant && s.max_abs() == 0.0;
        }
        if (!constant) {
            throw Error(ErrorCode::ValidationError, "reduction check needs a constant-friction model");
        }
    }
    if (setup.replicas < 2) {
        throw Error(ErrorCode::InsufficientReplicas, "need at least 2 replicas");
    }
    const double fine_step = resolve_fine_step(setup.rule, eps_smallest, setup.coarse_step);
    const GridShape grid = grid_shape(fine_step, setup.coarse_step, setup.horizon);
    const NoiseDriver driver(seed, fine_step, grid.steps_per_window);
    LimitStepOptions lopts;
    lopts.force_tilde_term = setup.force_tilde_term;

    Vec gaps(setup.replicas, 0.0);
    parallel_for(setup.replicas, setup.threads, [&](std::size_t r) {
        ParticleEnsembleLimit lim = ParticleEnsembleLimit::uniform(n, x0);
        Vec naive = lim.x;
        Vec fine(grid.steps_per_window * n * k);
        Vec coarse(n * k);
        double gap = 0.0;
        for (std::size_t w = 0; w < grid.windows; ++w) {
            driver.window(r, w, n, k, fine, coarse);
            step_limit_em(lim, model, setup.coarse_step, coarse, lopts);
            naive_overdamped_step(model, naive, n, setup.coarse_step, coarse);
            for (std::size_t i = 0; i < naive.size(); ++i) {
                gap = std::max(gap, std::abs(lim.x[i] - naive[i]));
            }
        }
        gaps[r] = gap;
    });

    ReductionResult out;
    out.eps = eps_smallest;
    out.replicas = setup.replicas;
    out.max_path_gap = *std::max_element(gaps.begin(), gaps.end());
    if (setup.compare_eps_system) {
        CoupledRunConfig cfg;
        cfg.eps = eps_smallest;
        cfg.horizon = setup.horizon;
        cfg.fine_step = fine_step;
        cfg.coarse_step = setup.coarse_step;
        cfg.particles = n;
        cfg.scheme = scheme_for(setup.rule);
        cfg.kappa = setup.rule.kappa;
        cfg.x0 = x0;
        cfg.v0 = setup.v0;
        Vec sups(setup.replicas);
        parallel_for(setup.replicas, setup.threads, [&](std::size_t r) {
            sups[r] = simulate_coupled(model, cfg, r, seed).sup_diff;
        });
        const Moments m = moments(sups);
        out.eps_error = m.mean;
        out.eps_std_error = m.std_error;
    }
    return out;
}

}  // namespace sklimit
