#include "sklimit/assumptions.hpp"

#include "sklimit/error.hpp"
#include "sklimit/matx.hpp"
#include "sklimit/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace sklimit {

namespace {

double tensor_norm(const Tensor3& t) {
    double s = 0.0;
    for (const Matrix& m : t) {
        const double f = m.frobenius_norm();
        s += f * f;
    }
    return std::sqrt(s);
}

double tensor_distance(const Tensor3& a, const Tensor3& b) {
    double s = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        const double f = (a[l] - b[l]).frobenius_norm();
        s += f * f;
    }
    return std::sqrt(s);
}

double vec_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

std::vector<Vec> probe_points(std::size_t d, const ProbeConfig& cfg, std::mt19937_64& rng) {
    std::vector<Vec> pts;
    const std::size_t per_axis = std::max<std::size_t>(cfg.points_per_axis, 1);
    double total = 1.0;
    for (std::size_t l = 0; l < d; ++l) {
        total *= static_cast<double>(per_axis);
    }
    if (total <= static_cast<double>(cfg.max_points)) {
        const auto n = static_cast<std::size_t>(total);
        const double h = per_axis > 1 ? (cfg.hi - cfg.lo) / static_cast<double>(per_axis - 1) : 0.0;
        for (std::size_t idx = 0; idx < n; ++idx) {
            Vec p(d);
            std::size_t rest = idx;
            for (std::size_t l = 0; l < d; ++l) {
                p[l] = cfg.lo + h * static_cast<double>(rest % per_axis);
                rest /= per_axis;
            }
            pts.push_back(std::move(p));
        }
    } else {
        std::uniform_real_distribution<double> u(cfg.lo, cfg.hi);
        for (std::size_t idx = 0; idx < cfg.max_points; ++idx) {
            Vec p(d);
            for (double& c : p) {
                c = u(rng);
            }
            pts.push_back(std::move(p));
        }
    }
    return pts;
}

std::string format_point(std::span<const double> p) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) {
        os << (i ? ", " : "") << p[i];
    }
    os << ')';
    return os.str();
}

}  // namespace

AssumptionReport probe_assumptions(const SystemModel& model, const ProbeConfig& cfg) {
    if (!(cfg.lo <= cfg.hi) || !(cfg.fd_step > 0.0) || cfg.measures == 0 || cfg.measure_samples == 0) {
        throw Error(ErrorCode::ValidationError, "probe box, step and measure counts must be valid");
    }
    const std::size_t d = model.dim();
    std::mt19937_64 rng(cfg.seed);
    const std::vector<Vec> points = probe_points(d, cfg, rng);

    std::vector<EmpiricalMeasure> measures;
    std::uniform_real_distribution<double> u(cfg.lo, cfg.hi);
    for (std::size_t m = 0; m < cfg.measures; ++m) {
        Vec samples(cfg.measure_samples * d);
        for (double& s : samples) {
            s = u(rng);
        }
        measures.emplace_back(d, std::move(samples));
    }

    Matrix w2(measures.size(), measures.size());
    for (std::size_t a = 0; a < measures.size(); ++a) {
        for (std::size_t b = a + 1; b < measures.size(); ++b) {
            w2(a, b) = wasserstein2_assignment(measures[a], measures[b]);
        }
    }

    AssumptionReport rep;
    rep.min_lambda = std::numeric_limits<double>::infinity();
    const double h = cfg.fd_step;
    for (const Vec& x : points) {
        for (const EmpiricalMeasure& mu : measures) {
            ++rep.probes;
            const Matrix gamma = model.friction(x, mu);
            const double lambda = min_sym_eig(gamma);
            if (lambda < rep.min_lambda) {
                rep.min_lambda = lambda;
                rep.argmin_point = x;
            }
            const Vec f = model.force(x, mu);
            const Matrix sigma = model.noise(x, mu);
            const Tensor3 dgamma = model.friction_dx(x, mu);
            for (std::size_t l = 0; l < d; ++l) {
                Vec xh = x;
                xh[l] += h;
                rep.lip_force_x = std::max(rep.lip_force_x, vec_distance(model.force(xh, mu), f) / h);
                rep.lip_noise_x = std::max(rep.lip_noise_x, (model.noise(xh, mu) - sigma).frobenius_norm() / h);
                rep.lip_friction_x =
                    std::max(rep.lip_friction_x, (model.friction(xh, mu) - gamma).frobenius_norm() / h);
                rep.lip_friction_dx =
                    std::max(rep.lip_friction_dx, tensor_distance(model.friction_dx(xh, mu), dgamma) / h);
            }
            for (std::size_t k = 0; k < mu.size(); ++k) {
                rep.max_friction_dmu = std::max(rep.max_friction_dmu, tensor_norm(model.friction_dmu(x, mu, mu.sample(k))));
            }
        }
        for (std::size_t a = 0; a < measures.size(); ++a) {
            for (std::size_t b = a + 1; b < measures.size(); ++b) {
                const double w = w2(a, b);
                if (!(w > 0.0)) {
                    continue;
                }
                const EmpiricalMeasure& ma = measures[a];
                const EmpiricalMeasure& mb = measures[b];
                rep.lip_force_mu = std::max(rep.lip_force_mu, vec_distance(model.force(x, ma), model.force(x, mb)) / w);
                rep.lip_noise_mu =
                    std::max(rep.lip_noise_mu, (model.noise(x, ma) - model.noise(x, mb)).frobenius_norm() / w);
                rep.lip_friction_mu =
                    std::max(rep.lip_friction_mu, (model.friction(x, ma) - model.friction(x, mb)).frobenius_norm() / w);
            }
        }
    }
    rep.violated = !(rep.min_lambda > kEllipticityFloor);
    return rep;
}

AssumptionReport validate_assumptions(const SystemModel& model, const ProbeConfig& cfg) {
    AssumptionReport rep = probe_assumptions(model, cfg);
    if (rep.violated) {
        throw AssumptionViolatedError("friction loses ellipticity: min eigenvalue of sym(gamma) = " +
                                          std::to_string(rep.min_lambda) + " at x = " +
                                          format_point(rep.argmin_point),
                                      rep.argmin_point);
    }
    return rep;
}

}  // namespace sklimit
