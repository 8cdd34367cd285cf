#include "sklimit/drift.hpp"

#include "sklimit/error.hpp"
#include "sklimit/matx.hpp"

namespace sklimit {

namespace {

Matrix stable_inverse(const Matrix& gamma) {
    return inverse(StableMatrix::check(gamma).matrix());
}

Tensor3 sandwich(const Matrix& inv, const Tensor3& slices) {
    Tensor3 out;
    out.reserve(slices.size());
    for (const Matrix& s : slices) {
        out.push_back(-(inv * s * inv));
    }
    return out;
}

}  // namespace

Vec contract(const Tensor3& slices, const Matrix& m) {
    const std::size_t d = m.rows();
    Vec out(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t l = 0; l < d; ++l) {
                s += slices[l](i, j) * m(j, l);
            }
        }
        out[i] = s;
    }
    return out;
}

Tensor3 gamma_inv_dx(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu) {
    const Matrix inv = stable_inverse(model.friction(x, mu));
    return sandwich(inv, model.friction_dx(x, mu));
}

Tensor3 gamma_inv_dmu(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu,
                      std::span<const double> y) {
    const Matrix inv = stable_inverse(model.friction(x, mu));
    return sandwich(inv, model.friction_dmu(x, mu, y));
}

Vec drift_S(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu) {
    return drift_S(model, x, mu, model.friction(x, mu), model.noise(x, mu));
}

Vec drift_S(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu,
            const Matrix& friction_x, const Matrix& noise_x) {
    const Matrix j = solve_lyapunov(friction_x, multiply_transposed(noise_x, noise_x));
    return contract(sandwich(inverse(friction_x), model.friction_dx(x, mu)), j);
}

SampleCoefficients evaluate_at_samples(const SystemModel& model, const EmpiricalMeasure& mu) {
    SampleCoefficients c;
    c.friction.reserve(mu.size());
    c.noise.reserve(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        c.friction.push_back(model.friction(mu.sample(k), mu));
        c.noise.push_back(model.noise(mu.sample(k), mu));
    }
    return c;
}

Vec drift_S_tilde(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu,
                  const TildeDriftOptions& opts) {
    return drift_S_tilde(model, x, mu, evaluate_at_samples(model, mu), model.friction(x, mu), model.noise(x, mu),
                         opts);
}

Vec drift_S_tilde(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu,
                  const SampleCoefficients& at_samples, const Matrix& friction_x, const Matrix& noise_x,
                  const TildeDriftOptions& opts) {
    const std::size_t d = model.dim();
    const std::size_t n = mu.size();
    if (at_samples.friction.size() != n || at_samples.noise.size() != n) {
        throw Error(ErrorCode::CountMismatch, "sample coefficients do not match the measure");
    }
    const Matrix inv = stable_inverse(friction_x);
    const Matrix minus_gamma = -friction_x;
    Vec sum(d, 0.0);
    std::size_t used = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (opts.exclude_sample && *opts.exclude_sample == k) {
            continue;
        }
        ++used;
        const auto y = mu.sample(k);
        // gamma(x) J~ + J~ gamma^T(y) = sigma(x) sigma^T(y)  <=>  A Y - Y B = C
        // with A = -gamma(x), B = gamma^T(y), C = -sigma(x) sigma^T(y).
        const Matrix jt = solve_sylvester(minus_gamma, at_samples.friction[k].transpose(),
                                          -multiply_transposed(noise_x, at_samples.noise[k]));
        const Vec term = contract(sandwich(inv, model.friction_dmu(x, mu, y)), jt);
        for (std::size_t i = 0; i < d; ++i) {
            sum[i] += term[i];
        }
    }
    if (used == 0) {
        return sum;
    }
    for (double& v : sum) {
        v /= static_cast<double>(used);
    }
    return sum;
}

}  // namespace sklimit
