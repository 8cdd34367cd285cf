#include "sklimit/model.hpp"

#include "sklimit/error.hpp"
#include "sklimit/matx.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>

namespace sklimit {

std::string_view mode_name(ModelMode mode) noexcept {
    return mode == ModelMode::StateOnly ? "state-only" : "extension";
}

ParamValue ParamValue::matrix(const Matrix& m) {
    return {std::vector<double>(m.data().begin(), m.data().end()), {m.rows(), m.cols()}};
}

namespace {

[[noreturn]] void violation(const std::string& family, const std::string& what) {
    throw Error(ErrorCode::ParameterViolation, family + ": " + what);
}

/// Typed access to a family's parameter map; rejects names the family does
/// not declare.
class Params {
public:
    Params(const ModelSpec& spec, std::set<std::string> allowed) : spec_(spec) {
        for (const auto& [name, value] : spec.params) {
            if (!allowed.contains(name)) {
                violation(spec.family, "unknown parameter '" + name + "'");
            }
            for (double v : value.values) {
                if (!std::isfinite(v)) {
                    violation(spec.family, "parameter '" + name + "' is not finite");
                }
            }
        }
    }

    [[nodiscard]] const ParamValue* find(const std::string& name) const {
        const auto it = spec_.params.find(name);
        return it == spec_.params.end() ? nullptr : &it->second;
    }

    [[nodiscard]] double scalar(const std::string& name, std::optional<double> fallback = std::nullopt) const {
        const ParamValue* p = find(name);
        if (p == nullptr) {
            if (!fallback) {
                violation(spec_.family, "missing parameter '" + name + "'");
            }
            return *fallback;
        }
        if (!p->is_scalar()) {
            violation(spec_.family, "parameter '" + name + "' must be a scalar");
        }
        return p->values.front();
    }

    /// Scalar s -> s I, vector -> diagonal, matrix -> as given.
    [[nodiscard]] Matrix matrix(const std::string& name, std::size_t rows, std::optional<std::size_t> cols,
                                double fallback) const {
        const ParamValue* p = find(name);
        const std::size_t c = cols.value_or(rows);
        if (p == nullptr) {
            return Matrix::scalar(rows, fallback);
        }
        if (p->is_scalar()) {
            return Matrix::scalar(rows, p->values.front());
        }
        if (p->shape.size() == 1) {
            if (p->shape[0] != rows) {
                violation(spec_.family, "parameter '" + name + "' has the wrong length");
            }
            return Matrix::diagonal(p->values);
        }
        if (p->shape[0] != rows || (cols && p->shape[1] != c)) {
            violation(spec_.family, "parameter '" + name + "' has the wrong shape");
        }
        Matrix m(p->shape[0], p->shape[1]);
        std::copy(p->values.begin(), p->values.end(), m.data().begin());
        return m;
    }

    /// Dimension implied by a matrix/vector parameter, if any.
    [[nodiscard]] std::optional<std::size_t> implied_dim(const std::string& name) const {
        const ParamValue* p = find(name);
        if (p == nullptr || p->is_scalar()) {
            return std::nullopt;
        }
        return p->shape[0];
    }

    [[nodiscard]] std::size_t dimension(std::initializer_list<const char*> shaped) const {
        std::optional<std::size_t> d;
        if (find("d") != nullptr) {
            const double raw = scalar("d");
            if (raw < 1.0 || raw != std::floor(raw)) {
                violation(spec_.family, "d must be a positive integer");
            }
            d = static_cast<std::size_t>(raw);
        }
        for (const char* name : shaped) {
            if (auto implied = implied_dim(name)) {
                if (d && *d != *implied) {
                    violation(spec_.family, std::string("parameter '") + name + "' disagrees with d");
                }
                d = implied;
            }
        }
        return d.value_or(1);
    }

private:
    const ModelSpec& spec_;
};

Tensor3 zero_tensor(std::size_t d) { return Tensor3(d, Matrix(d, d)); }

Vec linear_force(const Matrix& k, std::span<const double> x) {
    Vec f = k * x;
    for (double& v : f) {
        v = -v;
    }
    return f;
}

class ConstantModel final : public SystemModel {
public:
    ConstantModel(Matrix gamma, Matrix stiffness, Matrix sigma, ModelMode mode)
        : SystemModel(gamma.rows(), sigma.cols(), mode),
          gamma_(std::move(gamma)),
          stiffness_(std::move(stiffness)),
          sigma_(std::move(sigma)) {}

    Vec force(std::span<const double> x, const EmpiricalMeasure&) const override {
        return linear_force(stiffness_, x);
    }
    Matrix noise(std::span<const double>, const EmpiricalMeasure&) const override { return sigma_; }
    Matrix friction(std::span<const double>, const EmpiricalMeasure&) const override { return gamma_; }
    Tensor3 friction_dx(std::span<const double>, const EmpiricalMeasure&) const override {
        return zero_tensor(dim());
    }
    Tensor3 friction_dmu(std::span<const double>, const EmpiricalMeasure&, std::span<const double>) const override {
        return zero_tensor(dim());
    }
    bool friction_measure_independent() const noexcept override { return true; }

private:
    Matrix gamma_;
    Matrix stiffness_;
    Matrix sigma_;
};

/// d = 1 models whose friction depends on x only.
class ScalarStateModel final : public SystemModel {
public:
    enum class Profile { Tanh, Affine };

    ScalarStateModel(Profile profile, double a, double b, double k, double sigma, ModelMode mode)
        : SystemModel(1, 1, mode), profile_(profile), a_(a), b_(b), k_(k), sigma_(sigma) {}

    Vec force(std::span<const double> x, const EmpiricalMeasure&) const override { return {-k_ * x[0]}; }
    Matrix noise(std::span<const double>, const EmpiricalMeasure&) const override {
        return Matrix::scalar(1, sigma_);
    }
    Matrix friction(std::span<const double> x, const EmpiricalMeasure&) const override {
        const double g = profile_ == Profile::Tanh ? a_ + b_ * std::tanh(x[0]) : a_ + b_ * x[0];
        return Matrix::scalar(1, g);
    }
    Tensor3 friction_dx(std::span<const double> x, const EmpiricalMeasure&) const override {
        double dg = b_;
        if (profile_ == Profile::Tanh) {
            const double t = std::tanh(x[0]);
            dg = b_ * (1.0 - t * t);
        }
        return {Matrix::scalar(1, dg)};
    }
    Tensor3 friction_dmu(std::span<const double>, const EmpiricalMeasure&, std::span<const double>) const override {
        return zero_tensor(1);
    }
    bool friction_measure_independent() const noexcept override { return true; }

private:
    Profile profile_;
    double a_;
    double b_;
    double k_;
    double sigma_;
};

/// gamma(x, mu) = a I + b diag(tanh x_l) + mean_{y~mu} Psi(x - y),
/// Psi(z) = c / (1 + |z|^2) I. Psi is a linear functional of mu, so its Lions
/// derivative at y is grad_y Psi(x - y).
class InteractionFriction {
public:
    InteractionFriction(std::size_t d, double a, double b, double c) : d_(d), a_(a), b_(b), c_(c) {}

    [[nodiscard]] Matrix friction(std::span<const double> x, const EmpiricalMeasure& mu) const {
        double kernel = 0.0;
        for (std::size_t k = 0; k < mu.size(); ++k) {
            kernel += c_ / (1.0 + distance2(x, mu.sample(k)));
        }
        kernel /= static_cast<double>(mu.size());
        Matrix g(d_, d_);
        for (std::size_t i = 0; i < d_; ++i) {
            g(i, i) = a_ + b_ * std::tanh(x[i]) + kernel;
        }
        return g;
    }

    [[nodiscard]] Tensor3 friction_dx(std::span<const double> x, const EmpiricalMeasure& mu) const {
        Vec grad(d_, 0.0);
        for (std::size_t k = 0; k < mu.size(); ++k) {
            const auto y = mu.sample(k);
            const double denom = 1.0 + distance2(x, y);
            const double scale = -2.0 * c_ / (denom * denom);
            for (std::size_t l = 0; l < d_; ++l) {
                grad[l] += scale * (x[l] - y[l]);
            }
        }
        Tensor3 t = zero_tensor(d_);
        for (std::size_t l = 0; l < d_; ++l) {
            const double g = grad[l] / static_cast<double>(mu.size());
            for (std::size_t i = 0; i < d_; ++i) {
                t[l](i, i) = g;
            }
            const double th = std::tanh(x[l]);
            t[l](l, l) += b_ * (1.0 - th * th);
        }
        return t;
    }

    [[nodiscard]] Tensor3 friction_dmu(std::span<const double> x, std::span<const double> y) const {
        const double denom = 1.0 + distance2(x, y);
        const double scale = 2.0 * c_ / (denom * denom);
        Tensor3 t = zero_tensor(d_);
        for (std::size_t l = 0; l < d_; ++l) {
            for (std::size_t i = 0; i < d_; ++i) {
                t[l](i, i) = scale * (x[l] - y[l]);
            }
        }
        return t;
    }

    static double distance2(std::span<const double> x, std::span<const double> y) {
        double s = 0.0;
        for (std::size_t l = 0; l < x.size(); ++l) {
            s += (x[l] - y[l]) * (x[l] - y[l]);
        }
        return s;
    }

private:
    std::size_t d_;
    double a_;
    double b_;
    double c_;
};

class InteractionModel final : public SystemModel {
public:
    InteractionModel(InteractionFriction friction, Matrix stiffness, Matrix sigma, ModelMode mode)
        : SystemModel(stiffness.rows(), sigma.cols(), mode),
          friction_(friction),
          stiffness_(std::move(stiffness)),
          sigma_(std::move(sigma)) {}

    Vec force(std::span<const double> x, const EmpiricalMeasure&) const override {
        return linear_force(stiffness_, x);
    }
    Matrix noise(std::span<const double>, const EmpiricalMeasure&) const override { return sigma_; }
    Matrix friction(std::span<const double> x, const EmpiricalMeasure& mu) const override {
        return friction_.friction(x, mu);
    }
    Tensor3 friction_dx(std::span<const double> x, const EmpiricalMeasure& mu) const override {
        return friction_.friction_dx(x, mu);
    }
    Tensor3 friction_dmu(std::span<const double> x, const EmpiricalMeasure&, std::span<const double> y) const override {
        return friction_.friction_dmu(x, y);
    }

private:
    InteractionFriction friction_;
    Matrix stiffness_;
    Matrix sigma_;
};

/// Confinement -kV x plus mean-field force -mean_y grad W(x - y) with
/// W(z) = w sqrt(1 + |z|^2); noise (sigma + sigma_mu m/(1+m)) I with m the
/// second moment of mu.
class CarrilloModel final : public SystemModel {
public:
    CarrilloModel(std::size_t d, InteractionFriction friction, double kv, double w, double sigma, double sigma_mu)
        : SystemModel(d, d, ModelMode::Extension),
          friction_(friction),
          kv_(kv),
          w_(w),
          sigma_(sigma),
          sigma_mu_(sigma_mu) {}

    Vec force(std::span<const double> x, const EmpiricalMeasure& mu) const override {
        const std::size_t d = dim();
        Vec f(d);
        for (std::size_t l = 0; l < d; ++l) {
            f[l] = -kv_ * x[l];
        }
        Vec pair(d, 0.0);
        for (std::size_t k = 0; k < mu.size(); ++k) {
            const auto y = mu.sample(k);
            const double scale = w_ / std::sqrt(1.0 + InteractionFriction::distance2(x, y));
            for (std::size_t l = 0; l < d; ++l) {
                pair[l] += scale * (x[l] - y[l]);
            }
        }
        for (std::size_t l = 0; l < d; ++l) {
            f[l] -= pair[l] / static_cast<double>(mu.size());
        }
        return f;
    }
    Matrix noise(std::span<const double>, const EmpiricalMeasure& mu) const override {
        const double m = second_moment(mu);
        return Matrix::scalar(dim(), sigma_ + sigma_mu_ * m / (1.0 + m));
    }
    Matrix friction(std::span<const double> x, const EmpiricalMeasure& mu) const override {
        return friction_.friction(x, mu);
    }
    Tensor3 friction_dx(std::span<const double> x, const EmpiricalMeasure& mu) const override {
        return friction_.friction_dx(x, mu);
    }
    Tensor3 friction_dmu(std::span<const double> x, const EmpiricalMeasure&, std::span<const double> y) const override {
        return friction_.friction_dmu(x, y);
    }

private:
    InteractionFriction friction_;
    double kv_;
    double w_;
    double sigma_;
    double sigma_mu_;
};

InteractionFriction interaction_friction(const ModelSpec& spec, const Params& p, std::size_t d) {
    const double a = p.scalar("a");
    const double b = p.scalar("b", 0.0);
    const double c = p.scalar("c", 1.0);
    if (!(a > std::abs(b))) {
        violation(spec.family, "need a > |b| for uniform ellipticity");
    }
    if (c < 0.0) {
        violation(spec.family, "need c >= 0");
    }
    return InteractionFriction(d, a, b, c);
}

ModelPtr build_constant(const ModelSpec& spec) {
    const Params p(spec, {"d", "gamma", "K", "sigma"});
    const std::size_t d = p.dimension({"gamma", "K", "sigma"});
    Matrix gamma = p.matrix("gamma", d, d, 1.0);
    Matrix stiffness = p.matrix("K", d, d, 1.0);
    Matrix sigma = p.matrix("sigma", d, std::nullopt, 1.0);
    if (!(min_sym_eig(gamma) > kStabilityThreshold)) {
        violation(spec.family, "gamma must have a positive definite symmetric part");
    }
    return std::make_shared<ConstantModel>(std::move(gamma), std::move(stiffness), std::move(sigma), spec.mode);
}

ModelPtr build_scalar(const ModelSpec& spec, ScalarStateModel::Profile profile) {
    const Params p(spec, {"a", "b", "K", "sigma"});
    const bool tanh = profile == ScalarStateModel::Profile::Tanh;
    const double a = tanh ? p.scalar("a") : p.scalar("a", 0.0);
    const double b = tanh ? p.scalar("b", 0.0) : p.scalar("b", 1.0);
    if (tanh && !(a > std::abs(b))) {
        violation(spec.family, "need a > |b| for uniform ellipticity");
    }
    return std::make_shared<ScalarStateModel>(profile, a, b, p.scalar("K", 1.0), p.scalar("sigma", 1.0), spec.mode);
}

ModelPtr build_interaction(const ModelSpec& spec) {
    const Params p(spec, {"d", "a", "b", "c", "K", "sigma"});
    const std::size_t d = p.dimension({"K", "sigma"});
    InteractionFriction friction = interaction_friction(spec, p, d);
    return std::make_shared<InteractionModel>(friction, p.matrix("K", d, d, 1.0),
                                              p.matrix("sigma", d, std::nullopt, 1.0), spec.mode);
}

ModelPtr build_carrillo(const ModelSpec& spec) {
    const Params p(spec, {"d", "a", "b", "c", "kV", "w", "sigma", "sigma_mu"});
    if (spec.mode != ModelMode::Extension) {
        violation(spec.family, "force depends on the law; requires extension mode");
    }
    const std::size_t d = p.dimension({});
    InteractionFriction friction = interaction_friction(spec, p, d);
    const double sigma_mu = p.scalar("sigma_mu", 0.0);
    if (sigma_mu < 0.0) {
        violation(spec.family, "need sigma_mu >= 0");
    }
    return std::make_shared<CarrilloModel>(d, friction, p.scalar("kV", 1.0), p.scalar("w", 0.5),
                                           p.scalar("sigma", 1.0), sigma_mu);
}

}  // namespace

ModelPtr model_library(const ModelSpec& spec) {
    if (spec.family == "constant") {
        return build_constant(spec);
    }
    if (spec.family == "scalar-state") {
        return build_scalar(spec, ScalarStateModel::Profile::Tanh);
    }
    if (spec.family == "scalar-affine") {
        return build_scalar(spec, ScalarStateModel::Profile::Affine);
    }
    if (spec.family == "interaction") {
        return build_interaction(spec);
    }
    if (spec.family == "carrillo-force") {
        return build_carrillo(spec);
    }
    throw Error(ErrorCode::UnknownFamily, "no built-in model family '" + spec.family + "'");
}

std::vector<std::string> model_families() {
    return {"constant", "scalar-state", "scalar-affine", "interaction", "carrillo-force"};
}

}  // namespace sklimit
