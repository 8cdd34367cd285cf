#pragma once

#include "sklimit/matrix.hpp"
#include "sklimit/measure.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sklimit {

/// State-only: F and sigma see only x. Extension: F and sigma also take the
/// law of x.
enum class ModelMode { StateOnly, Extension };

[[nodiscard]] std::string_view mode_name(ModelMode mode) noexcept;

/// Real scalar, vector or matrix parameter. `shape` is {}, {n} or {rows, cols}.
struct ParamValue {
    std::vector<double> values;
    std::vector<std::size_t> shape;

    static ParamValue scalar(double v) { return {{v}, {}}; }
    static ParamValue vector(std::vector<double> v) {
        const std::size_t n = v.size();
        return {std::move(v), {n}};
    }
    static ParamValue matrix(const Matrix& m);

    [[nodiscard]] bool is_scalar() const noexcept { return shape.empty(); }

    friend bool operator==(const ParamValue&, const ParamValue&) = default;
};

struct ModelSpec {
    std::string family;
    std::map<std::string, ParamValue> params;
    ModelMode mode = ModelMode::StateOnly;
};

/// Coefficients of the inertial system
///   dx = v dt,  eps dv = F dt - gamma(x, mu) v dt + sigma dW
/// and the derivatives of gamma needed for the limit drifts. Immutable and
/// safe to evaluate concurrently.
class SystemModel {
public:
    SystemModel(std::size_t dim, std::size_t noise_dim, ModelMode mode)
        : dim_(dim), noise_dim_(noise_dim), mode_(mode) {}
    virtual ~SystemModel() = default;

    SystemModel(const SystemModel&) = delete;
    SystemModel& operator=(const SystemModel&) = delete;

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t noise_dim() const noexcept { return noise_dim_; }
    [[nodiscard]] ModelMode mode() const noexcept { return mode_; }

    [[nodiscard]] virtual Vec force(std::span<const double> x, const EmpiricalMeasure& mu) const = 0;
    /// d x k
    [[nodiscard]] virtual Matrix noise(std::span<const double> x, const EmpiricalMeasure& mu) const = 0;
    [[nodiscard]] virtual Matrix friction(std::span<const double> x, const EmpiricalMeasure& mu) const = 0;
    /// slices[l] = d gamma / d x_l
    [[nodiscard]] virtual Tensor3 friction_dx(std::span<const double> x, const EmpiricalMeasure& mu) const = 0;
    /// slices[l] = (Lions derivative of gamma(x, .) at mu, evaluated at y)_l
    [[nodiscard]] virtual Tensor3 friction_dmu(std::span<const double> x, const EmpiricalMeasure& mu,
                                               std::span<const double> y) const = 0;

    /// True when friction_dmu is identically zero; lets the limit stepper
    /// skip the per-sample Sylvester solves.
    [[nodiscard]] virtual bool friction_measure_independent() const noexcept { return false; }

private:
    std::size_t dim_;
    std::size_t noise_dim_;
    ModelMode mode_;
};

using ModelPtr = std::shared_ptr<const SystemModel>;

/// Builds a model from the built-in registry:
///   "constant"       gamma = G0, F = -K x, sigma constant
///   "scalar-state"   d = 1, gamma = a + b tanh(x), a > |b|
///   "scalar-affine"  d = 1, gamma = a + b x (no ellipticity guarantee; for
///                    exercising the assumption validator)
///   "interaction"    gamma = a I + b diag(tanh x) + mean_y c/(1+|x-y|^2) I
///   "carrillo-force" interaction friction with
///                    F = -kV x - mean_y w (x-y)/sqrt(1+|x-y|^2) (extension mode)
/// Throws UnknownFamily or ParameterViolation.
[[nodiscard]] ModelPtr model_library(const ModelSpec& spec);

[[nodiscard]] std::vector<std::string> model_families();

}  // namespace sklimit
