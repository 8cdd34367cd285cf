#pragma once

// Correction drifts of the small-mass limit
//   dx = [gamma^{-1} F + S + S~] dt + gamma^{-1} sigma dW
// with S_i  = d_{x_l}[gamma^{-1}_ij] J_jl,   gamma J + J gamma^T = sigma sigma^T,
// and  S~_i = E~[(d_mu gamma^{-1}_ij(x, mu)(x~))_l J~_jl(x, x~, mu)],
//      gamma(x) J~ + J~ gamma^T(x~) = sigma(x) sigma^T(x~).

#include "sklimit/matrix.hpp"
#include "sklimit/measure.hpp"
#include "sklimit/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sklimit {

/// slices[l] = -gamma^{-1} (d gamma / d x_l) gamma^{-1}
[[nodiscard]] Tensor3 gamma_inv_dx(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu);

/// slices[l] = -gamma^{-1} (d_mu gamma(x, mu)(y))_l gamma^{-1}
[[nodiscard]] Tensor3 gamma_inv_dmu(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu,
                                    std::span<const double> y);

[[nodiscard]] Vec drift_S(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu);

/// Same as above with gamma(x, mu) and sigma(x, mu) already evaluated.
[[nodiscard]] Vec drift_S(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu,
                          const Matrix& friction_x, const Matrix& noise_x);

/// Friction and noise evaluated at every sample of mu. The S~ average needs
/// gamma(y_k, mu) for all k; building this once per time step keeps the
/// ensemble drift at O(N^2) model evaluations.
struct SampleCoefficients {
    std::vector<Matrix> friction;
    std::vector<Matrix> noise;
};

[[nodiscard]] SampleCoefficients evaluate_at_samples(const SystemModel& model, const EmpiricalMeasure& mu);

struct TildeDriftOptions {
    /// Sample index that coincides with x and should be left out of the
    /// independent-copy average (sensitivity studies). Default keeps every
    /// sample, self term included, at weight 1/N.
    std::optional<std::size_t> exclude_sample;
};

/// Empirical replacement of E~ by the average over the N samples of mu.
[[nodiscard]] Vec drift_S_tilde(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu,
                                const TildeDriftOptions& opts = {});

[[nodiscard]] Vec drift_S_tilde(const SystemModel& model, std::span<const double> x, const EmpiricalMeasure& mu,
                                const SampleCoefficients& at_samples, const Matrix& friction_x,
                                const Matrix& noise_x, const TildeDriftOptions& opts = {});

/// sum_{j,l} slices[l](i, j) * m(j, l)
[[nodiscard]] Vec contract(const Tensor3& slices, const Matrix& m);

}  // namespace sklimit
