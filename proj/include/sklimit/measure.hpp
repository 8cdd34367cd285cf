#pragma once

#include "sklimit/matrix.hpp"

#include <cstddef>
#include <span>

namespace sklimit {

/// Uniform-weight atomic measure (1/N) sum_i delta_{x_i} on R^d.
class EmpiricalMeasure {
public:
    /// `samples` is N x d row-major. Throws CountMismatch for N = 0 or a
    /// length that is not a multiple of d, NonFinite for NaN/Inf samples.
    EmpiricalMeasure(std::size_t dim, Vec samples);

    static EmpiricalMeasure dirac(std::span<const double> point);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size() / dim_; }
    [[nodiscard]] std::span<const double> sample(std::size_t i) const noexcept {
        return {samples_.data() + i * dim_, dim_};
    }
    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }

private:
    std::size_t dim_;
    Vec samples_;
};

[[nodiscard]] double second_moment(const EmpiricalMeasure& mu);

/// Exact W2 for d = 1 by sorted (monotone) matching.
[[nodiscard]] double wasserstein2_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

inline constexpr std::size_t kMaxAssignmentSize = 512;

/// Exact W2 between equal-size clouds by minimum-cost perfect matching on the
/// squared-distance matrix (shortest augmenting paths, lowest index wins ties).
[[nodiscard]] double wasserstein2_assignment(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Optimal assignment for an n x n cost matrix: result[row] = column.
[[nodiscard]] std::vector<std::size_t> min_cost_assignment(const Matrix& cost);

}  // namespace sklimit
