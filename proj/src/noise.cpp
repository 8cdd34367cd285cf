#include "sklimit/noise.hpp"

#include "sklimit/error.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace sklimit {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Open interval (0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

NoiseDriver::NoiseDriver(std::uint64_t seed, double fine_step, std::size_t steps_per_window)
    : seed_(seed), fine_step_(fine_step), m_(steps_per_window) {
    if (!(fine_step >= 0.0) || !std::isfinite(fine_step)) {
        throw Error(ErrorCode::ValidationError, "fine step must be finite and non-negative");
    }
    if (steps_per_window == 0) {
        throw Error(ErrorCode::GridMismatch, "coarse window must hold at least one fine step");
    }
}

double NoiseDriver::standard_normal(std::uint64_t replica, std::uint64_t particle, std::uint64_t component,
                                    std::uint64_t window, std::uint64_t slot) const noexcept {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ replica);
    h = splitmix64(h ^ particle);
    h = splitmix64(h ^ component);
    h = splitmix64(h ^ window);
    h = splitmix64(h ^ slot);
    const double u1 = to_unit(h);
    const double u2 = to_unit(splitmix64(h));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void NoiseDriver::window(std::uint64_t replica, std::uint64_t window, std::size_t particles, std::size_t components,
                         std::span<double> fine, std::span<double> coarse) const {
    const std::size_t block = particles * components;
    if (fine.size() != m_ * block || coarse.size() != block) {
        throw Error(ErrorCode::DimensionMismatch, "increment buffers do not match the window shape");
    }
    const double sqrt_fine = std::sqrt(fine_step_);
    const double sqrt_coarse = std::sqrt(coarse_step());
    const double inv_m = 1.0 / static_cast<double>(m_);
    std::vector<double> draws(m_);
    for (std::size_t p = 0; p < particles; ++p) {
        for (std::size_t c = 0; c < components; ++c) {
            const std::size_t idx = p * components + c;
            const double target = sqrt_coarse * standard_normal(replica, p, c, window, kCoarseSlot);
            double mean = 0.0;
            for (std::size_t j = 0; j < m_; ++j) {
                draws[j] = sqrt_fine * standard_normal(replica, p, c, window, j);
                mean += draws[j];
            }
            mean *= inv_m;
            const double shift = target * inv_m - mean;
            double sum = 0.0;
            for (std::size_t j = 0; j < m_; ++j) {
                const double inc = draws[j] + shift;
                fine[j * block + idx] = inc;
                sum += inc;
            }
            coarse[idx] = sum;
        }
    }
}

}  // namespace sklimit
