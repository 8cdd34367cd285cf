#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace sklimit {

/// Counter-based Brownian increments keyed by (seed, replica, particle,
/// component). A coarse window of length Delta = m * delta is drawn first; the
/// m fine increments inside it are a Brownian-bridge refinement of that
/// window, and the coarse increment handed to the limit system is defined as
/// the in-order sum of the fine ones, so the coupling is bit-exact.
///
/// The coarse draw depends only on (seed, key, window), not on delta: runs at
/// different eps with the same Delta see the same Brownian path on the coarse
/// grid.
class NoiseDriver {
public:
    NoiseDriver(std::uint64_t seed, double fine_step, std::size_t steps_per_window);

    [[nodiscard]] double fine_step() const noexcept { return fine_step_; }
    [[nodiscard]] double coarse_step() const noexcept { return fine_step_ * static_cast<double>(m_); }
    [[nodiscard]] std::size_t steps_per_window() const noexcept { return m_; }

    /// `fine` receives m blocks of particles*components increments, `coarse`
    /// one block; block layout is particle-major.
    void window(std::uint64_t replica, std::uint64_t window, std::size_t particles, std::size_t components,
                std::span<double> fine, std::span<double> coarse) const;

    static constexpr std::uint64_t kCoarseSlot = ~std::uint64_t{0};

    /// Standard normal for one counter; kCoarseSlot is the coarse draw,
    /// slots 0..m-1 the bridge draws.
    [[nodiscard]] double standard_normal(std::uint64_t replica, std::uint64_t particle, std::uint64_t component,
                                         std::uint64_t window, std::uint64_t slot) const noexcept;

private:
    std::uint64_t seed_;
    double fine_step_;
    std::size_t m_;
};

}  // namespace sklimit
