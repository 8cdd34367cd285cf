#pragma once

// Dense kernels behind the small-mass limit drifts: matrix exponential,
// symmetric-part spectrum, Lyapunov/Sylvester solvers and the integral
// representations used as independent oracles for those solvers.

#include "sklimit/matrix.hpp"

#include <cstddef>
#include <span>

namespace sklimit {

/// Minimum symmetric-part eigenvalue a friction matrix must exceed.
inline constexpr double kStabilityThreshold = 1e-12;

struct SolveDiagnostics {
    double pivot_ratio = 0.0;  ///< max |pivot| / min |pivot|
    bool ill_conditioned = false;
};

/// Partial-pivoting Gaussian elimination. Throws SingularSystem when a pivot
/// falls to 1e-14 * ||A||_inf or below. Sets `diag->ill_conditioned` when the
/// pivot ratio exceeds 1e12; without a diagnostics sink the warning goes to
/// stderr.
[[nodiscard]] Vec dense_solve(const Matrix& a, std::span<const double> b,
                              SolveDiagnostics* diag = nullptr);

/// Inverse through the same elimination as dense_solve.
[[nodiscard]] Matrix inverse(const Matrix& a);

/// e^M by scaling and squaring around a degree-18 Taylor core.
[[nodiscard]] Matrix expm(const Matrix& m);

/// Smallest eigenvalue of (M + M^T)/2 (cyclic Jacobi).
[[nodiscard]] double min_sym_eig(const Matrix& m);

/// All eigenvalues of a symmetric matrix, ascending.
[[nodiscard]] Vec symmetric_eigenvalues(const Matrix& s);

/// A square matrix whose symmetric part was checked to be positive definite.
class StableMatrix {
public:
    /// Throws UnstableFriction when min_sym_eig(m) <= kStabilityThreshold.
    static StableMatrix check(Matrix m);

    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
    [[nodiscard]] double lower_bound() const noexcept { return lambda_; }

private:
    StableMatrix(Matrix m, double lambda) : m_(std::move(m)), lambda_(lambda) {}
    Matrix m_;
    double lambda_;
};

/// Solves gamma J + J gamma^T = Q through the d^2 x d^2 vectorized system.
/// The result is symmetrized when Q is exactly symmetric.
[[nodiscard]] Matrix solve_lyapunov(const Matrix& gamma, const Matrix& q);

/// Solves A Y - Y B = C; requires -A and B to have positive definite
/// symmetric parts (spectra in opposite open half-planes).
[[nodiscard]] Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

struct QuadratureOptions {
    std::size_t max_panels = std::size_t{1} << 16;
};

/// J = int_0^inf e^{-gamma y} Q e^{-gamma^T y} dy on a truncated interval with
/// composite Gauss-Legendre panels, refined until two levels agree to tol.
[[nodiscard]] Matrix lyapunov_by_quadrature(const Matrix& gamma, const Matrix& q, double tol,
                                            const QuadratureOptions& opts = {});

/// Y = -int_0^inf e^{A y} C e^{-B y} dy.
[[nodiscard]] Matrix sylvester_by_quadrature(const Matrix& a, const Matrix& b, const Matrix& c,
                                             double tol, const QuadratureOptions& opts = {});

/// ||gamma J + J gamma^T - Q||_F / max(||Q||_F, 1)
[[nodiscard]] double lyapunov_residual(const Matrix& gamma, const Matrix& j, const Matrix& q);
/// ||A Y - Y B - C||_F / max(||C||_F, 1)
[[nodiscard]] double sylvester_residual(const Matrix& a, const Matrix& b, const Matrix& y,
                                        const Matrix& c);

}  // namespace sklimit
