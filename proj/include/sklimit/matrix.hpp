#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sklimit {

using Vec = std::vector<double>;

/// Dense real matrix, row-major. Square in most uses (friction, Lyapunov
/// solutions); the noise coefficient is d x k.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);
    static Matrix scalar(std::size_t n, double value);
    /// Throws NonFinite on NaN/Inf entries, DimensionMismatch on ragged rows.
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] Matrix symmetric_part() const;
    [[nodiscard]] bool is_finite() const noexcept;
    [[nodiscard]] bool is_symmetric() const noexcept;
    [[nodiscard]] double frobenius_norm() const noexcept;
    [[nodiscard]] double max_abs() const noexcept;
    /// Max absolute row sum.
    [[nodiscard]] double inf_norm() const noexcept;
    [[nodiscard]] double one_norm() const noexcept;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s) noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

[[nodiscard]] Matrix operator+(Matrix a, const Matrix& b);
[[nodiscard]] Matrix operator-(Matrix a, const Matrix& b);
[[nodiscard]] Matrix operator-(Matrix a);
[[nodiscard]] Matrix operator*(Matrix a, double s);
[[nodiscard]] Matrix operator*(double s, Matrix a);
[[nodiscard]] Matrix operator*(const Matrix& a, const Matrix& b);
[[nodiscard]] Vec operator*(const Matrix& a, std::span<const double> x);

/// a * b^T without forming the transpose.
[[nodiscard]] Matrix multiply_transposed(const Matrix& a, const Matrix& b);

/// Throws NonFinite when any entry is NaN/Inf.
void require_finite(const Matrix& m, const char* what);
void require_finite(std::span<const double> v, const char* what);

/// Rank-3 derivative array: slices[l](i, j) = d/dz_l of M_ij.
using Tensor3 = std::vector<Matrix>;

[[nodiscard]] double norm2(std::span<const double> v) noexcept;
[[nodiscard]] double squared_norm(std::span<const double> v) noexcept;

}  // namespace sklimit
