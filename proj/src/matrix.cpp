#include "sklimit/matrix.hpp"

#include "sklimit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sklimit {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::UnstableFriction: return "UnstableFriction";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::SpectrumOverlap: return "SpectrumOverlap";
        case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
        case ErrorCode::UnknownFamily: return "UnknownFamily";
        case ErrorCode::ParameterViolation: return "ParameterViolation";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::SizeLimitExceeded: return "SizeLimitExceeded";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::NumericalBlowup: return "NumericalBlowup";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::AssumptionViolated: return "AssumptionViolated";
        case ErrorCode::InsufficientReplicas: return "InsufficientReplicas";
        case ErrorCode::DegenerateFit: return "DegenerateFit";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) { return scalar(n, 1.0); }

Matrix Matrix::scalar(std::size_t n, double value) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = value;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> copy;
    copy.reserve(rows.size());
    for (const auto& r : rows) {
        copy.emplace_back(r);
    }
    return from_rows(copy);
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw Error(ErrorCode::DimensionMismatch, "matrix must have at least one entry");
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols_) {
            throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
        }
        std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
    }
    require_finite(m, "matrix");
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

Matrix Matrix::symmetric_part() const {
    Matrix s(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        }
    }
    return s;
}

bool Matrix::is_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Matrix::is_symmetric() const noexcept {
    if (!is_square()) {
        return false;
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = i + 1; j < cols_; ++j) {
            if ((*this)(i, j) != (*this)(j, i)) {
                return false;
            }
        }
    }
    return true;
}

double Matrix::frobenius_norm() const noexcept { return norm2(data_); }

double Matrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double Matrix::inf_norm() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            s += std::abs((*this)(i, j));
        }
        m = std::max(m, s);
    }
    return m;
}

double Matrix::one_norm() const noexcept {
    double m = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            s += std::abs((*this)(i, j));
        }
        m = std::max(m, s);
    }
    return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw Error(ErrorCode::DimensionMismatch, "matrix addition shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw Error(ErrorCode::DimensionMismatch, "matrix subtraction shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= other.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
    for (double& v : data_) {
        v *= s;
    }
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Vec operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        throw Error(ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
    }
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            s += a(i, j) * x[j];
        }
        y[i] = s;
    }
    return y;
}

Matrix multiply_transposed(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "a * b^T shape mismatch");
    }
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                s += a(i, k) * b(j, k);
            }
            c(i, j) = s;
        }
    }
    return c;
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.is_finite()) {
        throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
    }
}

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
        }
    }
}

double norm2(std::span<const double> v) noexcept { return std::sqrt(squared_norm(v)); }

double squared_norm(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return s;
}

}  // namespace sklimit
