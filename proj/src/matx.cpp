#include "sklimit/matx.hpp"

#include "sklimit/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace sklimit {

namespace {

constexpr double kSingularPivot = 1e-14;
constexpr double kConditionWarning = 1e12;

void require_square(const Matrix& m, const char* what) {
    if (!m.is_square() || m.empty()) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must be a non-empty square matrix");
    }
}

struct LuFactors {
    Matrix lu;
    std::vector<std::size_t> perm;
    SolveDiagnostics diag;
};

LuFactors lu_factor(const Matrix& a) {
    require_square(a, "system matrix");
    require_finite(a, "system matrix");
    const std::size_t n = a.rows();
    LuFactors f{a, std::vector<std::size_t>(n), {}};
    for (std::size_t i = 0; i < n; ++i) {
        f.perm[i] = i;
    }
    const double threshold = kSingularPivot * a.inf_norm();
    double max_pivot = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    Matrix& m = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                p = i;
            }
        }
        if (best <= threshold) {
            throw Error(ErrorCode::SingularSystem,
                        "pivot " + std::to_string(best) + " at column " + std::to_string(k) +
                            " below threshold");
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m(k, j), m(p, j));
            }
            std::swap(f.perm[k], f.perm[p]);
        }
        max_pivot = std::max(max_pivot, best);
        min_pivot = std::min(min_pivot, best);
        const double pivot = m(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double factor = m(i, k) / pivot;
            m(i, k) = factor;
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t j = k + 1; j < n; ++j) {
                m(i, j) -= factor * m(k, j);
            }
        }
    }
    f.diag.pivot_ratio = max_pivot / min_pivot;
    f.diag.ill_conditioned = f.diag.pivot_ratio > kConditionWarning;
    return f;
}

Vec lu_solve(const LuFactors& f, std::span<const double> b) {
    const std::size_t n = f.lu.rows();
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = b[f.perm[i]];
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) {
            s -= f.lu(i, j) * x[j];
        }
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            s -= f.lu(i, j) * x[j];
        }
        x[i] = s / f.lu(i, i);
    }
    return x;
}

void report_conditioning(const SolveDiagnostics& d, SolveDiagnostics* sink) {
    if (sink != nullptr) {
        *sink = d;
    } else if (d.ill_conditioned) {
        std::cerr << "warning: dense_solve pivot ratio " << d.pivot_ratio << " exceeds 1e12\n";
    }
}

struct GaussRule {
    std::array<double, 10> nodes{};
    std::array<double, 10> weights{};
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
GaussRule make_gauss_rule() {
    constexpr int n = 10;
    GaussRule rule;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z_old = z;
            z = z_old - p1 / dp;
            if (std::abs(z - z_old) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -z;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

const GaussRule& gauss_rule() {
    static const GaussRule rule = make_gauss_rule();
    return rule;
}

// Composite rule for int_0^ystar e^{a y} c e^{-b y} dy over `panels` equal
// panels. Every panel integral equals e^{a p h} M e^{-b p h} with M the
// first-panel integral, so only the panel-start factors are marched.
Matrix sandwich_level(const Matrix& a, const Matrix& b, const Matrix& c, double ystar,
                      std::size_t panels) {
    const auto& rule = gauss_rule();
    const double h = ystar / static_cast<double>(panels);
    Matrix first(c.rows(), c.cols());
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double tau = 0.5 * h * (1.0 + rule.nodes[q]);
        Matrix term = expm(a * tau) * c * expm(b * (-tau));
        first += term * (0.5 * h * rule.weights[q]);
    }
    const Matrix step_left = expm(a * h);
    const Matrix step_right = expm(b * (-h));
    Matrix left = Matrix::identity(a.rows());
    Matrix right = Matrix::identity(b.rows());
    Matrix sum(c.rows(), c.cols());
    for (std::size_t p = 0; p < panels; ++p) {
        sum += left * first * right;
        left = left * step_left;
        right = right * step_right;
    }
    return sum;
}

// int_0^inf e^{a y} c e^{-b y} dy where both factors decay at least like
// e^{-rate y}.
Matrix integrate_sandwich(const Matrix& a, const Matrix& b, const Matrix& c, double rate,
                          double tol, const QuadratureOptions& opts) {
    if (!(tol > 0.0)) {
        throw Error(ErrorCode::ValidationError, "quadrature tolerance must be positive");
    }
    const double cn = c.frobenius_norm();
    if (cn == 0.0) {
        return Matrix(c.rows(), c.cols());
    }
    // Tail beyond ystar is at most ||C|| e^{-2 rate ystar} / (2 rate) = tol / 2.
    const double ystar = std::max(std::log(cn / (tol * rate)) / (2.0 * rate), 1.0 / rate);
    const double spread = a.frobenius_norm() + b.frobenius_norm();
    auto panels = static_cast<std::size_t>(std::ceil(ystar * spread / 4.0));
    panels = std::max<std::size_t>(panels, 4);
    Matrix previous = sandwich_level(a, b, c, ystar, panels);
    while (2 * panels <= opts.max_panels) {
        panels *= 2;
        Matrix next = sandwich_level(a, b, c, ystar, panels);
        const double change = (next - previous).frobenius_norm();
        if (change <= 0.5 * tol) {
            return next;
        }
        previous = std::move(next);
    }
    throw Error(ErrorCode::ToleranceNotMet,
                "quadrature refinement did not reach tol=" + std::to_string(tol) + " within " +
                    std::to_string(opts.max_panels) + " panels");
}

}  // namespace

Vec dense_solve(const Matrix& a, std::span<const double> b, SolveDiagnostics* diag) {
    if (b.size() != a.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "right-hand side length does not match matrix");
    }
    const LuFactors f = lu_factor(a);
    report_conditioning(f.diag, diag);
    return lu_solve(f, b);
}

Matrix inverse(const Matrix& a) {
    const LuFactors f = lu_factor(a);
    report_conditioning(f.diag, nullptr);
    const std::size_t n = a.rows();
    Matrix inv(n, n);
    Vec e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vec col = lu_solve(f, e);
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            inv(i, j) = col[i];
        }
    }
    return inv;
}

Matrix expm(const Matrix& m) {
    require_square(m, "expm argument");
    require_finite(m, "expm argument");
    const std::size_t n = m.rows();
    const double norm = m.one_norm();
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    const Matrix scaled = m * std::ldexp(1.0, -squarings);

    // Horner evaluation of the degree-18 Taylor polynomial:
    // I + X(I + X/2(I + X/3(...))).
    constexpr int degree = 18;
    Matrix result = Matrix::identity(n);
    for (int k = degree; k >= 1; --k) {
        result = scaled * result;
        result *= 1.0 / k;
        for (std::size_t i = 0; i < n; ++i) {
            result(i, i) += 1.0;
        }
    }
    for (int s = 0; s < squarings; ++s) {
        result = result * result;
    }
    return result;
}

Vec symmetric_eigenvalues(const Matrix& s) {
    require_square(s, "symmetric eigenproblem");
    require_finite(s, "symmetric eigenproblem");
    const std::size_t n = s.rows();
    Matrix a = s;
    const double scale = a.frobenius_norm();
    for (int sweep = 0; sweep < 64 && scale > 0.0; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (std::sqrt(off) <= 1e-17 * scale) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(p, p) - a(q, q)) / (2.0 * apq);
                const double root = std::sqrt(theta * theta + 1.0);
                const double t = -1.0 / (theta + (theta >= 0.0 ? root : -root));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
        }
    }
    Vec eig(n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = a(i, i);
    }
    std::sort(eig.begin(), eig.end());
    return eig;
}

double min_sym_eig(const Matrix& m) {
    require_square(m, "min_sym_eig argument");
    require_finite(m, "min_sym_eig argument");
    if (m.rows() == 1) {
        return m(0, 0);
    }
    return symmetric_eigenvalues(m.symmetric_part()).front();
}

StableMatrix StableMatrix::check(Matrix m) {
    const double lambda = min_sym_eig(m);
    if (!(lambda > kStabilityThreshold)) {
        throw Error(ErrorCode::UnstableFriction,
                    "symmetric part has eigenvalue " + std::to_string(lambda) + " <= 1e-12");
    }
    return StableMatrix(std::move(m), lambda);
}

Matrix solve_lyapunov(const Matrix& gamma, const Matrix& q) {
    require_square(gamma, "friction");
    if (q.rows() != gamma.rows() || q.cols() != gamma.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "Lyapunov right-hand side shape mismatch");
    }
    require_finite(q, "Lyapunov right-hand side");
    const StableMatrix stable = StableMatrix::check(gamma);
    const std::size_t d = gamma.rows();
    if (d == 1) {
        Matrix j(1, 1);
        j(0, 0) = q(0, 0) / (2.0 * gamma(0, 0));
        return j;
    }
    // Row-major vectorization: unknown J_ij sits at i*d + j.
    Matrix k(d * d, d * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t row = i * d + j;
            for (std::size_t m = 0; m < d; ++m) {
                k(row, m * d + j) += gamma(i, m);
                k(row, i * d + m) += gamma(j, m);
            }
        }
    }
    const Vec x = dense_solve(k, q.data());
    Matrix j(d, d);
    std::copy(x.begin(), x.end(), j.data().begin());
    if (q.is_symmetric()) {
        j = j.symmetric_part();
    }
    return j;
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
    require_square(a, "Sylvester A");
    require_square(b, "Sylvester B");
    if (c.rows() != a.rows() || c.cols() != b.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "Sylvester right-hand side shape mismatch");
    }
    require_finite(c, "Sylvester right-hand side");
    const double left = min_sym_eig(-a);
    const double right = min_sym_eig(b);
    if (!(left > kStabilityThreshold) || !(right > kStabilityThreshold)) {
        throw Error(ErrorCode::SpectrumOverlap,
                    "need -A and B with positive definite symmetric parts (got " +
                        std::to_string(left) + ", " + std::to_string(right) + ")");
    }
    const std::size_t n = a.rows();
    const std::size_t m = b.rows();
    if (n == 1 && m == 1) {
        Matrix y(1, 1);
        y(0, 0) = c(0, 0) / (a(0, 0) - b(0, 0));
        return y;
    }
    Matrix k(n * m, n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t row = i * m + j;
            for (std::size_t l = 0; l < n; ++l) {
                k(row, l * m + j) += a(i, l);
            }
            for (std::size_t l = 0; l < m; ++l) {
                k(row, i * m + l) -= b(l, j);
            }
        }
    }
    const Vec x = dense_solve(k, c.data());
    Matrix y(n, m);
    std::copy(x.begin(), x.end(), y.data().begin());
    return y;
}

Matrix lyapunov_by_quadrature(const Matrix& gamma, const Matrix& q, double tol,
                              const QuadratureOptions& opts) {
    require_square(gamma, "friction");
    if (q.rows() != gamma.rows() || q.cols() != gamma.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "Lyapunov right-hand side shape mismatch");
    }
    require_finite(q, "Lyapunov right-hand side");
    const StableMatrix stable = StableMatrix::check(gamma);
    return integrate_sandwich(-gamma, gamma.transpose(), q, stable.lower_bound(), tol, opts);
}

Matrix sylvester_by_quadrature(const Matrix& a, const Matrix& b, const Matrix& c, double tol,
                               const QuadratureOptions& opts) {
    require_square(a, "Sylvester A");
    require_square(b, "Sylvester B");
    if (c.rows() != a.rows() || c.cols() != b.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "Sylvester right-hand side shape mismatch");
    }
    require_finite(c, "Sylvester right-hand side");
    const double rate = std::min(min_sym_eig(-a), min_sym_eig(b));
    if (!(rate > kStabilityThreshold)) {
        throw Error(ErrorCode::SpectrumOverlap,
                    "need -A and B with positive definite symmetric parts");
    }
    return -integrate_sandwich(a, b, c, rate, tol, opts);
}

double lyapunov_residual(const Matrix& gamma, const Matrix& j, const Matrix& q) {
    const Matrix r = gamma * j + multiply_transposed(j, gamma) - q;
    return r.frobenius_norm() / std::max(q.frobenius_norm(), 1.0);
}

double sylvester_residual(const Matrix& a, const Matrix& b, const Matrix& y, const Matrix& c) {
    const Matrix r = a * y - y * b - c;
    return r.frobenius_norm() / std::max(c.frobenius_norm(), 1.0);
}

}  // namespace sklimit
