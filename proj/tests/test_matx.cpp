#include <catch_amalgamated.hpp>

#include "sklimit/error.hpp"
#include "sklimit/matx.hpp"

#include <cmath>
#include <random>

using namespace sklimit;
using Catch::Approx;

namespace {

// Gaussian matrix shifted along the diagonal so that min_sym_eig = floor.
Matrix random_stable(std::size_t d, std::mt19937_64& rng, double floor) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            m(i, j) = n(rng);
        }
    }
    const double shift = floor - min_sym_eig(m);
    for (std::size_t i = 0; i < d; ++i) {
        m(i, i) += shift;
    }
    return m;
}

Matrix random_psd(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix a(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            a(i, j) = n(rng);
        }
    }
    return multiply_transposed(a, a);
}

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("expm on closed-form cases", "[matx][expm]") {
    CHECK(max_diff(expm(Matrix(2, 2)), Matrix::identity(2)) == 0.0);
    const Matrix e = expm(Matrix::from_rows({{1.0, 0.0}, {0.0, -1.0}}));
    CHECK(e(0, 0) == Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(e(1, 1) == Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(e(0, 1) == 0.0);
    const Matrix nil = expm(Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}));
    CHECK(max_diff(nil, Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}})) < 1e-15);
}

TEST_CASE("expm of a rotation generator", "[matx][expm]") {
    // exp([[0, -t], [t, 0]]) = [[cos t, -sin t], [sin t, cos t]]
    for (double t : {0.3, 2.0, 17.0, 60.0}) {
        const Matrix r = expm(Matrix::from_rows({{0.0, -t}, {t, 0.0}}));
        CHECK(r(0, 0) == Approx(std::cos(t)).margin(1e-12));
        CHECK(r(1, 0) == Approx(std::sin(t)).margin(1e-12));
        CHECK(r(0, 1) == Approx(-std::sin(t)).margin(1e-12));
    }
}

TEST_CASE("expm of large-norm diagonal keeps relative accuracy", "[matx][expm]") {
    const Vec diag{-100.0, 50.0, 3.0};
    const Matrix e = expm(Matrix::diagonal(diag));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(e(i, i) == Approx(std::exp(diag[i])).epsilon(1e-12));
    }
}

TEST_CASE("expm(M) expm(-M) is the identity", "[matx][expm]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 1 + trial % 6;
        Matrix m(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                m(i, j) = u(rng);
            }
        }
        m *= 10.0 / m.inf_norm();
        const Matrix e = expm(m);
        const Matrix f = expm(-m);
        CHECK(max_diff(e * f, Matrix::identity(d)) < 1e-13 * e.inf_norm() * f.inf_norm());
    }
}

TEST_CASE("expm rejects non-finite input", "[matx][expm]") {
    Matrix m(2, 2);
    m(0, 1) = std::nan("");
    CHECK_THROWS_MATCHES(expm(m), Error, Catch::Matchers::Predicate<const Error&>(
                                               [](const Error& e) { return e.code() == ErrorCode::NonFinite; }));
}

TEST_CASE("min_sym_eig on small cases", "[matx][eig]") {
    CHECK(min_sym_eig(Matrix::identity(3)) == Approx(1.0).margin(1e-12));
    const Vec d23{2.0, 3.0};
    CHECK(min_sym_eig(Matrix::diagonal(d23)) == Approx(2.0).margin(1e-12));
    CHECK(min_sym_eig(Matrix::from_rows({{1.0, 2.0}, {0.0, 1.0}})) == Approx(0.0).margin(1e-10));
}

TEST_CASE("min_sym_eig is invariant under symmetrization", "[matx][eig]") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (std::size_t d = 1; d <= 6; ++d) {
        Matrix m(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                m(i, j) = n(rng);
            }
        }
        CHECK(min_sym_eig(m) == min_sym_eig(m.symmetric_part()));
    }
}

TEST_CASE("min_sym_eig matches the 2x2 closed form", "[matx][eig]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 50; ++trial) {
        const double a = n(rng), b = n(rng), c = n(rng), e = n(rng);
        const double off = (b + c) / 2.0;
        const double expected = (a + e) / 2.0 - std::sqrt((a - e) * (a - e) / 4.0 + off * off);
        CHECK(min_sym_eig(Matrix::from_rows({{a, b}, {c, e}})) == Approx(expected).margin(1e-12));
    }
}

TEST_CASE("dense_solve examples", "[matx][solve]") {
    const Vec b{3.0, -1.0};
    CHECK(dense_solve(Matrix::identity(2), b) == b);
    const Vec x = dense_solve(Matrix::from_rows({{2.0, 0.0}, {0.0, 4.0}}), Vec{2.0, 8.0});
    CHECK(x[0] == Approx(1.0));
    CHECK(x[1] == Approx(2.0));
    CHECK_THROWS_AS(dense_solve(Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}}), Vec{1.0, 2.0}), Error);
    try {
        (void)dense_solve(Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}}), Vec{1.0, 2.0});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularSystem);
    }
}

TEST_CASE("dense_solve flags ill-conditioning", "[matx][solve]") {
    SolveDiagnostics diag;
    (void)dense_solve(Matrix::from_rows({{1.0, 0.0}, {0.0, 1e-13}}), Vec{1.0, 1.0}, &diag);
    CHECK(diag.ill_conditioned);
    SolveDiagnostics fine;
    (void)dense_solve(Matrix::from_rows({{2.0, 1.0}, {1.0, 3.0}}), Vec{1.0, 1.0}, &fine);
    CHECK_FALSE(fine.ill_conditioned);
}

TEST_CASE("solve_lyapunov examples", "[matx][lyapunov]") {
    const Matrix j1 = solve_lyapunov(Matrix::from_rows({{2.0}}), Matrix::from_rows({{9.0}}));
    CHECK(j1(0, 0) == Approx(2.25).epsilon(1e-15));

    std::mt19937_64 rng(1);
    const Matrix q = random_psd(3, rng);
    CHECK(max_diff(solve_lyapunov(Matrix::identity(3), q), q * 0.5) < 1e-14);

    // gamma = [[1, 1], [0, 1]], Q = I, J = [[a, b], [b, c]]:
    //   2c = 1, 2b + c = 0, 2a + 2b = 1.
    const Matrix j = solve_lyapunov(Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}}), Matrix::identity(2));
    CHECK(j(0, 0) == Approx(0.75).margin(1e-14));
    CHECK(j(0, 1) == Approx(-0.25).margin(1e-14));
    CHECK(j(1, 0) == Approx(-0.25).margin(1e-14));
    CHECK(j(1, 1) == Approx(0.5).margin(1e-14));
}

TEST_CASE("solve_lyapunov rejects unstable friction", "[matx][lyapunov]") {
    try {
        (void)solve_lyapunov(Matrix::from_rows({{1.0, 2.0}, {0.0, 1.0}}), Matrix::identity(2));
        FAIL("expected UnstableFriction");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnstableFriction);
    }
}

TEST_CASE("solve_lyapunov residual, symmetry and PSD on random instances", "[matx][lyapunov]") {
    std::mt19937_64 rng(2024);
    for (std::size_t d = 1; d <= 8; ++d) {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix gamma = random_stable(d, rng, 0.5);
            const Matrix q = random_psd(d, rng);
            const Matrix j = solve_lyapunov(gamma, q);
            CHECK(lyapunov_residual(gamma, j, q) <= 1e-10);
            CHECK(j.is_symmetric());
            CHECK(min_sym_eig(j) >= -1e-10);
        }
    }
}

TEST_CASE("solve_sylvester examples", "[matx][sylvester]") {
    const Matrix y = solve_sylvester(Matrix::from_rows({{-2.0}}), Matrix::from_rows({{3.0}}), Matrix::from_rows({{-5.0}}));
    CHECK(y(0, 0) == Approx(1.0).epsilon(1e-15));

    std::mt19937_64 rng(9);
    for (std::size_t d = 1; d <= 6; ++d) {
        const Matrix gamma = random_stable(d, rng, 0.5);
        const Matrix q = random_psd(d, rng);
        const Matrix ys = solve_sylvester(-gamma, gamma.transpose(), -q);
        CHECK(max_diff(ys, solve_lyapunov(gamma, q)) < 1e-12 * std::max(1.0, q.max_abs()));
    }

    const Matrix a = -random_stable(4, rng, 0.5);
    const Matrix b = random_stable(4, rng, 0.5);
    const Matrix c = random_psd(4, rng) - random_psd(4, rng);
    CHECK(sylvester_residual(a, b, solve_sylvester(a, b, c), c) <= 1e-10);
}

TEST_CASE("solve_sylvester requires separated spectra", "[matx][sylvester]") {
    try {
        (void)solve_sylvester(Matrix::from_rows({{1.0}}), Matrix::from_rows({{3.0}}), Matrix::from_rows({{1.0}}));
        FAIL("expected SpectrumOverlap");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SpectrumOverlap);
    }
}

TEST_CASE("quadrature oracles on closed-form cases", "[matx][quadrature]") {
    CHECK(max_diff(lyapunov_by_quadrature(Matrix::identity(2), Matrix::identity(2), 1e-8),
                   Matrix::identity(2) * 0.5) <= 1e-8);
    CHECK(lyapunov_by_quadrature(Matrix::from_rows({{2.0}}), Matrix::from_rows({{9.0}}), 1e-8)(0, 0) ==
          Approx(2.25).margin(1e-8));
    CHECK(sylvester_by_quadrature(Matrix::from_rows({{-2.0}}), Matrix::from_rows({{3.0}}),
                                  Matrix::from_rows({{-5.0}}), 1e-8)(0, 0) == Approx(1.0).margin(1e-8));
}

TEST_CASE("quadrature oracles agree with direct solves", "[matx][quadrature]") {
    std::mt19937_64 rng(77);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial) % 6;
        const Matrix gamma = random_stable(d, rng, 0.5);
        const Matrix q = random_psd(d, rng);
        worst = std::max(worst, (lyapunov_by_quadrature(gamma, q, 1e-9) - solve_lyapunov(gamma, q)).frobenius_norm());
        const Matrix a = -random_stable(d, rng, 0.5);
        const Matrix b = random_stable(d, rng, 0.5);
        const Matrix c = random_psd(d, rng);
        worst = std::max(worst, (sylvester_by_quadrature(a, b, c, 1e-9) - solve_sylvester(a, b, c)).frobenius_norm());
        const Matrix ys = sylvester_by_quadrature(-gamma, gamma.transpose(), -q, 1e-9);
        worst = std::max(worst, (ys - solve_lyapunov(gamma, q)).frobenius_norm());
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("quadrature reports a stalled refinement", "[matx][quadrature]") {
    QuadratureOptions opts;
    opts.max_panels = 4;
    try {
        (void)lyapunov_by_quadrature(Matrix::from_rows({{0.01, 5.0}, {-5.0, 0.01}}), Matrix::identity(2), 1e-12, opts);
        FAIL("expected ToleranceNotMet");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ToleranceNotMet);
    }
}
