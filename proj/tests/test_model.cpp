#include <catch_amalgamated.hpp>

#include "sklimit/drift.hpp"
#include "sklimit/error.hpp"
#include "sklimit/matx.hpp"
#include "sklimit/model.hpp"

#include <cmath>
#include <random>

using namespace sklimit;
using Catch::Approx;

namespace {

ModelSpec spec(std::string family, std::map<std::string, ParamValue> params,
               ModelMode mode = ModelMode::StateOnly) {
    return {std::move(family), std::move(params), mode};
}

ParamValue s(double v) { return ParamValue::scalar(v); }

std::vector<ModelSpec> all_families() {
    return {
        spec("constant", {{"gamma", ParamValue::matrix(Matrix::from_rows({{2.0, 0.5}, {-0.3, 1.5}}))}}),
        spec("scalar-state", {{"a", s(2.0)}, {"b", s(1.0)}}),
        spec("scalar-affine", {{"a", s(5.0)}, {"b", s(1.0)}}),
        spec("interaction", {{"a", s(2.0)}, {"b", s(0.5)}, {"c", s(1.0)}}),
        spec("interaction", {{"d", s(2.0)}, {"a", s(2.0)}, {"b", s(0.7)}, {"c", s(1.3)}}),
        spec("carrillo-force", {{"d", s(2.0)}, {"a", s(3.0)}, {"b", s(1.0)}, {"sigma_mu", s(0.5)}},
             ModelMode::Extension),
    };
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::IoError;
}

Vec random_point(std::size_t d, std::mt19937_64& rng, double scale = 1.5) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec p(d);
    for (double& x : p) {
        x = u(rng);
    }
    return p;
}

EmpiricalMeasure random_measure(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    Vec all;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec p = random_point(d, rng);
        all.insert(all.end(), p.begin(), p.end());
    }
    return {d, all};
}

}  // namespace

TEST_CASE("model_library examples", "[model]") {
    const ModelPtr c = model_library(spec("constant", {{"gamma", s(2.0)}, {"K", s(1.0)}, {"sigma", s(1.0)}, {"d", s(1.0)}}));
    const Vec x{0.7};
    const EmpiricalMeasure mu = EmpiricalMeasure::dirac(x);
    CHECK(c->friction(x, mu)(0, 0) == 2.0);
    CHECK(c->friction_dx(x, mu)[0](0, 0) == 0.0);
    CHECK(c->friction_dmu(x, mu, x)[0](0, 0) == 0.0);
    CHECK(c->force(x, mu)[0] == -0.7);
    CHECK(c->friction_measure_independent());

    const ModelPtr st = model_library(spec("scalar-state", {{"a", s(2.0)}, {"b", s(1.0)}}));
    const Vec zero{0.0};
    const EmpiricalMeasure at0 = EmpiricalMeasure::dirac(zero);
    CHECK(st->friction(zero, at0)(0, 0) == 2.0);
    CHECK(st->friction_dx(zero, at0)[0](0, 0) == 1.0);
    CHECK(st->force(Vec{0.4}, at0)[0] == -0.4);

    const ModelPtr in = model_library(spec("interaction", {{"a", s(2.0)}, {"b", s(0.0)}, {"c", s(1.0)}}));
    CHECK(in->friction(zero, at0)(0, 0) == 3.0);
    CHECK_FALSE(in->friction_measure_independent());
}

TEST_CASE("model_library errors", "[model]") {
    CHECK(code_of([] { (void)model_library(spec("no-such-family", {})); }) == ErrorCode::UnknownFamily);
    CHECK(code_of([] { (void)model_library(spec("scalar-state", {{"a", s(1.0)}, {"b", s(1.0)}})); }) ==
          ErrorCode::ParameterViolation);
    CHECK(code_of([] { (void)model_library(spec("interaction", {{"a", s(1.0)}, {"b", s(-2.0)}})); }) ==
          ErrorCode::ParameterViolation);
    CHECK(code_of([] { (void)model_library(spec("constant", {{"gamma_matrix", s(1.0)}})); }) ==
          ErrorCode::ParameterViolation);
    CHECK(code_of([] { (void)model_library(spec("constant", {{"gamma", ParamValue::matrix(Matrix::from_rows({{1.0, 2.0}, {0.0, 1.0}}))}})); }) ==
          ErrorCode::ParameterViolation);
    CHECK(code_of([] { (void)model_library(spec("carrillo-force", {})); }) == ErrorCode::ParameterViolation);
    CHECK(model_families().size() >= 5);
}

TEST_CASE("noise shape follows the sigma parameter", "[model]") {
    const ModelPtr m = model_library(
        spec("constant", {{"gamma", s(1.0)}, {"d", s(2.0)}, {"sigma", ParamValue::matrix(Matrix::from_rows({{1.0, 0.0, 0.5}, {0.0, 2.0, 0.0}}))}}));
    CHECK(m->dim() == 2);
    CHECK(m->noise_dim() == 3);
}

TEST_CASE("gamma_inv_dx on closed-form cases", "[model][derivative]") {
    const Vec zero{0.0};
    const EmpiricalMeasure at0 = EmpiricalMeasure::dirac(zero);
    const ModelPtr st = model_library(spec("scalar-state", {{"a", s(2.0)}, {"b", s(1.0)}}));
    CHECK(gamma_inv_dx(*st, zero, at0)[0](0, 0) == Approx(-0.25).epsilon(1e-15));
    const ModelPtr c = model_library(spec("constant", {{"gamma", s(3.0)}, {"d", s(2.0)}}));
    const Vec x2{0.1, 0.2};
    for (const Matrix& slice : gamma_inv_dx(*c, x2, EmpiricalMeasure::dirac(x2))) {
        CHECK(slice.max_abs() == 0.0);
    }
}

TEST_CASE("gamma_inv_dx matches central differences of gamma^{-1}", "[model][derivative]") {
    std::mt19937_64 rng(101);
    const double h = 1e-5;
    for (const ModelSpec& sp : all_families()) {
        const ModelPtr m = model_library(sp);
        const std::size_t d = m->dim();
        double worst = 0.0;
        for (int probe = 0; probe < 100; ++probe) {
            const Vec x = random_point(d, rng);
            const EmpiricalMeasure mu = random_measure(5, d, rng);
            const Tensor3 analytic = gamma_inv_dx(*m, x, mu);
            for (std::size_t l = 0; l < d; ++l) {
                Vec xp = x;
                Vec xm = x;
                xp[l] += h;
                xm[l] -= h;
                const Matrix fd = (inverse(m->friction(xp, mu)) - inverse(m->friction(xm, mu))) * (1.0 / (2.0 * h));
                worst = std::max(worst, (fd - analytic[l]).max_abs());
            }
        }
        INFO(sp.family << " d=" << d);
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("gamma_inv_dmu matches the mass-shift difference", "[model][derivative]") {
    // gamma is linear in mu for the interaction family, so moving one of N
    // samples by h changes gamma by (h/N) d_mu gamma(y) to second order.
    std::mt19937_64 rng(55);
    const double h = 1e-5;
    for (std::size_t d : {1u, 2u}) {
        const ModelPtr m = model_library(spec("interaction", {{"d", s(static_cast<double>(d))}, {"a", s(2.0)}, {"b", s(0.5)}, {"c", s(1.0)}}));
        double worst = 0.0;
        for (int probe = 0; probe < 50; ++probe) {
            const std::size_t n = 4;
            const EmpiricalMeasure mu = random_measure(n, d, rng);
            const Vec x = random_point(d, rng);
            const std::size_t k = static_cast<std::size_t>(probe) % n;
            const Tensor3 analytic = gamma_inv_dmu(*m, x, mu, mu.sample(k));
            for (std::size_t l = 0; l < d; ++l) {
                Vec up(mu.samples().begin(), mu.samples().end());
                Vec down = up;
                up[k * d + l] += h;
                down[k * d + l] -= h;
                const Matrix fd = (inverse(m->friction(x, EmpiricalMeasure(d, up))) -
                                   inverse(m->friction(x, EmpiricalMeasure(d, down)))) *
                                  (static_cast<double>(n) / (2.0 * h));
                worst = std::max(worst, (fd - analytic[l]).max_abs());
            }
        }
        INFO("d=" << d);
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("gamma_inv_dmu vanishes for measure-independent friction", "[model][derivative]") {
    const ModelPtr st = model_library(spec("scalar-state", {{"a", s(2.0)}, {"b", s(1.0)}}));
    const Vec x{0.3};
    const Vec y{-0.8};
    CHECK(gamma_inv_dmu(*st, x, EmpiricalMeasure(1, Vec{0.1, -0.8}), y)[0](0, 0) == 0.0);
}

TEST_CASE("symmetric pair gives antisymmetric measure derivatives", "[model][derivative]") {
    const ModelPtr m = model_library(spec("interaction", {{"a", s(2.0)}, {"b", s(0.5)}, {"c", s(1.0)}}));
    const Vec x{0.0};
    const Vec y1{0.6};
    const Vec y2{-0.6};
    const EmpiricalMeasure mu(1, Vec{0.6, -0.6});
    const double a = gamma_inv_dmu(*m, x, mu, y1)[0](0, 0);
    const double b = gamma_inv_dmu(*m, x, mu, y2)[0](0, 0);
    CHECK(a != 0.0);
    CHECK(std::abs(a + b) <= 1e-15);
}

TEST_CASE("extension mode with law-free sigma matches state-only", "[model]") {
    std::mt19937_64 rng(3);
    const ModelPtr a = model_library(spec("interaction", {{"d", s(2.0)}, {"a", s(2.0)}, {"b", s(0.5)}, {"c", s(1.0)}}));
    const ModelPtr b = model_library(
        spec("interaction", {{"d", s(2.0)}, {"a", s(2.0)}, {"b", s(0.5)}, {"c", s(1.0)}}, ModelMode::Extension));
    for (int probe = 0; probe < 10; ++probe) {
        const Vec x = random_point(2, rng);
        const EmpiricalMeasure mu = random_measure(6, 2, rng);
        CHECK(drift_S(*a, x, mu) == drift_S(*b, x, mu));
        CHECK(drift_S_tilde(*a, x, mu) == drift_S_tilde(*b, x, mu));
    }
}

TEST_CASE("carrillo force and law-dependent noise", "[model]") {
    const ModelPtr m = model_library(spec("carrillo-force", {{"kV", s(1.0)}, {"w", s(0.5)}, {"sigma", s(1.0)}, {"sigma_mu", s(0.5)}, {"a", s(2.0)}},
                                          ModelMode::Extension));
    const Vec x{1.0};
    const EmpiricalMeasure mu(1, Vec{1.0, -1.0});
    // F = -x - mean_y w (x - y)/sqrt(1 + |x - y|^2): y = 1 gives 0, y = -1 gives 0.5 * 2/sqrt(5).
    CHECK(m->force(x, mu)[0] == Approx(-1.0 - 0.5 * (0.5 * 2.0 / std::sqrt(5.0))).epsilon(1e-14));
    // sigma = 1 + 0.5 * m2/(1 + m2) with m2 = 1.
    CHECK(m->noise(x, mu)(0, 0) == Approx(1.25).epsilon(1e-15));
}
