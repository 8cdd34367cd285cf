#include <catch_amalgamated.hpp>

#include "sklimit/error.hpp"
#include "sklimit/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace sklimit;
using Catch::Approx;

namespace {

EmpiricalMeasure cloud(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec s(n * d);
    for (double& x : s) {
        x = g(rng);
    }
    return {d, s};
}

double brute_force_w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    const std::size_t n = mu.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = mu.sample(i);
            const auto b = nu.sample(perm[i]);
            for (std::size_t l = 0; l < mu.dim(); ++l) {
                cost += (a[l] - b[l]) * (a[l] - b[l]);
            }
        }
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / static_cast<double>(n));
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

}  // namespace

TEST_CASE("construction invariants", "[measure]") {
    CHECK(code_of([] { EmpiricalMeasure(1, Vec{}); }) == ErrorCode::CountMismatch);
    CHECK(code_of([] { EmpiricalMeasure(2, Vec{1.0, 2.0, 3.0}); }) == ErrorCode::CountMismatch);
    CHECK(code_of([] { EmpiricalMeasure(1, Vec{std::nan("")}); }) == ErrorCode::NonFinite);
    const EmpiricalMeasure mu(2, Vec{1.0, 2.0, 3.0, 4.0});
    CHECK(mu.size() == 2);
    CHECK(mu.sample(1)[0] == 3.0);
}

TEST_CASE("second moment", "[measure]") {
    CHECK(second_moment(EmpiricalMeasure(1, Vec{0.0})) == 0.0);
    CHECK(second_moment(EmpiricalMeasure(2, Vec{3.0, 4.0})) == 25.0);
    CHECK(second_moment(EmpiricalMeasure(1, Vec{1.0, -1.0})) == 1.0);
}

TEST_CASE("one-dimensional W2 examples", "[measure][w2]") {
    const EmpiricalMeasure a(1, Vec{0.3, -1.0, 2.0});
    CHECK(wasserstein2_1d(a, a) == 0.0);
    CHECK(wasserstein2_1d(EmpiricalMeasure(1, Vec{0.0}), EmpiricalMeasure(1, Vec{1.0})) == 1.0);
    const EmpiricalMeasure p(1, Vec{0.0, 2.0});
    const EmpiricalMeasure q(1, Vec{1.0, 3.0});
    CHECK(wasserstein2_1d(p, q) == Approx(1.0).epsilon(1e-15));
    // Both pairings: sorted gives (1 + 1)/2, crossed gives (9 + 1)/2.
    CHECK(brute_force_w2(p, q) == Approx(1.0).epsilon(1e-15));
    CHECK(code_of([&] { (void)wasserstein2_1d(EmpiricalMeasure(2, Vec{0.0, 0.0}), EmpiricalMeasure(2, Vec{1.0, 1.0})); }) ==
          ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { (void)wasserstein2_1d(p, EmpiricalMeasure(1, Vec{1.0})); }) == ErrorCode::CountMismatch);
}

TEST_CASE("assignment W2 examples", "[measure][w2]") {
    const Vec p{1.0, 2.0};
    const Vec q{4.0, -2.0};
    CHECK(wasserstein2_assignment(EmpiricalMeasure::dirac(p), EmpiricalMeasure::dirac(q)) == Approx(5.0).epsilon(1e-15));

    std::mt19937_64 rng(4);
    const EmpiricalMeasure a = cloud(4, 2, rng);
    const EmpiricalMeasure b = cloud(4, 2, rng);
    CHECK(wasserstein2_assignment(a, b) == Approx(brute_force_w2(a, b)).margin(1e-12));

    CHECK(code_of([&] { (void)wasserstein2_assignment(a, cloud(5, 2, rng)); }) == ErrorCode::CountMismatch);
    CHECK(code_of([&] { (void)wasserstein2_assignment(cloud(513, 1, rng), cloud(513, 1, rng)); }) ==
          ErrorCode::SizeLimitExceeded);
}

TEST_CASE("assignment matches brute force and the sorted fast path", "[measure][w2]") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + static_cast<std::size_t>(trial) % 3;
        const std::size_t d = 1 + static_cast<std::size_t>(trial) % 3;
        const EmpiricalMeasure a = cloud(n, d, rng);
        const EmpiricalMeasure b = cloud(n, d, rng);
        CHECK(std::abs(wasserstein2_assignment(a, b) - brute_force_w2(a, b)) <= 1e-12);
        const EmpiricalMeasure a1 = cloud(n, 1, rng);
        const EmpiricalMeasure b1 = cloud(n, 1, rng);
        CHECK(std::abs(wasserstein2_assignment(a1, b1) - wasserstein2_1d(a1, b1)) <= 1e-12);
    }
}

TEST_CASE("metric properties", "[measure][w2]") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const EmpiricalMeasure a = cloud(16, 3, rng);
        const EmpiricalMeasure b = cloud(16, 3, rng);
        const EmpiricalMeasure c = cloud(16, 3, rng);
        const double ab = wasserstein2_assignment(a, b);
        CHECK(ab == Approx(wasserstein2_assignment(b, a)).epsilon(1e-14));
        CHECK(wasserstein2_assignment(a, a) == 0.0);
        CHECK(ab <= wasserstein2_assignment(a, c) + wasserstein2_assignment(c, b) + 1e-10);
    }
}

TEST_CASE("translation invariance", "[measure][w2]") {
    std::mt19937_64 rng(33);
    const EmpiricalMeasure a = cloud(12, 2, rng);
    const EmpiricalMeasure b = cloud(12, 2, rng);
    Vec sa(a.samples().begin(), a.samples().end());
    Vec sb(b.samples().begin(), b.samples().end());
    for (std::size_t i = 0; i < sa.size(); ++i) {
        sa[i] += i % 2 == 0 ? 0.75 : -1.5;
        sb[i] += i % 2 == 0 ? 0.75 : -1.5;
    }
    CHECK(std::abs(wasserstein2_assignment(EmpiricalMeasure(2, sa), EmpiricalMeasure(2, sb)) -
                   wasserstein2_assignment(a, b)) <= 1e-12);
}

TEST_CASE("min_cost_assignment breaks ties by lowest index", "[measure][w2]") {
    const Matrix cost(3, 3, 1.0);
    const auto assign = min_cost_assignment(cost);
    CHECK(assign == std::vector<std::size_t>{0, 1, 2});
}
