#include "sklimit/measure.hpp"

#include "sklimit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sklimit {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, Vec samples) : dim_(dim), samples_(std::move(samples)) {
    if (dim_ == 0) {
        throw Error(ErrorCode::DimensionMismatch, "measure dimension must be positive");
    }
    if (samples_.empty() || samples_.size() % dim_ != 0) {
        throw Error(ErrorCode::CountMismatch, "measure needs N >= 1 samples of dimension " + std::to_string(dim_));
    }
    for (double v : samples_) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFinite, "measure sample contains NaN or Inf");
        }
    }
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::span<const double> point) {
    return EmpiricalMeasure(point.size(), Vec(point.begin(), point.end()));
}

double second_moment(const EmpiricalMeasure& mu) {
    return squared_norm(mu.samples()) / static_cast<double>(mu.size());
}

namespace {

void require_comparable(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.dim() != nu.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
    }
    if (mu.size() != nu.size()) {
        throw Error(ErrorCode::CountMismatch, "only equal-size empirical measures are supported");
    }
}

}  // namespace

double wasserstein2_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.dim() != 1 || nu.dim() != 1) {
        throw Error(ErrorCode::DimensionMismatch, "wasserstein2_1d needs one-dimensional measures");
    }
    require_comparable(mu, nu);
    Vec a(mu.samples().begin(), mu.samples().end());
    Vec b(nu.samples().begin(), nu.samples().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

std::vector<std::size_t> min_cost_assignment(const Matrix& cost) {
    // Shortest augmenting path with row/column potentials (Jonker-Volgenant
    // style), O(n^3). Index 0 of the work arrays is a virtual column.
    const std::size_t n = cost.rows();
    constexpr double inf = std::numeric_limits<double>::infinity();
    Vec u(n + 1, 0.0);
    Vec v(n + 1, 0.0);
    std::vector<std::size_t> match_col(n + 1, 0);  // column j -> row (1-based)
    std::vector<std::size_t> way(n + 1, 0);
    for (std::size_t row = 1; row <= n; ++row) {
        match_col[0] = row;
        std::size_t j0 = 0;
        Vec minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match_col[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) {
        assignment[match_col[j] - 1] = j - 1;
    }
    return assignment;
}

double wasserstein2_assignment(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    require_comparable(mu, nu);
    const std::size_t n = mu.size();
    if (n > kMaxAssignmentSize) {
        throw Error(ErrorCode::SizeLimitExceeded,
                    "exact assignment limited to N <= 512, got " + std::to_string(n));
    }
    Matrix cost(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = mu.sample(i);
        for (std::size_t j = 0; j < n; ++j) {
            const auto y = nu.sample(j);
            double s = 0.0;
            for (std::size_t l = 0; l < x.size(); ++l) {
                s += (x[l] - y[l]) * (x[l] - y[l]);
            }
            cost(i, j) = s;
        }
    }
    const auto assignment = min_cost_assignment(cost);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += cost(i, assignment[i]);
    }
    return std::sqrt(total / static_cast<double>(n));
}

}  // namespace sklimit
