#include "hoptk/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hoptk {

namespace {

void check_dims(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
}

// Cholesky factorization, L lower-triangular. Throws when the input is
// not symmetric positive definite.
Matrix cholesky(const Matrix& m) {
    const std::size_t n = m.rows;
    if (m.cols != n) throw std::invalid_argument("cholesky: square matrix required");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-9 * (1.0 + std::abs(m(i, j))))
                throw std::invalid_argument("mahalanobis: covariance inverse not symmetric");
    Matrix L(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            if (i == j) {
                if (s <= 0.0) throw std::invalid_argument("mahalanobis: matrix not positive definite");
                L(i, i) = std::sqrt(s);
            } else {
                L(i, j) = s / L(j, j);
            }
        }
    }
    return L;
}

// Inverse of an SPD matrix via its Cholesky factor.
Matrix spd_inverse(const Matrix& m) {
    const Matrix L = cholesky(m);
    const std::size_t n = m.rows;
    Matrix inv(n, n);
    std::vector<double> y(n), x(n);
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = (i == col) ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * y[k];
            y[i] = s / L(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = y[i];
            for (std::size_t k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
            x[i] = s / L(i, i);
        }
        for (std::size_t i = 0; i < n; ++i) inv(i, col) = x[i];
    }
    return inv;
}

}  // namespace

DistanceMetric::DistanceMetric(MetricKind kind) : kind_(kind) {
    if (kind == MetricKind::Mahalanobis)
        throw std::invalid_argument("Mahalanobis requires a covariance inverse; use DistanceMetric::mahalanobis");
}

DistanceMetric DistanceMetric::mahalanobis(Matrix covariance_inverse) {
    cholesky(covariance_inverse);  // SPD validation
    DistanceMetric m;
    m.kind_ = MetricKind::Mahalanobis;
    m.cov_inv_ = std::move(covariance_inverse);
    return m;
}

DistanceMetric DistanceMetric::mahalanobis_from_data(const Matrix& X) {
    if (X.rows < 2) throw std::invalid_argument("mahalanobis_from_data: need at least 2 rows");
    const std::size_t n = X.rows, d = X.cols;
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += X(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double xj = X(i, j) - mean[j];
            for (std::size_t k = j; k < d; ++k) cov(j, k) += xj * (X(i, k) - mean[k]);
        }
    double trace = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = j; k < d; ++k) {
            cov(j, k) /= static_cast<double>(n - 1);
            cov(k, j) = cov(j, k);
        }
        trace += cov(j, j);
    }
    const double ridge = 1e-6 * trace / static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) cov(j, j) += ridge;
    return mahalanobis(spd_inverse(cov));
}

double DistanceMetric::distance(std::span<const double> a, std::span<const double> b) const {
    check_dims(a, b);
    const std::size_t d = a.size();
    switch (kind_) {
        case MetricKind::Chebyshev: {
            double m = 0.0;
            for (std::size_t j = 0; j < d; ++j) m = std::max(m, std::abs(a[j] - b[j]));
            return m;
        }
        case MetricKind::Euclidean: {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double t = a[j] - b[j];
                s += t * t;
            }
            return std::sqrt(s);
        }
        case MetricKind::Manhattan: {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += std::abs(a[j] - b[j]);
            return s;
        }
        case MetricKind::Cosine: {
            double ab = 0.0, aa = 0.0, bb = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                ab += a[j] * b[j];
                aa += a[j] * a[j];
                bb += b[j] * b[j];
            }
            // Zero vector: defined as 1 (maximal dissimilarity).
            if (aa == 0.0 || bb == 0.0) return 1.0;
            return 1.0 - ab / (std::sqrt(aa) * std::sqrt(bb));
        }
        case MetricKind::Mahalanobis: {
            if (cov_inv_.rows != d) throw std::invalid_argument("mahalanobis: dimension mismatch");
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double row = 0.0;
                for (std::size_t k = 0; k < d; ++k) row += cov_inv_(j, k) * (a[k] - b[k]);
                s += (a[j] - b[j]) * row;
            }
            return std::sqrt(std::max(0.0, s));
        }
    }
    return 0.0;
}

void chebyshev_subgradient(std::span<const double> a, std::span<const double> b,
                           std::span<double> grad_a, std::span<double> grad_b) {
    check_dims(a, b);
    const std::size_t d = a.size();
    for (std::size_t j = 0; j < d; ++j) grad_a[j] = grad_b[j] = 0.0;
    double best = 0.0;
    std::size_t arg = d;
    for (std::size_t j = 0; j < d; ++j) {
        const double v = std::abs(a[j] - b[j]);
        if (v > best) {
            best = v;
            arg = j;
        }
    }
    if (arg == d) return;  // a == b: documented zero-subgradient choice
    const double s = (a[arg] - b[arg]) > 0.0 ? 1.0 : -1.0;
    grad_a[arg] = s;
    grad_b[arg] = -s;
}

void DistanceMetric::distance_grad(std::span<const double> a, std::span<const double> b,
                                   std::span<double> grad_a, std::span<double> grad_b) const {
    check_dims(a, b);
    const std::size_t d = a.size();
    switch (kind_) {
        case MetricKind::Chebyshev:
            chebyshev_subgradient(a, b, grad_a, grad_b);
            return;
        case MetricKind::Euclidean: {
            const double dist = distance(a, b);
            for (std::size_t j = 0; j < d; ++j) {
                const double g = dist > 0.0 ? (a[j] - b[j]) / dist : 0.0;
                grad_a[j] = g;
                grad_b[j] = -g;
            }
            return;
        }
        case MetricKind::Manhattan: {
            for (std::size_t j = 0; j < d; ++j) {
                const double t = a[j] - b[j];
                // Left subgradient at 0.
                const double g = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
                grad_a[j] = g;
                grad_b[j] = -g;
            }
            return;
        }
        case MetricKind::Cosine: {
            double ab = 0.0, aa = 0.0, bb = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                ab += a[j] * b[j];
                aa += a[j] * a[j];
                bb += b[j] * b[j];
            }
            if (aa == 0.0 || bb == 0.0) {
                for (std::size_t j = 0; j < d; ++j) grad_a[j] = grad_b[j] = 0.0;
                return;
            }
            const double na = std::sqrt(aa), nb = std::sqrt(bb);
            for (std::size_t j = 0; j < d; ++j) {
                grad_a[j] = -(b[j] / (na * nb) - ab * a[j] / (na * na * na * nb));
                grad_b[j] = -(a[j] / (na * nb) - ab * b[j] / (nb * nb * nb * na));
            }
            return;
        }
        case MetricKind::Mahalanobis: {
            const double dist = distance(a, b);
            for (std::size_t j = 0; j < d; ++j) {
                if (dist <= 0.0) {
                    grad_a[j] = grad_b[j] = 0.0;
                    continue;
                }
                double row = 0.0;
                for (std::size_t k = 0; k < d; ++k) row += cov_inv_(j, k) * (a[k] - b[k]);
                grad_a[j] = row / dist;
                grad_b[j] = -row / dist;
            }
            return;
        }
    }
}

std::pair<std::size_t, double> nearest_in_set(const DistanceMetric& metric,
                                              std::span<const double> query, const Matrix& set,
                                              std::optional<std::size_t> exclude) {
    if (set.rows == 0 || (exclude && set.rows < 2))
        throw std::invalid_argument("nearest_in_set: empty effective set");
    if (query.size() != set.cols) throw std::invalid_argument("nearest_in_set: dimension mismatch");
    std::size_t best_i = set.rows;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.rows; ++i) {
        if (exclude && i == *exclude) continue;
        const double dd = metric.distance(query, std::span<const double>(set.row(i), set.cols));
        if (dd < best_d) {  // strict: ties keep the lowest row index
            best_d = dd;
            best_i = i;
        }
    }
    return {best_i, best_d};
}

NearestResult nearest_all_serial(const DistanceMetric& metric, const Matrix& queries,
                                 const Matrix& set, const std::vector<std::size_t>* exclude) {
    NearestResult r;
    r.index.resize(queries.rows);
    r.distance.resize(queries.rows);
    for (std::size_t q = 0; q < queries.rows; ++q) {
        std::optional<std::size_t> ex;
        if (exclude) ex = (*exclude)[q];
        auto [i, dd] = nearest_in_set(metric, {queries.row(q), queries.cols}, set, ex);
        r.index[q] = i;
        r.distance[q] = dd;
    }
    return r;
}

NearestResult nearest_all(const DistanceMetric& metric, const Matrix& queries, const Matrix& set,
                          const std::vector<std::size_t>* exclude) {
    NearestResult r;
    r.index.resize(queries.rows);
    r.distance.resize(queries.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long q = 0; q < static_cast<long long>(queries.rows); ++q) {
        std::optional<std::size_t> ex;
        if (exclude) ex = (*exclude)[q];
        auto [i, dd] = nearest_in_set(metric, {queries.row(q), queries.cols}, set, ex);
        r.index[q] = i;
        r.distance[q] = dd;
    }
    return r;
}

}  // namespace hoptk
