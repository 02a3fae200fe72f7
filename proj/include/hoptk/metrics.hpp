#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hoptk/matrix.hpp"

namespace hoptk {

enum class MetricKind { Chebyshev, Euclidean, Manhattan, Cosine, Mahalanobis };

// One of the five candidate distance metrics. Mahalanobis carries the
// inverse covariance, validated symmetric positive definite at
// construction.
class DistanceMetric {
public:
    DistanceMetric() : kind_(MetricKind::Chebyshev) {}
    explicit DistanceMetric(MetricKind kind);
    static DistanceMetric mahalanobis(Matrix covariance_inverse);
    // Covariance estimated from the data with ridge regularization
    // eps = 1e-6 * trace / d on the diagonal before inversion.
    static DistanceMetric mahalanobis_from_data(const Matrix& X);

    MetricKind kind() const { return kind_; }
    const Matrix& covariance_inverse() const { return cov_inv_; }

    double distance(std::span<const double> a, std::span<const double> b) const;

    // Gradient of distance(a, b) with respect to a (and b = -grad_a for the
    // translation-invariant metrics; Cosine and Mahalanobis are handled
    // explicitly). a == b gives the zero subgradient.
    void distance_grad(std::span<const double> a, std::span<const double> b,
                       std::span<double> grad_a, std::span<double> grad_b) const;

private:
    MetricKind kind_;
    Matrix cov_inv_;
};

// Exact brute-force nearest neighbor in `set` (row-major points), ties
// broken by lowest row index; `exclude` removes one row from
// consideration (for w_i, so a sampled point never matches itself).
std::pair<std::size_t, double> nearest_in_set(const DistanceMetric& metric,
                                              std::span<const double> query,
                                              const Matrix& set,
                                              std::optional<std::size_t> exclude = std::nullopt);

// Batch version of nearest_in_set over the rows of `queries`; the inner
// scans run in parallel. exclude_self maps query row i to set row i.
struct NearestResult {
    std::vector<std::size_t> index;
    std::vector<double> distance;
};
NearestResult nearest_all(const DistanceMetric& metric, const Matrix& queries, const Matrix& set,
                          const std::vector<std::size_t>* exclude = nullptr);
NearestResult nearest_all_serial(const DistanceMetric& metric, const Matrix& queries,
                                 const Matrix& set, const std::vector<std::size_t>* exclude = nullptr);

// Chebyshev subgradient: +-1 at the first (lowest-index) coordinate
// achieving the max absolute difference, 0 elsewhere; zero when a == b.
void chebyshev_subgradient(std::span<const double> a, std::span<const double> b,
                           std::span<double> grad_a, std::span<double> grad_b);

}  // namespace hoptk
