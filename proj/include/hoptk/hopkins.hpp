#pragma once

#include <cstdint>
#include <vector>

#include "hoptk/matrix.hpp"
#include "hoptk/metrics.hpp"
#include "hoptk/rng.hpp"
#include "hoptk/tape.hpp"

namespace hoptk {

struct HopkinsConfig {
    double sampling_fraction = 0.05;  // m = max(1, round(k * n))
    DistanceMetric metric;            // Chebyshev by default
    double target = 0.5;              // H_T in [0, 1]
    std::uint64_t seed = 0;

    void validate() const;
    // Ripley's guidance: m < 0.1 n. Larger fractions are accepted but
    // flagged so callers can warn.
    bool exceeds_ripley_fraction() const { return sampling_fraction > 0.1; }
};

// Frozen per-evaluation state: which rows were sampled, the reference
// set, and the nearest-neighbor assignments. Assignments stay fixed
// between the forward and backward of a single step.
struct HopkinsPlan {
    std::vector<std::size_t> sampled;  // m distinct row indices of X
    Matrix reference;                  // m x d, constant w.r.t. differentiation
    std::vector<std::size_t> u_nn;     // nearest X row per reference point
    std::vector<std::size_t> w_nn;     // nearest X row (!= self) per sampled point
};

struct HopkinsWitness {
    HopkinsPlan plan;
    std::vector<double> u;  // reference -> X distances
    std::vector<double> w;  // sampled -> X \ {self} distances
    double H = 0.0;
};

// m distinct indices, uniform over subsets, order by draw (partial
// Fisher-Yates). Consumes exactly m integer draws.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng);

// m x d reference points, each entry uniform in the per-column
// [min, max] range of X. Consumes m * d uniforms in row-major order.
Matrix generate_reference(const Matrix& X, std::size_t m, Rng& rng);

std::size_t hopkins_sample_count(std::size_t n, double sampling_fraction);

// The statistic, steps 2-5: sample, generate the reference, take the two
// nearest-neighbor distance sums, H = sum(u) / (sum(u) + sum(w)).
// Degenerate all-identical input (both sums zero) gives H = 0.5.
HopkinsWitness hopkins_statistic(const Matrix& X, const HopkinsConfig& cfg, Rng& rng);
HopkinsWitness hopkins_statistic(const Matrix& X, const HopkinsConfig& cfg);  // Rng(cfg.seed)

// Re-evaluate H (and the loss) for a given X under a frozen plan. Used by
// the tape op's backward and by finite-difference checks.
double hopkins_from_plan(const Matrix& X, const HopkinsPlan& plan, const DistanceMetric& metric);
double hopkins_loss_value(const Matrix& X, const HopkinsPlan& plan, const DistanceMetric& metric,
                          double target);

// Records |H - H_T| on the tape. The sampled indices, reference set and
// nearest-neighbor assignments are frozen from the forward pass; the
// gradient flows through the selected distances, the quotient and the
// absolute value. The reference set is a stop-gradient constant.
NodeId hopkins_loss(Tape& tape, NodeId x, const HopkinsConfig& cfg, Rng& rng,
                    HopkinsPlan* plan_out = nullptr);
// Same op under an externally fixed plan (finite-difference checks).
NodeId hopkins_loss_with_plan(Tape& tape, NodeId x, HopkinsPlan plan, const DistanceMetric& metric,
                              double target);

// Instrumentation: number of Hopkins evaluations since process start.
// Lets tests prove the Hopkins path is never touched when w = 1.
std::uint64_t hopkins_eval_count();

}  // namespace hoptk
