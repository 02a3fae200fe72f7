#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hoptk/matrix.hpp"
#include "hoptk/rng.hpp"

namespace hoptk {

enum class SynthKind { Grid, Uniform, Clusters };

struct SynthSpec {
    SynthKind kind = SynthKind::Uniform;
    std::size_t n = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;

    // Grid
    double jitter = 0.0;  // fraction of the grid spacing, in [0, 0.5)

    // Clusters
    std::size_t num_clusters = 5;
    double spread = 0.02;  // blob standard deviation
    bool labelled = false;

    void validate() const;
};

struct SynthResult {
    Matrix X;
    std::optional<std::vector<std::size_t>> labels;
};

// Generators over the unit hypercube with known topology.
//   grid     -> jittered lattice (low H). High-dimensional inputs are
//               laid out as a lattice over at most two active axes with
//               the remaining coordinates held at 0.5; a full product
//               lattice is degenerate once d exceeds log2(n).
//   uniform  -> i.i.d. uniform points (H around 0.5)
//   clusters -> equal-sized Gaussian blobs, centers kept at pairwise
//               Chebyshev separation >= 4 * spread (high H)
SynthResult generate(const SynthSpec& spec);

// Number of rows the grid kind actually produces (n rounded down to a
// perfect power over the active axes).
std::size_t grid_point_count(std::size_t n, std::size_t d);

}  // namespace hoptk
