#include "hoptk/synth.hpp"

#include <cmath>
#include <stdexcept>

namespace hoptk {

namespace {
constexpr std::size_t kMaxGridAxes = 2;
constexpr int kCenterRetries = 1000;

std::size_t grid_axes(std::size_t d) { return std::min(d, kMaxGridAxes); }

std::size_t grid_side(std::size_t n, std::size_t a) {
    auto g = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 1.0 / a) + 1e-9));
    return std::max<std::size_t>(1, g);
}
}  // namespace

void SynthSpec::validate() const {
    if (n < 1) throw std::invalid_argument("SynthSpec: n must be >= 1");
    if (d < 1) throw std::invalid_argument("SynthSpec: d must be >= 1");
    if (kind == SynthKind::Grid && (jitter < 0.0 || jitter >= 0.5))
        throw std::invalid_argument("SynthSpec: jitter must be in [0, 0.5)");
    if (kind == SynthKind::Clusters) {
        if (num_clusters < 1 || (labelled && num_clusters < 2))
            throw std::invalid_argument("SynthSpec: labelled clusters need num_clusters >= 2");
        if (spread <= 0.0) throw std::invalid_argument("SynthSpec: spread must be positive");
    }
}

std::size_t grid_point_count(std::size_t n, std::size_t d) {
    const std::size_t a = grid_axes(d);
    const std::size_t g = grid_side(n, a);
    std::size_t total = 1;
    for (std::size_t i = 0; i < a; ++i) total *= g;
    return total;
}

static SynthResult generate_grid(const SynthSpec& spec, Rng& rng) {
    const std::size_t a = grid_axes(spec.d);
    const std::size_t g = grid_side(spec.n, a);
    const std::size_t npts = grid_point_count(spec.n, spec.d);
    const double h = g > 1 ? 1.0 / static_cast<double>(g - 1) : 0.0;

    Matrix X(npts, spec.d, 0.5);
    std::vector<std::size_t> idx(a, 0);
    for (std::size_t i = 0; i < npts; ++i) {
        for (std::size_t ax = 0; ax < a; ++ax)
            X(i, ax) = g > 1 ? static_cast<double>(idx[ax]) * h : 0.5;
        for (std::size_t ax = a; ax-- > 0;) {  // odometer increment
            if (++idx[ax] < g) break;
            idx[ax] = 0;
        }
    }
    if (spec.jitter > 0.0 && h > 0.0) {
        for (std::size_t i = 0; i < npts; ++i)
            for (std::size_t ax = 0; ax < a; ++ax)
                X(i, ax) += (rng.uniform() * 2.0 - 1.0) * spec.jitter * h;
    }
    return {std::move(X), std::nullopt};
}

static SynthResult generate_uniform(const SynthSpec& spec, Rng& rng) {
    Matrix X(spec.n, spec.d);
    for (double& v : X.data) v = rng.uniform();
    return {std::move(X), std::nullopt};
}

static SynthResult generate_clusters(const SynthSpec& spec, Rng& rng) {
    const std::size_t nc = spec.num_clusters;
    Matrix centers(nc, spec.d);
    bool ok = false;
    for (int attempt = 0; attempt < kCenterRetries && !ok; ++attempt) {
        for (double& v : centers.data) v = rng.uniform();
        ok = true;
        for (std::size_t i = 0; i < nc && ok; ++i)
            for (std::size_t j = 0; j < i && ok; ++j) {
                double m = 0.0;
                for (std::size_t k = 0; k < spec.d; ++k)
                    m = std::max(m, std::abs(centers(i, k) - centers(j, k)));
                if (m < 4.0 * spec.spread) ok = false;
            }
    }
    if (!ok)
        throw std::runtime_error(
            "generate: could not place cluster centers at the required separation; "
            "try a smaller spread or fewer clusters");

    Matrix X(spec.n, spec.d);
    std::vector<std::size_t> labels(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t blob = i % nc;  // counts differ by at most 1
        labels[i] = blob;
        for (std::size_t j = 0; j < spec.d; ++j)
            X(i, j) = centers(blob, j) + spec.spread * rng.normal();
    }
    SynthResult r{std::move(X), std::nullopt};
    if (spec.labelled) r.labels = std::move(labels);
    return r;
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    switch (spec.kind) {
        case SynthKind::Grid:
            return generate_grid(spec, rng);
        case SynthKind::Uniform:
            return generate_uniform(spec, rng);
        case SynthKind::Clusters:
            return generate_clusters(spec, rng);
    }
    throw std::logic_error("generate: unknown kind");
}

}  // namespace hoptk
