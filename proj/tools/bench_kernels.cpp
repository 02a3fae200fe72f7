// Serial vs OpenMP kernel comparison: dense matmul and batched
// nearest-neighbor scans, the two hot paths of the toolkit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "hoptk/matrix.hpp"
#include "hoptk/metrics.hpp"
#include "hoptk/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace hoptk;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    return m;
}

double time_ms(const std::function<void()>& fn, int reps) {
    using clock = std::chrono::steady_clock;
    fn();  // warm-up
    const auto t0 = clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double checksum(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data) s += v;
    return s;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both columns run the same serial loops\n");
#endif
    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

    Rng rng(7);

    for (std::size_t n : {128, 256, 512}) {
        const Matrix a = random_matrix(n, n, rng);
        const Matrix b = random_matrix(n, n, rng);
        Matrix out_s, out_p;
        const double ts = time_ms([&] { out_s = kernels::matmul_serial(a, b); }, 3);
        const double tp = time_ms([&] { out_p = kernels::matmul(a, b); }, 3);
        if (std::abs(checksum(out_s) - checksum(out_p)) > 1e-9 * n * n)
            std::printf("WARNING: matmul serial/parallel mismatch at n=%zu\n", n);
        std::printf("matmul %4zux%-4zu              %12.3f %12.3f %7.2fx\n", n, n, ts, tp, ts / tp);
    }

    const DistanceMetric metric(MetricKind::Chebyshev);
    for (std::size_t n : {2000, 5000}) {
        const std::size_t d = 32;
        const Matrix set = random_matrix(n, d, rng);
        const Matrix queries = random_matrix(n / 10, d, rng);
        NearestResult r_s, r_p;
        const double ts = time_ms([&] { r_s = nearest_all_serial(metric, queries, set); }, 3);
        const double tp = time_ms([&] { r_p = nearest_all(metric, queries, set); }, 3);
        bool ok = r_s.index == r_p.index;
        if (!ok) std::printf("WARNING: nearest-neighbor serial/parallel mismatch at n=%zu\n", n);
        std::printf("nearest %4zu q / %-5zu set    %12.3f %12.3f %7.2fx\n", queries.rows, n, ts, tp,
                    ts / tp);
    }
    return 0;
}
