#include "hoptk/hopkins.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace hoptk {

namespace {
std::atomic<std::uint64_t> g_eval_count{0};
}

std::uint64_t hopkins_eval_count() { return g_eval_count.load(); }

void HopkinsConfig::validate() const {
    if (!(sampling_fraction > 0.0) || sampling_fraction > 1.0)
        throw std::invalid_argument("HopkinsConfig: sampling fraction must be in (0, 1]");
    if (target < 0.0 || target > 1.0)
        throw std::invalid_argument("HopkinsConfig: target must be in [0, 1]");
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
    if (m < 1 || m > n) throw std::invalid_argument("sample_without_replacement: need 1 <= m <= n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
        out[i] = pool[i];
    }
    return out;
}

Matrix generate_reference(const Matrix& X, std::size_t m, Rng& rng) {
    if (X.rows == 0) throw std::invalid_argument("generate_reference: empty data");
    const std::size_t d = X.cols;
    std::vector<double> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) lo[j] = hi[j] = X(0, j);
    for (std::size_t i = 1; i < X.rows; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], X(i, j));
            hi[j] = std::max(hi[j], X(i, j));
        }
    Matrix Y(m, d);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j) Y(i, j) = lo[j] + rng.uniform() * (hi[j] - lo[j]);
    return Y;
}

std::size_t hopkins_sample_count(std::size_t n, double sampling_fraction) {
    const double m = std::round(sampling_fraction * static_cast<double>(n));
    return std::max<std::size_t>(1, static_cast<std::size_t>(m));
}

HopkinsWitness hopkins_statistic(const Matrix& X, const HopkinsConfig& cfg, Rng& rng) {
    cfg.validate();
    if (X.rows < 2) throw std::invalid_argument("hopkins_statistic: need at least 2 rows");
    g_eval_count.fetch_add(1, std::memory_order_relaxed);

    const std::size_t m = hopkins_sample_count(X.rows, cfg.sampling_fraction);
    HopkinsWitness wit;
    wit.plan.sampled = sample_without_replacement(X.rows, m, rng);
    wit.plan.reference = generate_reference(X, m, rng);

    const NearestResult ures = nearest_all(cfg.metric, wit.plan.reference, X);
    const NearestResult wres = nearest_all(cfg.metric, sample_rows(X, wit.plan.sampled), X,
                                           &wit.plan.sampled);
    wit.plan.u_nn = ures.index;
    wit.plan.w_nn = wres.index;
    wit.u = ures.distance;
    wit.w = wres.distance;

    double su = 0.0, sw = 0.0;
    for (double v : wit.u) su += v;
    for (double v : wit.w) sw += v;
    wit.H = (su + sw) > 0.0 ? su / (su + sw) : 0.5;
    return wit;
}

HopkinsWitness hopkins_statistic(const Matrix& X, const HopkinsConfig& cfg) {
    Rng rng(cfg.seed);
    return hopkins_statistic(X, cfg, rng);
}

double hopkins_from_plan(const Matrix& X, const HopkinsPlan& plan, const DistanceMetric& metric) {
    const std::size_t m = plan.sampled.size();
    const std::size_t d = X.cols;
    double su = 0.0, sw = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        su += metric.distance({plan.reference.row(i), d}, {X.row(plan.u_nn[i]), d});
        sw += metric.distance({X.row(plan.sampled[i]), d}, {X.row(plan.w_nn[i]), d});
    }
    return (su + sw) > 0.0 ? su / (su + sw) : 0.5;
}

double hopkins_loss_value(const Matrix& X, const HopkinsPlan& plan, const DistanceMetric& metric,
                          double target) {
    return std::abs(hopkins_from_plan(X, plan, metric) - target);
}

NodeId hopkins_loss_with_plan(Tape& tape, NodeId x, HopkinsPlan plan, const DistanceMetric& metric,
                              double target) {
    const Matrix& X = tape.value(x);
    const std::size_t m = plan.sampled.size();
    const std::size_t d = X.cols;

    double su = 0.0, sw = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        su += metric.distance({plan.reference.row(i), d}, {X.row(plan.u_nn[i]), d});
        sw += metric.distance({X.row(plan.sampled[i]), d}, {X.row(plan.w_nn[i]), d});
    }
    const double total = su + sw;
    const double H = total > 0.0 ? su / total : 0.5;

    Matrix loss(1, 1);
    loss.data[0] = std::abs(H - target);

    auto back = [x, plan = std::move(plan), metric, target, su, sw, H,
                 total](Tape& t, NodeId self) {
        if (total <= 0.0) return;  // degenerate all-identical input: zero gradient
        const double g = t.grad(self).data[0];
        // Left subgradient of |.| : sign 0 exactly at the kink.
        const double sgn = H > target ? 1.0 : (H < target ? -1.0 : 0.0);
        if (sgn == 0.0 || g == 0.0) return;
        const double dU = g * sgn * sw / (total * total);   // dL/d sum(u)
        const double dW = -g * sgn * su / (total * total);  // dL/d sum(w)

        const Matrix& X = t.value(x);
        Matrix& gx = t.grad_ref(x);
        const std::size_t d = X.cols;
        std::vector<double> ga(d), gb(d);
        for (std::size_t i = 0; i < plan.sampled.size(); ++i) {
            // u_i: the reference point is a constant, gradient hits the
            // nearest data row only.
            metric.distance_grad({plan.reference.row(i), d}, {X.row(plan.u_nn[i]), d}, ga, gb);
            double* row = gx.row(plan.u_nn[i]);
            for (std::size_t j = 0; j < d; ++j) row[j] += dU * gb[j];
            // w_i: both the sampled row and its neighbor move.
            metric.distance_grad({X.row(plan.sampled[i]), d}, {X.row(plan.w_nn[i]), d}, ga, gb);
            double* rs = gx.row(plan.sampled[i]);
            double* rn = gx.row(plan.w_nn[i]);
            for (std::size_t j = 0; j < d; ++j) {
                rs[j] += dW * ga[j];
                rn[j] += dW * gb[j];
            }
        }
    };
    return tape.custom(std::move(loss), std::move(back));
}

NodeId hopkins_loss(Tape& tape, NodeId x, const HopkinsConfig& cfg, Rng& rng,
                    HopkinsPlan* plan_out) {
    cfg.validate();
    const Matrix& X = tape.value(x);
    if (X.rows < 2) throw std::invalid_argument("hopkins_loss: need at least 2 rows");
    g_eval_count.fetch_add(1, std::memory_order_relaxed);

    const std::size_t m = hopkins_sample_count(X.rows, cfg.sampling_fraction);
    HopkinsPlan plan;
    plan.sampled = sample_without_replacement(X.rows, m, rng);
    plan.reference = generate_reference(X, m, rng);
    const NearestResult ures = nearest_all(cfg.metric, plan.reference, X);
    const NearestResult wres = nearest_all(cfg.metric, sample_rows(X, plan.sampled), X,
                                           &plan.sampled);
    plan.u_nn = ures.index;
    plan.w_nn = wres.index;
    if (plan_out) *plan_out = plan;
    return hopkins_loss_with_plan(tape, x, std::move(plan), cfg.metric, cfg.target);
}

}  // namespace hoptk
