// Acceptance gate: one binary, one pass/fail line per criterion.
// All tolerances are pinned here, next to the check they guard.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoptk/hopkins.hpp"
#include "hoptk/io.hpp"
#include "hoptk/matrix.hpp"
#include "hoptk/metrics.hpp"
#include "hoptk/models.hpp"
#include "hoptk/rng.hpp"
#include "hoptk/stats.hpp"
#include "hoptk/synth.hpp"
#include "hoptk/tape.hpp"
#include "hoptk/train.hpp"

namespace fs = std::filesystem;
using namespace hoptk;

namespace {

std::string g_cli_path;  // set from argv[1]
int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

int run_cli(const std::string& args, const fs::path& out) {
    const std::string cmd = g_cli_path + " " + args + " > " + out.string() + " 2>&1";
    return std::system(cmd.c_str());
}

// ---------------------------------------------------------- criterion 1
// Topology ranges: d in {2, 8, 32}, n = 2000, Chebyshev, k = 0.05,
// 20 seeds per condition; grid in [0.01, 0.3], uniform in [0.4, 0.6],
// clusters in [0.7, 0.99], each in >= 95% of trials; total < 60 s.

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = 2000;
    const int seeds = 20;
    const double min_rate = 0.95;

    struct Cond {
        SynthKind kind;
        double lo, hi;
        const char* name;
    };
    const Cond conds[] = {{SynthKind::Grid, 0.01, 0.3, "grid"},
                          {SynthKind::Uniform, 0.4, 0.6, "uniform"},
                          {SynthKind::Clusters, 0.7, 0.99, "clusters"}};

    bool pass = true;
    std::ostringstream detail;
    for (std::size_t d : {2, 8, 32}) {
        for (const Cond& c : conds) {
            int hits = 0;
            for (int s = 0; s < seeds; ++s) {
                SynthSpec spec;
                spec.kind = c.kind;
                spec.n = n;
                spec.d = d;
                spec.seed = static_cast<std::uint64_t>(1000 + s);
                spec.jitter = 0.1;
                spec.num_clusters = 5;
                spec.spread = 0.04;
                HopkinsConfig cfg;
                cfg.seed = static_cast<std::uint64_t>(2000 + s);
                const double H = hopkins_statistic(generate(spec).X, cfg).H;
                if (H >= c.lo && H <= c.hi) ++hits;
            }
            const double rate = static_cast<double>(hits) / seeds;
            if (rate < min_rate) {
                pass = false;
                detail << c.name << " d=" << d << " rate=" << rate << "; ";
            }
        }
    }
    const double secs = elapsed_s(t0);
    if (secs >= 60.0) pass = false;
    detail << "runtime " << secs << " s (< 60 s required)";
    report(1, pass, "topology H ranges, 9 conditions x 20 seeds: " + detail.str());
}

// ---------------------------------------------------------- criterion 2
// hopkins_statistic vs an independent step-by-step reimplementation that
// shares the draw sequence, 50 random datasets, |dH| < 1e-12.

double independent_hopkins(const Matrix& X, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = X.rows, d = X.cols;
    const std::size_t m =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.05 * double(n))));

    // Same draw order as the library: m integer draws (partial
    // Fisher-Yates over an index pool), then m*d uniforms row-major.
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> sampled(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
        sampled[i] = pool[i];
    }
    std::vector<double> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) {
        lo[j] = hi[j] = X(0, j);
        for (std::size_t i = 1; i < n; ++i) {
            lo[j] = std::min(lo[j], X(i, j));
            hi[j] = std::max(hi[j], X(i, j));
        }
    }
    std::vector<std::vector<double>> Y(m, std::vector<double>(d));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j) Y[i][j] = lo[j] + rng.uniform() * (hi[j] - lo[j]);

    auto cheb = [&](const double* a, const double* b) {
        double mx = 0.0;
        for (std::size_t j = 0; j < d; ++j) mx = std::max(mx, std::abs(a[j] - b[j]));
        return mx;
    };
    double su = 0.0, sw = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < n; ++r) best = std::min(best, cheb(Y[i].data(), X.row(r)));
        su += best;
        best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < n; ++r)
            if (r != sampled[i]) best = std::min(best, cheb(X.row(sampled[i]), X.row(r)));
        sw += best;
    }
    return (su + sw) > 0.0 ? su / (su + sw) : 0.5;
}

void criterion_2() {
    const double tol = 1e-12;
    Rng meta(1234);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 20 + static_cast<std::size_t>(meta.below(481));   // [20, 500]
        const std::size_t d = 1 + static_cast<std::size_t>(meta.below(64));     // [1, 64]
        Matrix X(n, d);
        for (double& v : X.data) v = meta.uniform();

        HopkinsConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(trial);
        const double h_lib = hopkins_statistic(X, cfg).H;
        const double h_ind = independent_hopkins(X, cfg.seed);
        worst = std::max(worst, std::abs(h_lib - h_ind));
    }
    std::ostringstream detail;
    detail << "50 datasets, worst |dH| = " << worst << " (tolerance " << tol << ")";
    report(2, worst < tol, detail.str());
}

// ---------------------------------------------------------- criterion 3
// Composite losses (w = 0.75, H_T = 0.5) on batch-40 toy models vs
// central finite differences; relative error < 1e-4 on >= 99% of
// parameters, tie-degenerate coordinates excluded and counted.

struct GradCheck {
    std::size_t total = 0, ok = 0, excluded = 0;
};

GradCheck check_gradients(ParamSet& params, const std::vector<NodeId>& param_nodes, Tape& tape,
                          const std::function<double()>& value) {
    const double rel_tol = 1e-4;
    const double h = 1e-5;
    GradCheck res;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        for (std::size_t i = 0; i < params[pi].size(); ++i) {
            ++res.total;
            const double orig = params[pi].data[i];
            auto fd_at = [&](double step) {
                params[pi].data[i] = orig + step;
                const double up = value();
                params[pi].data[i] = orig - step;
                const double dn = value();
                params[pi].data[i] = orig;
                return (up - dn) / (2.0 * step);
            };
            const double g_fd = fd_at(h);
            const double g_fd2 = fd_at(2.0 * h);
            // A coordinate whose finite difference is unstable across step
            // sizes sits on a nearest-neighbor / max-coordinate tie.
            if (std::abs(g_fd - g_fd2) >
                1e-5 * std::max({std::abs(g_fd), std::abs(g_fd2), 1.0})) {
                ++res.excluded;
                continue;
            }
            const double g = tape.grad(param_nodes[pi]).data[i];
            const double denom = std::max({std::abs(g), std::abs(g_fd), 1e-8});
            if (std::abs(g - g_fd) / denom < rel_tol) ++res.ok;
        }
    }
    return res;
}

void criterion_3() {
    const double w = 0.75, h_target = 0.5;
    const double min_rate = 0.99;
    bool pass = true;
    std::ostringstream detail;

    // --- classifier: batch 40, d=4, C=3, hidden 16 ---
    {
        MLPClassifierSpec spec;
        spec.input_dim = 4;
        spec.hidden = 16;
        spec.num_classes = 3;
        Rng rng(301);
        ParamSet params = init_params(spec, rng);
        const Matrix x = [&] {
            Matrix m(40, 4);
            for (double& v : m.data) v = rng.uniform();
            return m;
        }();
        std::vector<std::size_t> labels(40);
        for (auto& l : labels) l = rng.below(3);

        const DistanceMetric metric(MetricKind::Chebyshev);
        // Freeze the Hopkins plan on the initial tap activations.
        HopkinsPlan plan;
        {
            const Matrix tap0 = classifier_eval(params, x).tap;
            Rng prng(302);
            plan.sampled = sample_without_replacement(40, hopkins_sample_count(40, 0.05), prng);
            plan.reference = generate_reference(tap0, plan.sampled.size(), prng);
            plan.u_nn = nearest_all(metric, plan.reference, tap0).index;
            plan.w_nn = nearest_all(metric, sample_rows(tap0, plan.sampled), tap0,
                                    &plan.sampled).index;
        }

        Tape t;
        Rng drop(1);
        const ClassifierForward f = forward_classifier(t, params, x, Mode::Eval, drop, 0.2);
        const NodeId ce = t.cross_entropy(f.logits, labels);
        const NodeId lh = hopkins_loss_with_plan(t, f.tap, plan, metric, h_target);
        t.backward(t.axpby(w, ce, 1.0 - w, lh));

        auto value = [&] {
            const ClassifierEval e = classifier_eval(params, x);
            return w * cross_entropy_value(e.logits, labels) +
                   (1.0 - w) * hopkins_loss_value(e.tap, plan, metric, h_target);
        };
        const GradCheck r = check_gradients(params, f.params, t, value);
        const double rate =
            static_cast<double>(r.ok) / static_cast<double>(r.total - r.excluded);
        detail << "classifier " << r.ok << "/" << (r.total - r.excluded) << " ok, " << r.excluded
               << " tie-excluded of " << r.total << "; ";
        if (rate < min_rate) pass = false;
    }

    // --- autoencoder: batch 40, d=8, B=2, hidden 16 ---
    {
        AutoencoderSpec spec;
        spec.input_dim = 8;
        spec.hidden = 16;
        spec.bottleneck = 2;
        Rng rng(303);
        ParamSet params = init_params(spec, rng);
        Matrix x(40, 8);
        for (double& v : x.data) v = rng.uniform();

        const DistanceMetric metric(MetricKind::Chebyshev);
        HopkinsPlan plan;
        {
            const Matrix b0 = autoencoder_eval(params, x).bottleneck;
            Rng prng(304);
            plan.sampled = sample_without_replacement(40, hopkins_sample_count(40, 0.05), prng);
            plan.reference = generate_reference(b0, plan.sampled.size(), prng);
            plan.u_nn = nearest_all(metric, plan.reference, b0).index;
            plan.w_nn = nearest_all(metric, sample_rows(b0, plan.sampled), b0,
                                    &plan.sampled).index;
        }

        Tape t;
        Rng drop(2);
        const AutoencoderForward f = forward_autoencoder(t, params, x, Mode::Eval, drop, 0.2);
        const NodeId rec = t.mse(f.reconstruction, f.input);
        const NodeId lh = hopkins_loss_with_plan(t, f.bottleneck, plan, metric, h_target);
        t.backward(t.axpby(w, rec, 1.0 - w, lh));

        auto value = [&] {
            const AutoencoderEval e = autoencoder_eval(params, x);
            return w * mse_value(e.reconstruction, x) +
                   (1.0 - w) * hopkins_loss_value(e.bottleneck, plan, metric, h_target);
        };
        const GradCheck r = check_gradients(params, f.params, t, value);
        const double rate =
            static_cast<double>(r.ok) / static_cast<double>(r.total - r.excluded);
        detail << "autoencoder " << r.ok << "/" << (r.total - r.excluded) << " ok, " << r.excluded
               << " tie-excluded of " << r.total;
        if (rate < min_rate) pass = false;
    }

    report(3, pass, "composite-loss gradients vs finite differences: " + detail.str());
}

// ---------------------------------------------------------- criterion 4
// AE topology shift: clusters n=5000 d=32, B=2, 10 seeds; mean H with
// H_T=0.5 / w_R=0.75 closer to 0.5 than baseline by >= 0.05; < 20 min.

void criterion_4() {
    const auto t0 = std::chrono::steady_clock::now();
    const int seeds = 10;
    const double min_shift = 0.05;

    SynthSpec sspec;
    sspec.kind = SynthKind::Clusters;
    sspec.n = 5000;
    sspec.d = 32;
    sspec.num_clusters = 5;
    sspec.spread = 0.2;
    sspec.seed = 41;
    const SynthResult data = generate(sspec);

    AutoencoderSpec aspec;
    aspec.input_dim = 32;
    aspec.bottleneck = 2;

    double base_sum = 0.0, treat_sum = 0.0;
    for (int s = 0; s < seeds; ++s) {
        Rng srng(static_cast<std::uint64_t>(s));
        const Splits splits = split_data(data.X, {}, srng);
        for (const bool treated : {false, true}) {
            TrainConfig cfg;
            cfg.init_lr = 4e-4;
            cfg.max_epochs = 200;
            cfg.loss_weight = treated ? 0.75 : 1.0;
            cfg.hopkins.target = 0.5;
            cfg.seed = static_cast<std::uint64_t>(s);
            const FitResult r = fit_autoencoder(aspec, splits, cfg);
            const double H = evaluation_H(extract_features(r.best_params, splits.test.X), cfg);
            (treated ? treat_sum : base_sum) += H;
        }
    }
    const double base_mean = base_sum / seeds;
    const double treat_mean = treat_sum / seeds;
    const double shift = std::abs(base_mean - 0.5) - std::abs(treat_mean - 0.5);
    const double secs = elapsed_s(t0);

    std::ostringstream detail;
    detail << "baseline mean H = " << base_mean << ", treated mean H = " << treat_mean
           << ", shift toward 0.5 = " << shift << " (>= " << min_shift << " required), runtime "
           << secs << " s (< 1200 s required)";
    report(4, shift >= min_shift && secs < 1200.0, detail.str());
}

// ---------------------------------------------------------- criterion 5
// Classifier non-degradation: 3 blobs, n=3000 d=16, 20 seeds; mean
// accuracy for each H_T in {0.01, 0.5, 0.99} (w_C = 0.75) within
// 2 percentage points of the baseline mean accuracy.

void criterion_5() {
    const int seeds = 20;
    const double max_drop = 0.02;

    SynthSpec sspec;
    sspec.kind = SynthKind::Clusters;
    sspec.n = 3000;
    sspec.d = 16;
    sspec.num_clusters = 3;
    sspec.spread = 0.06;
    sspec.labelled = true;
    sspec.seed = 51;
    const SynthResult data = generate(sspec);

    MLPClassifierSpec mspec;
    mspec.input_dim = 16;
    mspec.num_classes = 3;

    const std::vector<double> targets{0.01, 0.5, 0.99};
    std::vector<double> acc_sum(1 + targets.size(), 0.0);  // [0] = baseline

    for (int s = 0; s < seeds; ++s) {
        Rng srng(static_cast<std::uint64_t>(s));
        const Splits splits = split_data(data.X, *data.labels, srng);
        for (std::size_t c = 0; c < 1 + targets.size(); ++c) {
            TrainConfig cfg;
            cfg.init_lr = 5e-4;
            cfg.max_epochs = 80;
            cfg.loss_weight = c == 0 ? 1.0 : 0.75;
            cfg.hopkins.target = c == 0 ? 0.5 : targets[c - 1];
            cfg.seed = static_cast<std::uint64_t>(s);
            acc_sum[c] += fit_classifier(mspec, splits, cfg).record.accuracy;
        }
    }

    const double base_mean = acc_sum[0] / seeds;
    bool pass = true;
    std::ostringstream detail;
    detail << "baseline mean acc = " << base_mean;
    for (std::size_t c = 0; c < targets.size(); ++c) {
        const double mean = acc_sum[c + 1] / seeds;
        detail << ", H_T=" << targets[c] << " mean acc = " << mean;
        if (mean < base_mean - max_drop) pass = false;
    }
    detail << " (each >= baseline - 0.02 required)";
    report(5, pass, detail.str());
}

// ---------------------------------------------------------- criterion 6
// Mann-Whitney exactness: all tie-free group sizes with |a|+|b| <= 10
// match exhaustive enumeration within 1e-12; {1,2} vs {3,4} gives U=0,
// p=1/3.

void criterion_6() {
    const double tol = 1e-12;
    bool pass = true;
    std::ostringstream detail;

    const Comparison base = mann_whitney_u({1, 2}, {3, 4});
    if (!(std::abs(base.U) < tol && std::abs(base.p_two_sided - 1.0 / 3.0) < tol)) {
        pass = false;
        detail << "{1,2} vs {3,4} gave U=" << base.U << " p=" << base.p_two_sided << "; ";
    }

    // Independent oracle: U by pair counting, p by enumerating every
    // subset of pooled positions assigned to group a.
    Rng rng(601);
    std::size_t cases = 0;
    double worst = 0.0;
    for (std::size_t na = 1; na <= 9; ++na) {
        for (std::size_t nb = 1; na + nb <= 10; ++nb) {
            for (int rep = 0; rep < 5; ++rep) {
                const std::size_t n = na + nb;
                std::vector<double> pooled(n);
                for (double& v : pooled) v = rng.uniform();  // ties have probability 0
                std::vector<double> a(pooled.begin(), pooled.begin() + na);
                std::vector<double> b(pooled.begin() + na, pooled.end());

                double u_obs = 0.0;  // pair-counting definition of U
                for (double av : a)
                    for (double bv : b)
                        if (av > bv) u_obs += 1.0;

                std::vector<double> sorted = pooled;
                std::sort(sorted.begin(), sorted.end());
                const double center = 0.5 * static_cast<double>(na * nb);
                const double dev = std::abs(u_obs - center);
                std::size_t total = 0, extreme = 0;
                std::vector<bool> mask(n, false);
                std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(na), true);
                std::sort(mask.begin(), mask.end());
                do {
                    double u = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (!mask[i]) continue;
                        for (std::size_t j = 0; j < n; ++j)
                            if (!mask[j] && sorted[i] > sorted[j]) u += 1.0;
                    }
                    ++total;
                    if (std::abs(u - center) >= dev - 1e-12) ++extreme;
                } while (std::next_permutation(mask.begin(), mask.end()));
                const double p_oracle = double(extreme) / double(total);

                const Comparison c = mann_whitney_u(a, b);
                ++cases;
                worst = std::max({worst, std::abs(c.U - u_obs),
                                  std::abs(c.p_two_sided - p_oracle)});
                if (!c.exact) pass = false;
            }
        }
    }
    if (worst >= tol) pass = false;
    detail << cases << " tie-free cases, worst deviation " << worst << " (tolerance " << tol
           << ")";
    report(6, pass, detail.str());
}

// ---------------------------------------------------------- criterion 7
// bench-epoch completes on n=5000/d=32 and reports positive overhead.

void criterion_7() {
    const fs::path out = fs::temp_directory_path() / "hoptk_acc_bench.txt";
    const int rc = run_cli("bench-epoch --task classify --n 5000 --d 32 --spread 0.2 --epochs 6",
                           out);
    const std::string text = read_file(out);
    double overhead = std::numeric_limits<double>::quiet_NaN();
    const auto pos = text.find("overhead=");
    if (pos != std::string::npos) overhead = std::atof(text.c_str() + pos + 9);
    const bool pass = rc == 0 && overhead > 0.0;
    std::ostringstream detail;
    detail << "overhead = " << overhead << "% (positive required; the reference figure of"
           << " 10-13% is hardware-dependent and not asserted)";
    report(7, pass, detail.str());
    fs::remove(out);
}

// ---------------------------------------------------------- criterion 8
// Repeating any CLI invocation with identical flags/seeds produces
// byte-identical non-timing outputs.

std::string normalized_records(const fs::path& run_dir) {
    // Run records with the timing fields zeroed; everything else must be
    // byte-identical.
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(run_dir))
        if (e.path().filename().string().rfind("run_", 0) == 0) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::ostringstream os;
    for (const fs::path& f : files) {
        for (const std::string& line : read_lines(f.string())) {
            nlohmann::ordered_json j = nlohmann::ordered_json::parse(line);
            j["epoch_ms"] = nlohmann::json::array();
            for (auto& e : j["log"]) e["duration_ms"] = 0.0;
            os << f.filename().string() << ": " << j.dump() << "\n";
        }
    }
    return os.str();
}

void criterion_8() {
    const fs::path base = fs::temp_directory_path() / "hoptk_acc_det";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path log = base / "cli.log";

    bool pass = true;
    std::ostringstream detail;

    auto fill = [&](const fs::path& dir) {
        fs::create_directories(dir);
        int rc = 0;
        rc |= run_cli("gen --kind clusters --n 300 --d 8 --spread 0.04 --seed 7 --labelled --out " +
                          (dir / "data.csv").string(),
                      log);
        rc |= run_cli("train-classify --data " + (dir / "data.csv").string() +
                          " --ht 0.5 --w 0.75 --repeats 2 --max-epochs 5 --base-seed 3 --out " +
                          (dir / "runs").string(),
                      log);
        rc |= run_cli("report --dir " + (dir / "runs").string() + " --out " +
                          (dir / "rep").string(),
                      log);
        return rc;
    };

    const fs::path a = base / "a", b = base / "b";
    if (fill(a) != 0 || fill(b) != 0) {
        pass = false;
        detail << "CLI invocation failed; ";
    } else {
        if (read_file(a / "data.csv") != read_file(b / "data.csv")) {
            pass = false;
            detail << "gen CSV differs; ";
        }
        if (read_file(a / "runs/manifest.jsonl") != read_file(b / "runs/manifest.jsonl")) {
            pass = false;
            detail << "manifest differs; ";
        }
        if (normalized_records(a / "runs") != normalized_records(b / "runs")) {
            pass = false;
            detail << "run records differ beyond timing fields; ";
        }
        for (const char* f : {"summary.csv", "quantiles.csv"}) {
            if (read_file(a / "rep" / f) != read_file(b / "rep" / f)) {
                pass = false;
                detail << f << " differs; ";
            }
        }
    }
    detail << "gen/train/report repeated with identical flags and seeds";
    report(8, pass, detail.str());
    fs::remove_all(base);
}

// ---------------------------------------------------------- criterion 9
// IDX ingestion: crafted 2-image fixture parses to the exact expected
// feature values; pixel 0 -> -1.0, pixel 255 -> +1.0.

void criterion_9() {
    const fs::path dir = fs::temp_directory_path();
    const fs::path img = dir / "hoptk_acc_images.idx";
    const fs::path lab = dir / "hoptk_acc_labels.idx";
    {
        std::ofstream f(img, std::ios::binary);
        const unsigned char header[] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2};
        f.write(reinterpret_cast<const char*>(header), sizeof header);
        const unsigned char pixels[] = {0, 255, 128, 64, 255, 0, 1, 254};
        f.write(reinterpret_cast<const char*>(pixels), sizeof pixels);
    }
    {
        std::ofstream f(lab, std::ios::binary);
        const unsigned char header[] = {0, 0, 8, 1, 0, 0, 0, 2};
        f.write(reinterpret_cast<const char*>(header), sizeof header);
        const unsigned char labels[] = {0, 7};
        f.write(reinterpret_cast<const char*>(labels), sizeof labels);
    }

    bool pass = true;
    std::ostringstream detail;
    try {
        const FeatureFile ff = read_idx(img.string(), lab.string());
        auto expect = [&](double got, double want) {
            if (std::abs(got - want) > 1e-12) {
                pass = false;
                detail << "got " << got << " want " << want << "; ";
            }
        };
        expect(ff.X(0, 0), -1.0);
        expect(ff.X(0, 1), 1.0);
        expect(ff.X(0, 2), 128.0 / 127.5 - 1.0);  // 0.0039215686...
        expect(ff.X(0, 3), 64.0 / 127.5 - 1.0);
        expect(ff.X(1, 0), 1.0);
        expect(ff.X(1, 1), -1.0);
        if (ff.labels != std::vector<std::size_t>{0, 7}) {
            pass = false;
            detail << "labels wrong; ";
        }
        if (ff.X.rows != 2 || ff.X.cols != 4) {
            pass = false;
            detail << "shape wrong; ";
        }
    } catch (const std::exception& e) {
        pass = false;
        detail << "exception: " << e.what() << "; ";
    }
    detail << "2-image 2x2 fixture, pixel p -> p/127.5 - 1";
    report(9, pass, detail.str());
    fs::remove(img);
    fs::remove(lab);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-hoptk_cli> [criteria...]\n");
        return 2;
    }
    g_cli_path = argv[1];

    std::vector<int> wanted;
    for (int i = 2; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    auto run = [&](int id, void (*fn)()) {
        if (wanted.empty() || std::find(wanted.begin(), wanted.end(), id) != wanted.end()) fn();
    };

    run(1, criterion_1);
    run(2, criterion_2);
    run(3, criterion_3);
    run(6, criterion_6);
    run(7, criterion_7);
    run(8, criterion_8);
    run(9, criterion_9);
    run(5, criterion_5);
    run(4, criterion_4);

    std::printf("%s (%d of 9 criteria failed)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
