// Command-line harness: data generation/ingestion, Hopkins reports,
// experiment grids, aggregation, and epoch-overhead benchmarking.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hoptk/hopkins.hpp"
#include "hoptk/io.hpp"
#include "hoptk/matrix.hpp"
#include "hoptk/metrics.hpp"
#include "hoptk/models.hpp"
#include "hoptk/rng.hpp"
#include "hoptk/stats.hpp"
#include "hoptk/synth.hpp"
#include "hoptk/train.hpp"

namespace fs = std::filesystem;
using namespace hoptk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

MetricKind parse_metric(const std::string& name) {
    if (name == "chebyshev") return MetricKind::Chebyshev;
    if (name == "euclidean") return MetricKind::Euclidean;
    if (name == "manhattan") return MetricKind::Manhattan;
    if (name == "cosine") return MetricKind::Cosine;
    if (name == "mahalanobis") return MetricKind::Mahalanobis;
    throw CLI::ValidationError("--metric", "unknown metric '" + name + "'");
}

SynthKind parse_kind(const std::string& name) {
    if (name == "grid") return SynthKind::Grid;
    if (name == "uniform") return SynthKind::Uniform;
    if (name == "clusters") return SynthKind::Clusters;
    throw CLI::ValidationError("--kind", "unknown kind '" + name + "'");
}

DistanceMetric make_metric(MetricKind kind, const Matrix& X) {
    if (kind == MetricKind::Mahalanobis) return DistanceMetric::mahalanobis_from_data(X);
    return DistanceMetric(kind);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
    std::string kind = "uniform";
    std::size_t n = 0, d = 0;
    std::uint64_t seed = 0;
    double jitter = 0.1;
    std::size_t clusters = 5;
    double spread = 0.02;
    bool labelled = false;
    std::string out = "data.csv";
};

int cmd_gen(const GenArgs& a) {
    SynthSpec spec;
    spec.kind = parse_kind(a.kind);
    spec.n = a.n;
    spec.d = a.d;
    spec.seed = a.seed;
    spec.jitter = a.jitter;
    spec.num_clusters = a.clusters;
    spec.spread = a.spread;
    spec.labelled = a.labelled;
    spec.validate();
    SynthResult res = generate(spec);
    write_feature_csv(a.out, res.X, res.labels ? *res.labels : std::vector<std::size_t>{});

    HopkinsConfig hc;
    hc.seed = a.seed;
    const HopkinsWitness wit = hopkins_statistic(res.X, hc);
    std::cout << "rows=" << res.X.rows << " cols=" << res.X.cols << " file=" << a.out << "\n"
              << "H=" << fmt(wit.H) << " (chebyshev, k=0.05, seed=" << a.seed << ")\n";
    return kExitOk;
}

// ------------------------------------------------------------ hopkins

struct HopkinsArgs {
    std::string file;
    std::string metric = "chebyshev";
    double k = 0.05;
    std::uint64_t seed = 0;
    std::size_t trials = 1;
};

int cmd_hopkins(const HopkinsArgs& a) {
    FeatureFile ff = read_feature_csv(a.file);
    HopkinsConfig hc;
    hc.sampling_fraction = a.k;
    hc.seed = a.seed;
    hc.metric = make_metric(parse_metric(a.metric), ff.X);
    hc.validate();
    if (hc.exceeds_ripley_fraction())
        std::cerr << "warning: sampling fraction " << a.k << " exceeds 0.1\n";

    std::vector<double> hs;
    Rng rng(a.seed);
    for (std::size_t t = 0; t < a.trials; ++t) {
        Rng trial = rng.fork(t);
        const HopkinsWitness wit = hopkins_statistic(ff.X, hc, trial);
        hs.push_back(wit.H);
        std::cout << "trial " << t << ": H=" << fmt(wit.H) << "\n";
    }
    if (hs.size() >= 2) {
        const MeanCi ci = mean_ci95(hs);
        std::cout << "mean H=" << fmt(ci.mean) << " +- " << fmt(ci.half_width) << " (CI95, "
                  << hs.size() << " trials)\n";
    } else {
        std::cout << "mean H=" << fmt(hs.front()) << " (1 trial)\n";
    }
    return kExitOk;
}

// -------------------------------------------------------------- train

struct TrainArgs {
    // data: CSV path, or a synthetic blob spec
    std::string data;
    std::size_t synth_n = 0, synth_d = 0, synth_clusters = 5;
    double synth_spread = 0.02;
    std::uint64_t synth_seed = 0;
    bool zscore = false;

    std::vector<double> h_targets;  // H_T list; baseline w=1 always runs
    double w = 0.75;
    std::vector<std::size_t> bottlenecks{2};  // AE only
    std::size_t repeats = 1;
    std::uint64_t base_seed = 0;
    std::size_t max_epochs = 1000;
    double lr = 0.0;  // 0 -> per-task default
    std::string out = "runs";
};

struct LoadedData {
    Matrix X;
    std::vector<std::size_t> labels;
};

LoadedData load_train_data(const TrainArgs& a, bool need_labels) {
    LoadedData out;
    if (!a.data.empty()) {
        FeatureFile ff = read_feature_csv(a.data);
        out.X = std::move(ff.X);
        out.labels = std::move(ff.labels);
    } else {
        if (a.synth_n == 0 || a.synth_d == 0)
            throw CLI::ValidationError("--data", "provide --data or --synth-n/--synth-d");
        SynthSpec spec;
        spec.kind = SynthKind::Clusters;
        spec.n = a.synth_n;
        spec.d = a.synth_d;
        spec.seed = a.synth_seed;
        spec.num_clusters = a.synth_clusters;
        spec.spread = a.synth_spread;
        spec.labelled = true;
        spec.validate();
        SynthResult res = generate(spec);
        out.X = std::move(res.X);
        out.labels = std::move(*res.labels);
    }
    if (need_labels && out.labels.empty())
        throw DataError("classification requires a label column");
    return out;
}

std::size_t num_classes(const std::vector<std::size_t>& labels) {
    std::size_t c = 0;
    for (std::size_t l : labels) c = std::max(c, l + 1);
    return std::max<std::size_t>(c, 2);
}

TrainConfig base_config(const TrainArgs& a, bool autoenc, double w, double h_target,
                        std::uint64_t seed) {
    TrainConfig cfg;
    cfg.init_lr = a.lr > 0.0 ? a.lr : (autoenc ? 4e-4 : 1e-4);
    cfg.max_epochs = a.max_epochs;
    cfg.loss_weight = w;
    cfg.hopkins.target = h_target;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

struct Condition {
    std::string name;
    double w;
    double h_target;
    std::size_t bottleneck;  // ignored for classify
};

std::vector<Condition> build_grid(const TrainArgs& a, bool autoenc) {
    std::vector<Condition> grid;
    const std::vector<std::size_t> bs =
        autoenc ? a.bottlenecks : std::vector<std::size_t>{0};
    for (std::size_t b : bs) {
        const std::string suffix = autoenc ? "_B" + std::to_string(b) : "";
        grid.push_back({"baseline" + suffix, 1.0, 0.5, b});
        for (double ht : a.h_targets) {
            std::ostringstream name;
            name << "HT" << fmt(ht) << "_w" << fmt(a.w) << suffix;
            grid.push_back({name.str(), a.w, ht, b});
        }
    }
    return grid;
}

void write_run(const fs::path& dir, const Condition& cond, std::size_t rep,
               const RunRecord& rec) {
    const std::string name = "run_" + cond.name + "_r" + std::to_string(rep) + ".jsonl";
    const fs::path file = dir / name;
    std::ofstream f(file, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + file.string());
    f << run_record_to_json(rec, cond.name) << '\n';
    nlohmann::ordered_json m;
    m["condition"] = cond.name;
    m["repeat"] = rep;
    m["seed"] = rec.seed;
    m["file"] = name;
    append_line((dir / "manifest.jsonl").string(), m.dump());
}

int cmd_train_classify(const TrainArgs& a) {
    const LoadedData data = load_train_data(a, true);
    const std::vector<Condition> grid = build_grid(a, false);
    fs::create_directories(a.out);

    MLPClassifierSpec spec;
    spec.input_dim = data.X.cols;
    spec.num_classes = num_classes(data.labels);

    for (const Condition& cond : grid) {
        for (std::size_t rep = 0; rep < a.repeats; ++rep) {
            const std::uint64_t seed = a.base_seed + rep;
            TrainConfig cfg = base_config(a, false, cond.w, cond.h_target, seed);
            Rng split_rng(seed);
            Matrix X = data.X;
            Splits splits = split_data(X, data.labels, split_rng);
            if (a.zscore) {
                const ZScore z = ZScore::fit(splits.train.X);
                splits.train.X = z.apply(splits.train.X);
                splits.val.X = z.apply(splits.val.X);
                splits.test.X = z.apply(splits.test.X);
            }
            FitResult fit = fit_classifier(spec, splits, cfg);
            const ClassifierEval ev = classifier_eval(fit.best_params, splits.test.X);
            fit.record.accuracy = accuracy(ev.logits, splits.test.labels);
            fit.record.H = evaluation_H(ev.tap, cfg);
            write_run(a.out, cond, rep, fit.record);
            std::cout << cond.name << " r" << rep << ": acc=" << fmt(fit.record.accuracy)
                      << " H=" << fmt(fit.record.H) << " epochs=" << fit.record.epochs << "\n";
        }
    }
    return kExitOk;
}

int cmd_train_ae(const TrainArgs& a) {
    const LoadedData data = load_train_data(a, false);
    const std::vector<Condition> grid = build_grid(a, true);
    fs::create_directories(a.out);

    for (const Condition& cond : grid) {
        if (cond.bottleneck == 0 || cond.bottleneck >= data.X.cols)
            throw CLI::ValidationError("--b", "bottleneck must be in (0, input dim)");
        for (std::size_t rep = 0; rep < a.repeats; ++rep) {
            const std::uint64_t seed = a.base_seed + rep;
            TrainConfig cfg = base_config(a, true, cond.w, cond.h_target, seed);
            Rng split_rng(seed);
            Splits splits = split_data(data.X, data.labels, split_rng);
            if (a.zscore) {
                const ZScore z = ZScore::fit(splits.train.X);
                splits.train.X = z.apply(splits.train.X);
                splits.val.X = z.apply(splits.val.X);
                splits.test.X = z.apply(splits.test.X);
            }
            AutoencoderSpec spec;
            spec.input_dim = data.X.cols;
            spec.bottleneck = cond.bottleneck;
            FitResult fit = fit_autoencoder(spec, splits, cfg);

            // Bottleneck features of the whole (split-order) dataset drive
            // both the evaluation H and the downstream probe.
            Splits feat;
            feat.train = {extract_features(fit.best_params, splits.train.X), splits.train.labels};
            feat.val = {extract_features(fit.best_params, splits.val.X), splits.val.labels};
            feat.test = {extract_features(fit.best_params, splits.test.X), splits.test.labels};
            fit.record.H = evaluation_H(feat.test.X, cfg);

            if (!data.labels.empty()) {
                LinearProbeSpec probe_spec;
                probe_spec.input_dim = cond.bottleneck;
                probe_spec.num_classes = num_classes(data.labels);
                TrainConfig probe_cfg = base_config(a, true, 1.0, 0.5, seed ^ 0x9e3779b9u);
                const FitResult probe = train_probe(probe_spec, feat, probe_cfg);
                fit.record.accuracy =
                    accuracy(probe_eval(probe.best_params, feat.test.X), feat.test.labels);
            } else {
                fit.record.accuracy = std::numeric_limits<double>::quiet_NaN();
            }
            write_run(a.out, cond, rep, fit.record);
            std::cout << cond.name << " r" << rep << ": acc=" << fmt(fit.record.accuracy)
                      << " H=" << fmt(fit.record.H) << " epochs=" << fit.record.epochs << "\n";
        }
    }
    return kExitOk;
}

// ------------------------------------------------------------- report

int cmd_report(const std::string& dir, const std::string& out_dir) {
    const fs::path manifest = fs::path(dir) / "manifest.jsonl";
    if (!fs::exists(manifest)) throw DataError("missing manifest: " + manifest.string());

    std::map<std::string, std::vector<RunRecord>> groups;
    for (const std::string& line : read_lines(manifest.string())) {
        const nlohmann::json m = nlohmann::json::parse(line);
        const std::string file = (fs::path(dir) / m.at("file").get<std::string>()).string();
        for (const std::string& rec_line : read_lines(file)) {
            std::string cond;
            RunRecord rec = run_record_from_json(rec_line, &cond);
            groups[cond].push_back(std::move(rec));
        }
    }
    if (groups.empty()) throw DataError("no run records under " + dir);

    std::string baseline_name;
    for (const auto& [name, recs] : groups)
        if (name.rfind("baseline", 0) == 0) baseline_name = name;
    // Per-bottleneck baselines: match a condition "..._Bk" to "baseline_Bk".
    auto baseline_for = [&](const std::string& cond) -> const std::vector<RunRecord>* {
        const auto pos = cond.rfind("_B");
        const std::string want = pos == std::string::npos ? "baseline" : "baseline" + cond.substr(pos);
        const auto it = groups.find(want);
        return it == groups.end() ? nullptr : &it->second;
    };
    if (groups.size() > 1) {
        for (const auto& [name, recs] : groups) {
            if (name.rfind("baseline", 0) == 0) continue;
            if (!baseline_for(name))
                throw DataError("missing baseline condition for '" + name + "'");
        }
    }

    fs::create_directories(out_dir);
    std::ofstream summary(fs::path(out_dir) / "summary.csv", std::ios::trunc);
    summary << "condition,runs,acc_mean,acc_ci95,H_mean,H_ci95,p_vs_baseline,stars\n";
    std::ofstream quant(fs::path(out_dir) / "quantiles.csv", std::ios::trunc);
    quant << "condition,metric,min,q25,median,q75,max\n";

    auto quantile_row = [&](const std::string& cond, const std::string& metric,
                            std::vector<double> xs) {
        std::sort(xs.begin(), xs.end());
        auto q = [&](double p) {
            const double idx = p * static_cast<double>(xs.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(idx);
            const std::size_t hi = std::min(lo + 1, xs.size() - 1);
            return xs[lo] + (idx - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
        };
        quant << cond << ',' << metric << ',' << fmt(xs.front()) << ',' << fmt(q(0.25)) << ','
              << fmt(q(0.5)) << ',' << fmt(q(0.75)) << ',' << fmt(xs.back()) << '\n';
    };

    for (const auto& [name, recs] : groups) {
        std::vector<double> acc, hs;
        for (const RunRecord& r : recs) {
            if (std::isfinite(r.accuracy)) acc.push_back(r.accuracy);
            hs.push_back(r.H);
        }
        auto ci = [](const std::vector<double>& xs) -> MeanCi {
            if (xs.size() >= 2) return mean_ci95(xs);
            if (xs.size() == 1) return {xs.front(), 0.0};
            return {std::numeric_limits<double>::quiet_NaN(), 0.0};
        };
        const MeanCi acc_ci = ci(acc);
        const MeanCi h_ci = ci(hs);

        std::string p_field, stars_field;
        const std::vector<RunRecord>* base = baseline_for(name);
        if (name.rfind("baseline", 0) != 0 && base && base->size() >= 2 && acc.size() >= 2) {
            std::vector<double> base_acc;
            for (const RunRecord& r : *base)
                if (std::isfinite(r.accuracy)) base_acc.push_back(r.accuracy);
            if (base_acc.size() >= 2) {
                const Comparison cmp = mann_whitney_u(acc, base_acc);
                p_field = fmt(cmp.p_two_sided);
                stars_field = cmp.stars;
            }
        }
        summary << name << ',' << recs.size() << ',' << fmt(acc_ci.mean) << ','
                << fmt(acc_ci.half_width) << ',' << fmt(h_ci.mean) << ',' << fmt(h_ci.half_width)
                << ',' << p_field << ',' << stars_field << '\n';
        if (!acc.empty()) quantile_row(name, "accuracy", acc);
        quantile_row(name, "H", hs);
    }
    std::cout << "wrote " << (fs::path(out_dir) / "summary.csv").string() << " and quantiles.csv ("
              << groups.size() << " conditions)\n";
    return kExitOk;
}

// -------------------------------------------------------- bench-epoch

struct BenchArgs {
    std::string task = "classify";
    std::size_t n = 5000, d = 32, clusters = 5;
    double spread = 0.02;
    std::uint64_t seed = 0;
    std::size_t epochs = 5;
    double w = 0.75;
    double h_target = 0.5;
};

int cmd_bench_epoch(const BenchArgs& a) {
    if (a.epochs == 0) {
        std::cout << "variant,epochs,mean_ms,sd_ms\n";
        return kExitOk;
    }
    SynthSpec spec;
    spec.kind = SynthKind::Clusters;
    spec.n = a.n;
    spec.d = a.d;
    spec.seed = a.seed;
    spec.num_clusters = a.clusters;
    spec.spread = a.spread;
    spec.labelled = true;
    SynthResult data = generate(spec);

    Rng split_rng(a.seed);
    const Splits splits = split_data(data.X, *data.labels, split_rng);

    auto run_once = [&](double w, double ht) -> RunRecord {
        TrainConfig cfg;
        cfg.loss_weight = w;
        cfg.hopkins.target = ht;
        cfg.seed = a.seed;
        cfg.max_epochs = a.epochs;
        cfg.plateau_patience = a.epochs + 1;
        cfg.early_stop_patience = a.epochs + 1;
        if (a.task == "autoencode") {
            cfg.init_lr = 4e-4;
            AutoencoderSpec s;
            s.input_dim = data.X.cols;
            s.bottleneck = 2;
            return fit_autoencoder(s, splits, cfg).record;
        }
        cfg.init_lr = 1e-4;
        MLPClassifierSpec s;
        s.input_dim = data.X.cols;
        s.num_classes = num_classes(*data.labels);
        return fit_classifier(s, splits, cfg).record;
    };

    auto mean_sd = [](const std::vector<double>& xs) {
        double m = 0.0;
        for (double v : xs) m += v;
        m /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double v : xs) ss += (v - m) * (v - m);
        const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
        return std::pair<double, double>{m, sd};
    };

    const RunRecord without = run_once(1.0, 0.5);
    const RunRecord with = run_once(a.w, a.h_target);
    const auto [m0, s0] = mean_sd(without.epoch_ms);
    const auto [m1, s1] = mean_sd(with.epoch_ms);

    std::cout << "variant,epochs,mean_ms,sd_ms\n"
              << "w=1," << without.epochs << ',' << fmt(m0) << ',' << fmt(s0) << "\n"
              << "w=" << fmt(a.w) << ',' << with.epochs << ',' << fmt(m1) << ',' << fmt(s1) << "\n"
              << "overhead=" << fmt((m1 - m0) / m0 * 100.0) << "%\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hopkins-statistic toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* sc_gen = app.add_subcommand("gen", "generate a synthetic dataset CSV");
    sc_gen->add_option("--kind", gen.kind, "grid|uniform|clusters")->required();
    sc_gen->add_option("--n", gen.n)->required();
    sc_gen->add_option("--d", gen.d)->required();
    sc_gen->add_option("--seed", gen.seed);
    sc_gen->add_option("--jitter", gen.jitter);
    sc_gen->add_option("--clusters", gen.clusters);
    sc_gen->add_option("--spread", gen.spread);
    sc_gen->add_flag("--labelled", gen.labelled);
    sc_gen->add_option("--out", gen.out);

    HopkinsArgs hop;
    CLI::App* sc_hop = app.add_subcommand("hopkins", "Hopkins statistic of a feature CSV");
    sc_hop->add_option("--file", hop.file)->required();
    sc_hop->add_option("--metric", hop.metric);
    sc_hop->add_option("--k", hop.k);
    sc_hop->add_option("--seed", hop.seed);
    sc_hop->add_option("--trials", hop.trials);

    TrainArgs tc, ta;
    auto add_train_opts = [](CLI::App* sc, TrainArgs& t) {
        sc->add_option("--data", t.data, "feature CSV (omit to use --synth-*)");
        sc->add_option("--synth-n", t.synth_n);
        sc->add_option("--synth-d", t.synth_d);
        sc->add_option("--synth-clusters", t.synth_clusters);
        sc->add_option("--synth-spread", t.synth_spread);
        sc->add_option("--synth-seed", t.synth_seed);
        sc->add_flag("--zscore", t.zscore);
        sc->add_option("--ht", t.h_targets, "H_T values (baseline w=1 always included)");
        sc->add_option("--w", t.w)->check(CLI::Range(0.0, 1.0));
        sc->add_option("--repeats", t.repeats)->check(CLI::PositiveNumber);
        sc->add_option("--base-seed", t.base_seed);
        sc->add_option("--max-epochs", t.max_epochs);
        sc->add_option("--lr", t.lr);
        sc->add_option("--out", t.out);
    };
    CLI::App* sc_tc = app.add_subcommand("train-classify", "classifier experiment grid");
    add_train_opts(sc_tc, tc);
    CLI::App* sc_ta = app.add_subcommand("train-ae", "autoencoder + probe experiment grid");
    add_train_opts(sc_ta, ta);
    sc_ta->add_option("--b", ta.bottlenecks, "bottleneck widths");

    std::string report_dir, report_out = "report";
    CLI::App* sc_rep = app.add_subcommand("report", "aggregate run records");
    sc_rep->add_option("--dir", report_dir)->required();
    sc_rep->add_option("--out", report_out);

    BenchArgs bench;
    CLI::App* sc_bench = app.add_subcommand("bench-epoch", "epoch-duration overhead of the Hopkins term");
    sc_bench->add_option("--task", bench.task, "classify|autoencode");
    sc_bench->add_option("--n", bench.n);
    sc_bench->add_option("--d", bench.d);
    sc_bench->add_option("--clusters", bench.clusters);
    sc_bench->add_option("--spread", bench.spread);
    sc_bench->add_option("--seed", bench.seed);
    sc_bench->add_option("--epochs", bench.epochs);
    sc_bench->add_option("--w", bench.w)->check(CLI::Range(0.0, 1.0));
    sc_bench->add_option("--ht", bench.h_target)->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
        if (sc_gen->parsed()) return cmd_gen(gen);
        if (sc_hop->parsed()) return cmd_hopkins(hop);
        if (sc_tc->parsed()) return cmd_train_classify(tc);
        if (sc_ta->parsed()) return cmd_train_ae(ta);
        if (sc_rep->parsed()) return cmd_report(report_dir, report_out);
        if (sc_bench->parsed()) return cmd_bench_epoch(bench);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        // File/parse problems surface as runtime_error from the io layer.
        const std::string msg = e.what();
        std::cerr << "error: " << msg << "\n";
        const bool data_like = msg.find("cannot open") != std::string::npos ||
                               msg.find("row ") != std::string::npos ||
                               msg.find("byte offset") != std::string::npos ||
                               msg.find("magic") != std::string::npos;
        return data_like ? kExitData : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
