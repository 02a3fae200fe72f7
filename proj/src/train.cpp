#include "hoptk/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>

namespace hoptk {

void TrainConfig::validate() const {
    if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
    if (plateau_patience == 0 || early_stop_patience == 0)
        throw std::invalid_argument("TrainConfig: patience values must be positive");
    if (loss_weight < 0.0 || loss_weight > 1.0)
        throw std::invalid_argument("TrainConfig: loss weight must be in [0, 1]");
    if (init_lr <= 0.0) throw std::invalid_argument("TrainConfig: learning rate must be positive");
    hopkins.validate();
}

std::uint64_t TrainConfig::hash() const {
    // FNV-1a over the formatted config fields.
    char buf[256];
    const int n = std::snprintf(buf, sizeof buf, "%zu|%.17g|%.17g|%zu|%zu|%zu|%.17g|%.17g|%.17g|%d|%llu|%zu|%d",
                                batch_size, init_lr, plateau_factor, plateau_patience,
                                early_stop_patience, max_epochs, loss_weight,
                                hopkins.sampling_fraction, hopkins.target,
                                static_cast<int>(hopkins.metric.kind()),
                                static_cast<unsigned long long>(seed), min_hopkins_rows,
                                validate_with_hopkins ? 1 : 0);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(buf[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

AdamState AdamState::like(const ParamSet& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Matrix& p : params) {
        s.m.emplace_back(p.rows, p.cols);
        s.v.emplace_back(p.rows, p.cols);
    }
    return s;
}

void adam_step(ParamSet& params, const std::vector<Matrix>& grads, AdamState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.step += 1;
    const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (!params[p].same_shape(grads[p])) throw std::invalid_argument("adam_step: shape mismatch");
        Matrix& th = params[p];
        Matrix& m = state.m[p];
        Matrix& v = state.v[p];
        const Matrix& g = grads[p];
        for (std::size_t i = 0; i < th.size(); ++i) {
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g.data[i];
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
            const double mh = m.data[i] / b1t;
            const double vh = v.data[i] / b2t;
            th.data[i] -= lr * mh / (std::sqrt(vh) + state.eps);
        }
    }
}

NodeId composite_classification_loss(Tape& tape, NodeId logits,
                                     const std::vector<std::size_t>& labels, NodeId tap,
                                     const TrainConfig& cfg, Rng& hopkins_rng,
                                     std::size_t* skipped) {
    const double w = cfg.loss_weight;
    if (w >= 1.0) return tape.cross_entropy(logits, labels);  // Hopkins path untouched
    const NodeId ce = tape.cross_entropy(logits, labels);
    if (tape.value(tap).rows < cfg.min_hopkins_rows) {
        if (skipped) ++*skipped;
        return tape.axpby(w, ce, 0.0, ce);
    }
    const NodeId lh = hopkins_loss(tape, tap, cfg.hopkins, hopkins_rng);
    return tape.axpby(w, ce, 1.0 - w, lh);
}

NodeId composite_ae_loss(Tape& tape, NodeId reconstruction, NodeId input, NodeId bottleneck,
                         const TrainConfig& cfg, Rng& hopkins_rng, std::size_t* skipped) {
    const double w = cfg.loss_weight;
    if (w >= 1.0) return tape.mse(reconstruction, input);
    const NodeId rec = tape.mse(reconstruction, input);
    if (tape.value(bottleneck).rows < cfg.min_hopkins_rows) {
        if (skipped) ++*skipped;
        return tape.axpby(w, rec, 0.0, rec);
    }
    const NodeId lh = hopkins_loss(tape, bottleneck, cfg.hopkins, hopkins_rng);
    return tape.axpby(w, rec, 1.0 - w, lh);
}

Splits split_data(const Matrix& X, const std::vector<std::size_t>& labels, Rng& rng,
                  double train_frac, double val_frac) {
    if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac >= 1.0 + 1e-12)
        throw std::invalid_argument("split_data: bad fractions");
    const std::size_t n = X.rows;
    std::vector<std::size_t> order = sample_without_replacement(n, n, rng);  // permutation
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
    if (n_train == 0 || n_train + n_val > n) throw std::invalid_argument("split_data: empty split");
    auto take = [&](std::size_t begin, std::size_t count) {
        DataSplit s;
        std::vector<std::size_t> idx(order.begin() + begin, order.begin() + begin + count);
        s.X = sample_rows(X, idx);
        if (!labels.empty()) {
            s.labels.reserve(count);
            for (std::size_t i : idx) s.labels.push_back(labels[i]);
        }
        return s;
    };
    Splits out;
    out.train = take(0, n_train);
    out.val = take(n_train, n_val);
    out.test = take(n_train + n_val, n - n_train - n_val);
    return out;
}

FitResult fit_engine(ParamSet params, std::size_t n_train, const TrainConfig& cfg,
                     const BatchLossFn& batch_loss, const ValLossFn& val_loss) {
    cfg.validate();
    if (n_train == 0) throw std::invalid_argument("fit: empty training split");

    Rng base(cfg.seed);
    Rng shuffle_rng = base.fork(1);
    Rng dropout_rng = base.fork(2);
    Rng hopkins_rng = base.fork(3);

    AdamState adam = AdamState::like(params);
    double lr = cfg.init_lr;

    FitResult result;
    result.record.seed = cfg.seed;
    result.record.config_hash = cfg.hash();
    result.record.accuracy = std::numeric_limits<double>::quiet_NaN();
    result.record.H = std::numeric_limits<double>::quiet_NaN();
    result.best_params = params;

    double best_val = std::numeric_limits<double>::infinity();
    std::size_t plateau_count = 0, stop_count = 0;

    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        // Seeded in-place shuffle.
        for (std::size_t i = 0; i + 1 < n_train; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(shuffle_rng.below(n_train - i));
            std::swap(order[i], order[j]);
        }

        double train_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t end = std::min(n_train, start + cfg.batch_size);
            std::vector<std::size_t> rows(order.begin() + start, order.begin() + end);

            Tape tape;
            std::vector<NodeId> param_nodes;
            const NodeId loss = batch_loss(tape, params, rows, dropout_rng, hopkins_rng, param_nodes);
            tape.backward(loss);
            train_loss += tape.value(loss).data[0];
            ++batches;

            std::vector<Matrix> grads;
            grads.reserve(param_nodes.size());
            for (NodeId id : param_nodes) grads.push_back(tape.grad_ref(id));
            adam_step(params, grads, adam, lr);
        }
        train_loss /= static_cast<double>(batches);

        const double vloss = val_loss(params);
        const auto t1 = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        result.record.log.push_back({epoch, train_loss, vloss, lr, ms});
        result.record.epoch_ms.push_back(ms);
        result.record.epochs = epoch;

        // "Improvement" is strictly lower by any amount. Both counters
        // reset on improvement and tick on the same epochs; an lr
        // reduction does not reset the early-stop counter.
        if (vloss < best_val) {
            best_val = vloss;
            result.best_params = params;
            plateau_count = 0;
            stop_count = 0;
        } else {
            ++plateau_count;
            ++stop_count;
            if (plateau_count >= cfg.plateau_patience) {
                lr *= cfg.plateau_factor;
                plateau_count = 0;
            }
            if (stop_count >= cfg.early_stop_patience) break;
        }
    }
    return result;
}

namespace {

Matrix gather_rows(const Matrix& X, const std::vector<std::size_t>& rows) {
    return sample_rows(X, rows);
}

std::vector<std::size_t> gather_labels(const std::vector<std::size_t>& labels,
                                       const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(labels[r]);
    return out;
}

double hopkins_eval_loss(const Matrix& features, const TrainConfig& cfg) {
    Rng rng(cfg.eval_hopkins_seed);
    const HopkinsWitness w = hopkins_statistic(features, cfg.hopkins, rng);
    return std::abs(w.H - cfg.hopkins.target);
}

}  // namespace

double evaluation_H(const Matrix& features, const TrainConfig& cfg) {
    Rng rng(cfg.eval_hopkins_seed);
    return hopkins_statistic(features, cfg.hopkins, rng).H;
}

FitResult fit_classifier(const MLPClassifierSpec& spec, const Splits& data, const TrainConfig& cfg) {
    spec.validate();
    if (data.train.X.rows == 0 || data.val.X.rows == 0)
        throw std::invalid_argument("fit_classifier: empty split");
    if (data.train.labels.empty()) throw std::invalid_argument("fit_classifier: labels required");

    Rng init_rng(cfg.seed);
    ParamSet params = init_params(spec, init_rng);

    auto skips = std::make_shared<std::size_t>(0);

    BatchLossFn batch = [&spec, &data, &cfg, skips](Tape& t, const ParamSet& p,
                                                    const std::vector<std::size_t>& rows,
                                                    Rng& drop_rng, Rng& hop_rng,
                                                    std::vector<NodeId>& param_nodes) {
        const Matrix xb = gather_rows(data.train.X, rows);
        const auto yb = gather_labels(data.train.labels, rows);
        ClassifierForward f = forward_classifier(t, p, xb, Mode::Train, drop_rng, spec.dropout);
        param_nodes = f.params;
        return composite_classification_loss(t, f.logits, yb, f.tap, cfg, hop_rng, skips.get());
    };

    ValLossFn val = [&data, &cfg](const ParamSet& p) {
        const ClassifierEval e = classifier_eval(p, data.val.X);
        double loss = cross_entropy_value(e.logits, data.val.labels);
        if (cfg.loss_weight < 1.0) {
            loss *= cfg.loss_weight;
            if (cfg.validate_with_hopkins)
                loss += (1.0 - cfg.loss_weight) * hopkins_eval_loss(e.tap, cfg);
        }
        return loss;
    };

    FitResult r = fit_engine(std::move(params), data.train.X.rows, cfg, batch, val);
    r.record.hopkins_skipped_batches = *skips;
    if (!data.test.labels.empty() && data.test.X.rows > 0)
        r.record.accuracy = accuracy(classifier_eval(r.best_params, data.test.X).logits,
                                     data.test.labels);
    return r;
}

FitResult fit_autoencoder(const AutoencoderSpec& spec, const Splits& data, const TrainConfig& cfg) {
    spec.validate();
    if (data.train.X.rows == 0 || data.val.X.rows == 0)
        throw std::invalid_argument("fit_autoencoder: empty split");

    Rng init_rng(cfg.seed);
    ParamSet params = init_params(spec, init_rng);
    auto skips = std::make_shared<std::size_t>(0);

    BatchLossFn batch = [&spec, &data, &cfg, skips](Tape& t, const ParamSet& p,
                                                     const std::vector<std::size_t>& rows,
                                                     Rng& drop_rng, Rng& hop_rng,
                                                     std::vector<NodeId>& param_nodes) {
        const Matrix xb = gather_rows(data.train.X, rows);
        AutoencoderForward f = forward_autoencoder(t, p, xb, Mode::Train, drop_rng, spec.dropout);
        param_nodes = f.params;
        return composite_ae_loss(t, f.reconstruction, f.input, f.bottleneck, cfg, hop_rng,
                                 skips.get());
    };

    ValLossFn val = [&data, &cfg](const ParamSet& p) {
        const AutoencoderEval e = autoencoder_eval(p, data.val.X);
        double loss = mse_value(e.reconstruction, data.val.X);
        if (cfg.loss_weight < 1.0) {
            loss *= cfg.loss_weight;
            if (cfg.validate_with_hopkins)
                loss += (1.0 - cfg.loss_weight) * hopkins_eval_loss(e.bottleneck, cfg);
        }
        return loss;
    };

    FitResult r = fit_engine(std::move(params), data.train.X.rows, cfg, batch, val);
    r.record.hopkins_skipped_batches = *skips;
    return r;
}

Matrix extract_features(const ParamSet& encoder_params, const Matrix& dataset) {
    return encode(encoder_params, dataset);
}

FitResult train_probe(const LinearProbeSpec& spec, const Splits& features, const TrainConfig& cfg) {
    if (features.train.labels.empty()) throw std::invalid_argument("train_probe: labels required");
    TrainConfig probe_cfg = cfg;
    probe_cfg.loss_weight = 1.0;  // the probe never sees the Hopkins term

    Rng init_rng(probe_cfg.seed);
    ParamSet params = init_params(spec, init_rng);

    BatchLossFn batch = [&features](Tape& t, const ParamSet& p,
                                    const std::vector<std::size_t>& rows, Rng&, Rng&,
                                    std::vector<NodeId>& param_nodes) {
        const Matrix xb = gather_rows(features.train.X, rows);
        const auto yb = gather_labels(features.train.labels, rows);
        ProbeForward f = forward_probe(t, p, xb);
        param_nodes = f.params;
        return t.cross_entropy(f.logits, yb);
    };

    ValLossFn val = [&features](const ParamSet& p) {
        return cross_entropy_value(probe_eval(p, features.val.X), features.val.labels);
    };

    FitResult r = fit_engine(std::move(params), features.train.X.rows, probe_cfg, batch, val);
    if (!features.test.labels.empty() && features.test.X.rows > 0)
        r.record.accuracy = accuracy(probe_eval(r.best_params, features.test.X),
                                     features.test.labels);
    return r;
}

double accuracy(const Matrix& logits, const std::vector<std::size_t>& labels) {
    if (logits.rows != labels.size()) throw std::invalid_argument("accuracy: size mismatch");
    if (logits.rows == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* row = logits.row(i);
        std::size_t arg = 0;
        for (std::size_t j = 1; j < logits.cols; ++j)
            if (row[j] > row[arg]) arg = j;
        if (arg == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows);
}

}  // namespace hoptk
