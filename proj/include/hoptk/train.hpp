#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hoptk/hopkins.hpp"
#include "hoptk/matrix.hpp"
#include "hoptk/models.hpp"
#include "hoptk/rng.hpp"
#include "hoptk/tape.hpp"

namespace hoptk {

struct TrainConfig {
    std::size_t batch_size = 1024;
    double init_lr = 1e-4;          // 4e-4 for AE and probe runs
    double plateau_factor = 0.5;
    std::size_t plateau_patience = 30;
    std::size_t early_stop_patience = 100;
    std::size_t max_epochs = 1000;
    double loss_weight = 1.0;       // w_C (classifier) or w_R (autoencoder)
    HopkinsConfig hopkins;          // carries H_T, metric, sampling fraction
    std::uint64_t seed = 0;
    std::uint64_t eval_hopkins_seed = 0x48504b53;  // fixed, distinct from training streams
    std::size_t min_hopkins_rows = 20;             // short batches skip the Hopkins term
    // Whether the validation loss used for model selection includes the
    // Hopkins term (the full training objective) or the primary loss only.
    bool validate_with_hopkins = true;

    void validate() const;
    std::uint64_t hash() const;
};

struct AdamState {
    std::vector<Matrix> m;  // first moments, shaped like the parameters
    std::vector<Matrix> v;  // second moments
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState like(const ParamSet& params);
};

// Standard bias-corrected Adam update.
void adam_step(ParamSet& params, const std::vector<Matrix>& grads, AdamState& state, double lr);

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
    double duration_ms = 0.0;
};

struct RunRecord {
    std::uint64_t seed = 0;
    double accuracy = 0.0;        // final test accuracy (NaN for AE stage alone)
    double H = 0.0;               // H of the evaluation features, dedicated seed
    std::size_t epochs = 0;
    std::vector<double> epoch_ms;
    std::uint64_t config_hash = 0;
    std::size_t hopkins_skipped_batches = 0;
    std::vector<EpochLog> log;
};

// L = w_C * L_CE + (1 - w_C) * L_H on the tap. With w_C = 1 the Hopkins
// path is neither computed nor recorded. Short batches drop the Hopkins
// term (counter incremented when provided).
NodeId composite_classification_loss(Tape& tape, NodeId logits,
                                     const std::vector<std::size_t>& labels, NodeId tap,
                                     const TrainConfig& cfg, Rng& hopkins_rng,
                                     std::size_t* skipped = nullptr);

// L = w_R * L_MSE + (1 - w_R) * L_H on the bottleneck.
NodeId composite_ae_loss(Tape& tape, NodeId reconstruction, NodeId input, NodeId bottleneck,
                         const TrainConfig& cfg, Rng& hopkins_rng, std::size_t* skipped = nullptr);

struct DataSplit {
    Matrix X;
    std::vector<std::size_t> labels;  // empty for unlabelled data
};

struct Splits {
    DataSplit train, val, test;
};

// Shuffle rows and cut 60:20:20 (or custom ratios) deterministically.
Splits split_data(const Matrix& X, const std::vector<std::size_t>& labels, Rng& rng,
                  double train_frac = 0.6, double val_frac = 0.2);

struct FitResult {
    ParamSet best_params;
    RunRecord record;
};

// Generic epoch loop: seeded shuffle, minibatches, Adam, reduce-on-plateau,
// early stopping, best-validation snapshot. The model specifics come in
// through the two closures.
using BatchLossFn = std::function<NodeId(Tape&, const ParamSet& params,
                                         const std::vector<std::size_t>& batch_rows,
                                         Rng& dropout_rng, Rng& hopkins_rng,
                                         std::vector<NodeId>& param_nodes)>;
using ValLossFn = std::function<double(const ParamSet& params)>;

FitResult fit_engine(ParamSet params, std::size_t n_train, const TrainConfig& cfg,
                     const BatchLossFn& batch_loss, const ValLossFn& val_loss);

// The paper's two pipelines plus the linear probe.
FitResult fit_classifier(const MLPClassifierSpec& spec, const Splits& data, const TrainConfig& cfg);
FitResult fit_autoencoder(const AutoencoderSpec& spec, const Splits& data, const TrainConfig& cfg);

// Eval-mode bottleneck activations for a whole dataset, row-aligned.
Matrix extract_features(const ParamSet& encoder_params, const Matrix& dataset);

// Single linear layer + softmax on frozen features; w forced to 1.
FitResult train_probe(const LinearProbeSpec& spec, const Splits& features, const TrainConfig& cfg);

double accuracy(const Matrix& logits, const std::vector<std::size_t>& labels);

// H of a feature matrix under the run's Hopkins settings with the fixed
// evaluation seed (distinct from all training streams). Callers fill
// RunRecord::H with this after fitting; keeping it out of fit_* leaves
// the w = 1 training path free of any Hopkins work.
double evaluation_H(const Matrix& features, const TrainConfig& cfg);

}  // namespace hoptk
