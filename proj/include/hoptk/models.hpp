#pragma once

#include <string>
#include <vector>

#include "hoptk/matrix.hpp"
#include "hoptk/rng.hpp"
#include "hoptk/tape.hpp"

namespace hoptk {

// Parameters are a flat list of matrices: weight/bias pairs in layer
// order. Immutable between optimizer steps.
using ParamSet = std::vector<Matrix>;

// MLP classifier: linear->GELU->dropout, linear->GELU->dropout,
// linear (+ softmax fused into the loss). The Hopkins tap is the second
// GELU output, taken before dropout.
struct MLPClassifierSpec {
    std::size_t input_dim = 0;
    std::size_t hidden = 128;
    std::size_t num_classes = 2;
    double dropout = 0.2;

    void validate() const;
    std::size_t param_count() const;
};

// Bottleneck autoencoder: encoder 128, 128, B (bottleneck linear, no
// activation), decoder mirrors the encoder widths; hidden layers carry
// GELU + dropout, the final output layer is linear.
struct AutoencoderSpec {
    std::size_t input_dim = 0;
    std::size_t hidden = 128;
    std::size_t bottleneck = 2;
    double dropout = 0.2;

    void validate() const;
};

// Single linear layer + softmax.
struct LinearProbeSpec {
    std::size_t input_dim = 0;
    std::size_t num_classes = 2;
};

ParamSet init_params(const MLPClassifierSpec& spec, Rng& rng);
ParamSet init_params(const AutoencoderSpec& spec, Rng& rng);
ParamSet init_params(const LinearProbeSpec& spec, Rng& rng);

struct ClassifierForward {
    NodeId logits;
    NodeId tap;                    // second GELU output, pre-dropout
    std::vector<NodeId> params;    // tape ids aligned with the ParamSet
};
ClassifierForward forward_classifier(Tape& tape, const ParamSet& params, const Matrix& x,
                                     Mode mode, Rng& rng, double dropout = 0.2);

struct AutoencoderForward {
    NodeId reconstruction;
    NodeId bottleneck;             // linear encoder output
    NodeId input;                  // the x constant node (reconstruction target)
    std::vector<NodeId> params;
};
AutoencoderForward forward_autoencoder(Tape& tape, const ParamSet& params, const Matrix& x,
                                       Mode mode, Rng& rng, double dropout = 0.2);

struct ProbeForward {
    NodeId logits;
    std::vector<NodeId> params;
};
ProbeForward forward_probe(Tape& tape, const ParamSet& params, const Matrix& x);

// Tape-free eval-mode forwards (deterministic pure functions of
// params and input).
struct ClassifierEval {
    Matrix logits;
    Matrix tap;
};
ClassifierEval classifier_eval(const ParamSet& params, const Matrix& x);

struct AutoencoderEval {
    Matrix reconstruction;
    Matrix bottleneck;
};
AutoencoderEval autoencoder_eval(const ParamSet& params, const Matrix& x);

Matrix probe_eval(const ParamSet& params, const Matrix& x);

// Encoder half of an AE ParamSet applied in eval mode; rows stay aligned
// with the input.
Matrix encode(const ParamSet& ae_params, const Matrix& x);

// Flat binary snapshot format: magic, version, matrix count, then per
// matrix a dimension header (rows, cols as u64 little-endian) and the
// row-major float64 payload.
void save_params(const ParamSet& params, const std::string& path);
ParamSet load_params(const std::string& path);

}  // namespace hoptk
