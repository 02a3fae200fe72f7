#include "hoptk/models.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hoptk {

namespace {

Matrix init_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    Matrix w(fan_in, fan_out);
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    return w;
}

void push_layer(ParamSet& p, std::size_t in, std::size_t out, Rng& rng) {
    p.push_back(init_weight(in, out, rng));
    p.push_back(Matrix(1, out));  // biases start at zero
}

// linear layer on tape: x * W + b
NodeId linear(Tape& t, NodeId x, NodeId w, NodeId b) {
    return t.add_rowvec(t.matmul(x, w), b);
}

Matrix linear_eval(const Matrix& x, const Matrix& w, const Matrix& b) {
    Matrix y = kernels::matmul(x, w);
    for (std::size_t i = 0; i < y.rows; ++i)
        for (std::size_t j = 0; j < y.cols; ++j) y(i, j) += b(0, j);
    return y;
}

}  // namespace

void MLPClassifierSpec::validate() const {
    if (input_dim == 0 || hidden == 0) throw std::invalid_argument("MLPClassifierSpec: zero dims");
    if (num_classes < 2) throw std::invalid_argument("MLPClassifierSpec: need at least 2 classes");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("MLPClassifierSpec: bad dropout");
}

std::size_t MLPClassifierSpec::param_count() const {
    return input_dim * hidden + hidden + hidden * hidden + hidden + hidden * num_classes +
           num_classes;
}

void AutoencoderSpec::validate() const {
    if (input_dim == 0 || hidden == 0 || bottleneck == 0)
        throw std::invalid_argument("AutoencoderSpec: zero dims");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("AutoencoderSpec: bad dropout");
}

ParamSet init_params(const MLPClassifierSpec& spec, Rng& rng) {
    spec.validate();
    ParamSet p;
    push_layer(p, spec.input_dim, spec.hidden, rng);
    push_layer(p, spec.hidden, spec.hidden, rng);
    push_layer(p, spec.hidden, spec.num_classes, rng);
    return p;
}

ParamSet init_params(const AutoencoderSpec& spec, Rng& rng) {
    spec.validate();
    ParamSet p;
    // encoder: d -> 128 -> 128 -> B
    push_layer(p, spec.input_dim, spec.hidden, rng);
    push_layer(p, spec.hidden, spec.hidden, rng);
    push_layer(p, spec.hidden, spec.bottleneck, rng);
    // decoder mirrors the encoder widths: B -> 128 -> 128 -> d
    push_layer(p, spec.bottleneck, spec.hidden, rng);
    push_layer(p, spec.hidden, spec.hidden, rng);
    push_layer(p, spec.hidden, spec.input_dim, rng);
    return p;
}

ParamSet init_params(const LinearProbeSpec& spec, Rng& rng) {
    if (spec.input_dim == 0 || spec.num_classes < 2)
        throw std::invalid_argument("LinearProbeSpec: bad dims");
    ParamSet p;
    push_layer(p, spec.input_dim, spec.num_classes, rng);
    return p;
}

ClassifierForward forward_classifier(Tape& tape, const ParamSet& params, const Matrix& x,
                                     Mode mode, Rng& rng, double dropout) {
    if (params.size() != 6) throw std::invalid_argument("forward_classifier: expected 6 parameter matrices");
    if (x.cols != params[0].rows) throw std::invalid_argument("forward_classifier: input dim mismatch");
    ClassifierForward out;
    out.params.reserve(6);
    for (const Matrix& p : params) out.params.push_back(tape.input(p));
    NodeId h = tape.input(x);
    h = tape.gelu(linear(tape, h, out.params[0], out.params[1]));
    h = tape.dropout(h, dropout, mode, rng);
    NodeId tap = tape.gelu(linear(tape, h, out.params[2], out.params[3]));
    h = tape.dropout(tap, dropout, mode, rng);
    out.logits = linear(tape, h, out.params[4], out.params[5]);
    out.tap = tap;
    return out;
}

AutoencoderForward forward_autoencoder(Tape& tape, const ParamSet& params, const Matrix& x,
                                       Mode mode, Rng& rng, double dropout) {
    if (params.size() != 12) throw std::invalid_argument("forward_autoencoder: expected 12 parameter matrices");
    if (x.cols != params[0].rows) throw std::invalid_argument("forward_autoencoder: input dim mismatch");
    AutoencoderForward out;
    out.params.reserve(12);
    for (const Matrix& p : params) out.params.push_back(tape.input(p));
    out.input = tape.input(x);
    NodeId h = out.input;
    h = tape.dropout(tape.gelu(linear(tape, h, out.params[0], out.params[1])), dropout, mode, rng);
    h = tape.dropout(tape.gelu(linear(tape, h, out.params[2], out.params[3])), dropout, mode, rng);
    NodeId bottleneck = linear(tape, h, out.params[4], out.params[5]);  // linear, no activation
    h = tape.dropout(tape.gelu(linear(tape, bottleneck, out.params[6], out.params[7])), dropout, mode, rng);
    h = tape.dropout(tape.gelu(linear(tape, h, out.params[8], out.params[9])), dropout, mode, rng);
    out.reconstruction = linear(tape, h, out.params[10], out.params[11]);
    out.bottleneck = bottleneck;
    return out;
}

ProbeForward forward_probe(Tape& tape, const ParamSet& params, const Matrix& x) {
    if (params.size() != 2) throw std::invalid_argument("forward_probe: expected 2 parameter matrices");
    ProbeForward out;
    for (const Matrix& p : params) out.params.push_back(tape.input(p));
    out.logits = linear(tape, tape.input(x), out.params[0], out.params[1]);
    return out;
}

ClassifierEval classifier_eval(const ParamSet& params, const Matrix& x) {
    if (params.size() != 6) throw std::invalid_argument("classifier_eval: expected 6 parameter matrices");
    Matrix h = gelu_value(linear_eval(x, params[0], params[1]));
    Matrix tap = gelu_value(linear_eval(h, params[2], params[3]));
    Matrix logits = linear_eval(tap, params[4], params[5]);
    return {std::move(logits), std::move(tap)};
}

AutoencoderEval autoencoder_eval(const ParamSet& params, const Matrix& x) {
    if (params.size() != 12) throw std::invalid_argument("autoencoder_eval: expected 12 parameter matrices");
    Matrix h = gelu_value(linear_eval(x, params[0], params[1]));
    h = gelu_value(linear_eval(h, params[2], params[3]));
    Matrix bottleneck = linear_eval(h, params[4], params[5]);
    h = gelu_value(linear_eval(bottleneck, params[6], params[7]));
    h = gelu_value(linear_eval(h, params[8], params[9]));
    Matrix rec = linear_eval(h, params[10], params[11]);
    return {std::move(rec), std::move(bottleneck)};
}

Matrix probe_eval(const ParamSet& params, const Matrix& x) {
    if (params.size() != 2) throw std::invalid_argument("probe_eval: expected 2 parameter matrices");
    return linear_eval(x, params[0], params[1]);
}

Matrix encode(const ParamSet& ae_params, const Matrix& x) {
    if (ae_params.size() != 12) throw std::invalid_argument("encode: expected 12 parameter matrices");
    Matrix h = gelu_value(linear_eval(x, ae_params[0], ae_params[1]));
    h = gelu_value(linear_eval(h, ae_params[2], ae_params[3]));
    return linear_eval(h, ae_params[4], ae_params[5]);
}

namespace {
constexpr std::uint32_t kMagic = 0x4b54'5048;  // "HPTK"
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_params(const ParamSet& params, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_params: cannot open " + path);
    auto put_u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_u64 = [&](std::uint64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(kMagic);
    put_u32(kVersion);
    put_u32(static_cast<std::uint32_t>(params.size()));
    for (const Matrix& m : params) {
        put_u64(m.rows);
        put_u64(m.cols);
        f.write(reinterpret_cast<const char*>(m.data.data()),
                static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
    if (!f) throw std::runtime_error("save_params: write failed for " + path);
}

ParamSet load_params(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_params: cannot open " + path);
    auto get_u32 = [&] {
        std::uint32_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_u64 = [&] {
        std::uint64_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    if (get_u32() != kMagic) throw std::runtime_error("load_params: bad magic in " + path);
    if (get_u32() != kVersion) throw std::runtime_error("load_params: unsupported version in " + path);
    const std::uint32_t count = get_u32();
    ParamSet params;
    params.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint64_t rows = get_u64();
        const std::uint64_t cols = get_u64();
        Matrix m(rows, cols);
        f.read(reinterpret_cast<char*>(m.data.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)));
        if (!f) throw std::runtime_error("load_params: truncated file " + path);
        params.push_back(std::move(m));
    }
    return params;
}

}  // namespace hoptk
