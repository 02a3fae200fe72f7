#include "hoptk/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace hoptk {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

NodeId Tape::push(Matrix v) {
    nodes_.push_back(Node{std::move(v), Matrix{}, nullptr});
    return nodes_.size() - 1;
}

Matrix& Tape::grad_ref(NodeId id) {
    Matrix& g = nodes_[id].grad;
    if (g.size() == 0) g = Matrix(nodes_[id].value.rows, nodes_[id].value.cols);
    return g;
}

NodeId Tape::input(Matrix v) { return push(std::move(v)); }

NodeId Tape::matmul(NodeId a, NodeId b) {
    const NodeId id = push(kernels::matmul(value(a), value(b)));
    nodes_[id].backprop = [a, b, id](Tape& t) {
        const Matrix& g = t.grad(id);
        // a-grad += g * b^T, b-grad += a^T * g
        Matrix ga = kernels::matmul_a_bt(g, t.value(b));
        Matrix gb = kernels::matmul_at_b(t.value(a), g);
        Matrix& ra = t.grad_ref(a);
        for (std::size_t i = 0; i < ra.size(); ++i) ra.data[i] += ga.data[i];
        Matrix& rb = t.grad_ref(b);
        for (std::size_t i = 0; i < rb.size(); ++i) rb.data[i] += gb.data[i];
    };
    return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
    const NodeId id = push(hoptk::add(value(a), value(b)));
    nodes_[id].backprop = [a, b, id](Tape& t) {
        const Matrix& g = t.grad(id);
        Matrix& ra = t.grad_ref(a);
        Matrix& rb = t.grad_ref(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ra.data[i] += g.data[i];
            rb.data[i] += g.data[i];
        }
    };
    return id;
}

NodeId Tape::add_rowvec(NodeId x, NodeId bias) {
    const Matrix& v = value(x);
    const Matrix& b = value(bias);
    if (b.rows != 1 || b.cols != v.cols)
        throw std::invalid_argument("add_rowvec: bias must be 1 x cols");
    Matrix out = v;
    for (std::size_t i = 0; i < v.rows; ++i)
        for (std::size_t j = 0; j < v.cols; ++j) out(i, j) += b(0, j);
    const NodeId id = push(std::move(out));
    nodes_[id].backprop = [x, bias, id](Tape& t) {
        const Matrix& g = t.grad(id);
        Matrix& rx = t.grad_ref(x);
        Matrix& rb = t.grad_ref(bias);
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j) {
                rx(i, j) += g(i, j);
                rb(0, j) += g(i, j);
            }
    };
    return id;
}

NodeId Tape::gelu(NodeId x) {
    const Matrix& v = value(x);
    Matrix out(v.rows, v.cols);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double xi = v.data[i];
        out.data[i] = 0.5 * xi * (1.0 + std::erf(xi * kInvSqrt2));
    }
    const NodeId id = push(std::move(out));
    nodes_[id].backprop = [x, id](Tape& t) {
        const Matrix& g = t.grad(id);
        const Matrix& v = t.value(x);
        Matrix& rx = t.grad_ref(x);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double xi = v.data[i];
            const double cdf = 0.5 * (1.0 + std::erf(xi * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * xi * xi);
            rx.data[i] += g.data[i] * (cdf + xi * pdf);
        }
    };
    return id;
}

NodeId Tape::dropout(NodeId x, double rate, Mode mode, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
    const Matrix& v = value(x);
    if (mode == Mode::Eval || rate == 0.0) {
        Matrix out = v;
        const NodeId id = push(std::move(out));
        nodes_[id].backprop = [x, id](Tape& t) {
            const Matrix& g = t.grad(id);
            Matrix& rx = t.grad_ref(x);
            for (std::size_t i = 0; i < g.size(); ++i) rx.data[i] += g.data[i];
        };
        return id;
    }
    // Inverted dropout: survivors scaled by 1/(1-rate); mask reused in backward.
    const double keep = 1.0 - rate;
    auto mask = std::make_shared<std::vector<double>>(v.size());
    Matrix out(v.rows, v.cols);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
        (*mask)[i] = m;
        out.data[i] = v.data[i] * m;
    }
    const NodeId id = push(std::move(out));
    nodes_[id].backprop = [x, id, mask](Tape& t) {
        const Matrix& g = t.grad(id);
        Matrix& rx = t.grad_ref(x);
        for (std::size_t i = 0; i < g.size(); ++i) rx.data[i] += g.data[i] * (*mask)[i];
    };
    return id;
}

NodeId Tape::sum(NodeId x) {
    const Matrix& v = value(x);
    double s = 0.0;
    for (double e : v.data) s += e;
    Matrix out(1, 1);
    out.data[0] = s;
    const NodeId id = push(std::move(out));
    nodes_[id].backprop = [x, id](Tape& t) {
        const double g = t.grad(id).data[0];
        Matrix& rx = t.grad_ref(x);
        for (double& e : rx.data) e += g;
    };
    return id;
}

NodeId Tape::axpby(double alpha, NodeId a, double beta, NodeId b) {
    if (value(a).size() != 1 || value(b).size() != 1)
        throw std::invalid_argument("axpby: expects scalar nodes");
    Matrix out(1, 1);
    out.data[0] = alpha * value(a).data[0] + beta * value(b).data[0];
    const NodeId id = push(std::move(out));
    nodes_[id].backprop = [a, b, id, alpha, beta](Tape& t) {
        const double g = t.grad(id).data[0];
        t.grad_ref(a).data[0] += alpha * g;
        t.grad_ref(b).data[0] += beta * g;
    };
    return id;
}

NodeId Tape::cross_entropy(NodeId logits, const std::vector<std::size_t>& labels) {
    const Matrix& z = value(logits);
    if (labels.size() != z.rows)
        throw std::invalid_argument("cross_entropy: logits rows must equal label count");
    for (std::size_t l : labels)
        if (l >= z.cols) throw std::out_of_range("cross_entropy: label out of range");
    // Fused log-sum-exp for stability.
    double loss = 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double* zi = z.row(i);
        double m = zi[0];
        for (std::size_t j = 1; j < z.cols; ++j) m = std::max(m, zi[j]);
        double se = 0.0;
        for (std::size_t j = 0; j < z.cols; ++j) se += std::exp(zi[j] - m);
        loss += m + std::log(se) - zi[labels[i]];
    }
    Matrix out(1, 1);
    out.data[0] = loss / static_cast<double>(z.rows);
    const NodeId id = push(std::move(out));
    auto labs = labels;
    nodes_[id].backprop = [logits, id, labs = std::move(labs)](Tape& t) {
        const double g = t.grad(id).data[0];
        const Matrix& z = t.value(logits);
        Matrix& rz = t.grad_ref(logits);
        const double invn = 1.0 / static_cast<double>(z.rows);
        for (std::size_t i = 0; i < z.rows; ++i) {
            const double* zi = z.row(i);
            double m = zi[0];
            for (std::size_t j = 1; j < z.cols; ++j) m = std::max(m, zi[j]);
            double se = 0.0;
            for (std::size_t j = 0; j < z.cols; ++j) se += std::exp(zi[j] - m);
            for (std::size_t j = 0; j < z.cols; ++j) {
                const double p = std::exp(zi[j] - m) / se;
                rz(i, j) += g * invn * (p - (j == labs[i] ? 1.0 : 0.0));
            }
        }
    };
    return id;
}

NodeId Tape::mse(NodeId a, NodeId b) {
    const Matrix& va = value(a);
    const Matrix& vb = value(b);
    if (!va.same_shape(vb)) throw std::invalid_argument("mse: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double d = va.data[i] - vb.data[i];
        s += d * d;
    }
    Matrix out(1, 1);
    out.data[0] = s / static_cast<double>(va.size());
    const NodeId id = push(std::move(out));
    nodes_[id].backprop = [a, b, id](Tape& t) {
        const double g = t.grad(id).data[0];
        const Matrix& va = t.value(a);
        const Matrix& vb = t.value(b);
        Matrix& ra = t.grad_ref(a);
        Matrix& rb = t.grad_ref(b);
        const double c = 2.0 * g / static_cast<double>(va.size());
        for (std::size_t i = 0; i < va.size(); ++i) {
            const double d = c * (va.data[i] - vb.data[i]);
            ra.data[i] += d;
            rb.data[i] -= d;
        }
    };
    return id;
}

NodeId Tape::custom(Matrix value, std::function<void(Tape&, NodeId self)> back) {
    const NodeId id = push(std::move(value));
    nodes_[id].backprop = [id, back = std::move(back)](Tape& t) { back(t, id); };
    return id;
}

void Tape::backward(NodeId root) {
    if (value(root).size() != 1)
        throw std::invalid_argument("backward: root must hold a scalar value");
    for (auto& n : nodes_) n.grad = Matrix{};
    grad_ref(root).data[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.backprop && n.grad.size() != 0) n.backprop(*this);
    }
    // Leaves touched by no path keep empty grads; materialize zeros on demand
    // through grad_ref.
}

Matrix gelu_value(const Matrix& x) {
    Matrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x.data[i];
        out.data[i] = 0.5 * xi * (1.0 + std::erf(xi * kInvSqrt2));
    }
    return out;
}

Matrix softmax_rows(const Matrix& x) {
    Matrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double* oi = out.row(i);
        double m = xi[0];
        for (std::size_t j = 1; j < x.cols; ++j) m = std::max(m, xi[j]);
        double se = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            oi[j] = std::exp(xi[j] - m);
            se += oi[j];
        }
        for (std::size_t j = 0; j < x.cols; ++j) oi[j] /= se;
    }
    return out;
}

double cross_entropy_value(const Matrix& logits, const std::vector<std::size_t>& labels) {
    if (labels.size() != logits.rows)
        throw std::invalid_argument("cross_entropy: logits rows must equal label count");
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        if (labels[i] >= logits.cols) throw std::out_of_range("cross_entropy: label out of range");
        const double* zi = logits.row(i);
        double m = zi[0];
        for (std::size_t j = 1; j < logits.cols; ++j) m = std::max(m, zi[j]);
        double se = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) se += std::exp(zi[j] - m);
        loss += m + std::log(se) - zi[labels[i]];
    }
    return loss / static_cast<double>(logits.rows);
}

double mse_value(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("mse: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

}  // namespace hoptk
