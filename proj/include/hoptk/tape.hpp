#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hoptk/matrix.hpp"
#include "hoptk/rng.hpp"

namespace hoptk {

using NodeId = std::size_t;

enum class Mode { Train, Eval };

// Reverse-mode autodiff over Matrix values. Nodes are appended in
// topological order; backward() visits them exactly once in reverse
// insertion order and accumulates additively across fan-out.
// A Tape is single-threaded.
class Tape {
public:
    struct Node {
        Matrix value;
        Matrix grad;                           // allocated lazily at backward time
        std::function<void(Tape&)> backprop;   // empty for leaves
    };

    NodeId input(Matrix v);

    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);            // same shape
    NodeId add_rowvec(NodeId x, NodeId bias);  // bias broadcast over rows
    NodeId gelu(NodeId x);
    NodeId dropout(NodeId x, double rate, Mode mode, Rng& rng);
    NodeId sum(NodeId x);                                      // 1x1
    NodeId axpby(double alpha, NodeId a, double beta, NodeId b);  // scalar combine
    NodeId cross_entropy(NodeId logits, const std::vector<std::size_t>& labels);  // 1x1
    NodeId mse(NodeId a, NodeId b);                            // 1x1

    // Custom operation escape hatch: push a value and attach a backward
    // closure that reads grad(self) and accumulates into parents.
    NodeId custom(Matrix value, std::function<void(Tape&, NodeId self)> back);

    void backward(NodeId root);

    const Matrix& value(NodeId id) const { return nodes_[id].value; }
    const Matrix& grad(NodeId id) const { return nodes_[id].grad; }
    Matrix& grad_ref(NodeId id);
    std::size_t size() const { return nodes_.size(); }

private:
    NodeId push(Matrix v);
    std::vector<Node> nodes_;
};

// Plain (tape-free) forward versions used in eval paths and tests.
Matrix gelu_value(const Matrix& x);
Matrix softmax_rows(const Matrix& x);
double cross_entropy_value(const Matrix& logits, const std::vector<std::size_t>& labels);
double mse_value(const Matrix& a, const Matrix& b);

}  // namespace hoptk
