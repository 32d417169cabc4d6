#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/tensor.hpp"

namespace attnfc {

struct NodeId {
  std::uint32_t index = UINT32_MAX;
  bool valid() const { return index != UINT32_MAX; }
  friend bool operator==(NodeId a, NodeId b) { return a.index == b.index; }
};

enum class OpKind : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kHadamard,
  kSigmoid,
  kTanh,
  kRelu,
  kSoftmax,
  kConcat,
  kStackRows,
  kSumRows,
  kSumAll,
  kTranspose,
  kReshape,
  kLayerNorm,
};

/// Reverse-mode tape. Each operation appends a node holding its value, a
/// gradient slot and the input ids needed to replay the chain rule; node
/// indices grow monotonically, so the graph is acyclic by construction.
/// One tape serves one forward/backward pass and is then discarded.
class Graph {
 public:
  NodeId leaf(Tensor value);

  /// a[r×k] · b[k×c] → [r×c]; a rank-1 right operand is treated as a column.
  NodeId matmul(NodeId a, NodeId b);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);

  NodeId sigmoid(NodeId a);
  NodeId tanh_(NodeId a);
  NodeId relu(NodeId a);

  /// Max-subtracted softmax; each slice along `axis` sums to one.
  NodeId softmax(NodeId a, std::size_t axis);

  NodeId concat(NodeId a, NodeId b, std::size_t axis);

  /// Stacks rank-1 rows of equal length into a [T×n] matrix.
  NodeId stack_rows(std::span<const NodeId> rows);

  /// Column sums: [T×n] → [n].
  NodeId sum_rows(NodeId a);

  NodeId sum_all(NodeId a);
  NodeId transpose(NodeId a);
  NodeId reshape(NodeId a, std::vector<std::size_t> shape);

  /// Normalizes x over its feature dimension, then applies gain/offset.
  NodeId layer_norm(NodeId x, NodeId gain, NodeId offset, double epsilon);

  const Tensor& value(NodeId id) const;

  /// Gradient of the last backward() target w.r.t. this node.
  const Tensor& grad(NodeId id) const;

  /// Populates gradients of every node reachable from `loss` (which must be
  /// scalar-valued). Accumulators are reset first, so repeated calls yield
  /// identical results.
  void backward(NodeId loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind op;
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor grad;
    std::size_t axis = 0;
    double scalar_aux = 0.0;
  };

  NodeId push(OpKind op, std::vector<NodeId> inputs, Tensor value, std::size_t axis = 0,
              double scalar_aux = 0.0);
  const Node& node(NodeId id) const;
  void propagate(const Node& n);

  std::vector<Node> nodes_;
  bool backward_ran_ = false;
};

}  // namespace attnfc
