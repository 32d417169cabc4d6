#pragma once

#include <cstddef>
#include <span>

#include "core/graph.hpp"
#include "core/rng.hpp"
#include "nn/layers.hpp"

namespace attnfc {

// Two-layer scorer shared by every (encoder step, decoder state) pair: a tanh
// hidden layer over concat(h_t, d) followed by a linear read-out. The read-out
// arity decides the flavour: 1 scores a whole step, n scores each hidden
// dimension of the step separately.
struct AttentionScorerParams {
  DenseParams hidden;
  DenseParams output;

  static AttentionScorerParams init(std::size_t state_dim, std::size_t hidden_dim,
                                    std::size_t out_dim, Rng& rng);

  std::size_t out_dim() const { return output.weight.rows(); }
};

struct AttentionScorerNodes {
  DenseNodes hidden;
  DenseNodes output;
};

AttentionScorerNodes bind(Graph& g, const AttentionScorerParams& p);

struct AttentionResult {
  NodeId weights;  // [T] for basic, [T x n] for fine; slices over time sum to one
  NodeId context;  // [n]
};

// Raw scores per encoder step against decoder state d: [T].
NodeId score_basic(Graph& g, const AttentionScorerNodes& scorer, std::span<const NodeId> hs,
                   NodeId d);

// One weight per encoder step; context is the weighted sum of the h_t.
AttentionResult attend_basic(Graph& g, const AttentionScorerNodes& scorer,
                             std::span<const NodeId> hs, NodeId d);

// One weight per (step, hidden dimension); each dimension mixes its own
// trajectory through time.
AttentionResult attend_fine(Graph& g, const AttentionScorerNodes& scorer,
                            std::span<const NodeId> hs, NodeId d);

}  // namespace attnfc
