#include "nn/attention.hpp"

#include <vector>

#include "core/errors.hpp"

namespace attnfc {

namespace {

NodeId score_step(Graph& g, const AttentionScorerNodes& scorer, NodeId h, NodeId d) {
  NodeId joined = g.concat(h, d, 0);
  return dense_forward(g, scorer.output, g.tanh_(dense_forward(g, scorer.hidden, joined)));
}

void require_steps(std::span<const NodeId> hs) {
  if (hs.empty()) throw ContractError("attention: no encoder steps to attend over");
}

}  // namespace

AttentionScorerParams AttentionScorerParams::init(std::size_t state_dim, std::size_t hidden_dim,
                                                 std::size_t out_dim, Rng& rng) {
  AttentionScorerParams p;
  p.hidden = DenseParams::init(hidden_dim, 2 * state_dim, rng);
  p.output = DenseParams::init(out_dim, hidden_dim, rng);
  return p;
}

AttentionScorerNodes bind(Graph& g, const AttentionScorerParams& p) {
  return {bind(g, p.hidden), bind(g, p.output)};
}

NodeId score_basic(Graph& g, const AttentionScorerNodes& scorer, std::span<const NodeId> hs,
                   NodeId d) {
  require_steps(hs);
  if (g.value(scorer.output.weight).rows() != 1) {
    throw ContractError("score_basic: scorer read-out must have arity 1");
  }
  NodeId scores = score_step(g, scorer, hs[0], d);
  for (std::size_t t = 1; t < hs.size(); ++t) {
    scores = g.concat(scores, score_step(g, scorer, hs[t], d), 0);
  }
  return scores;  // [T]
}

AttentionResult attend_basic(Graph& g, const AttentionScorerNodes& scorer,
                             std::span<const NodeId> hs, NodeId d) {
  NodeId alpha = g.softmax(score_basic(g, scorer, hs, d), 0);  // [T]
  NodeId hm = g.stack_rows(hs);                                // [T x n]
  NodeId context = g.matmul(g.transpose(hm), alpha);           // [n]
  return {alpha, context};
}

AttentionResult attend_fine(Graph& g, const AttentionScorerNodes& scorer,
                            std::span<const NodeId> hs, NodeId d) {
  require_steps(hs);
  const std::size_t n = g.value(hs[0]).size();
  if (g.value(scorer.output.weight).rows() != n) {
    throw ContractError("attend_fine: scorer read-out arity must match the hidden size");
  }
  std::vector<NodeId> rows;
  rows.reserve(hs.size());
  for (NodeId h : hs) rows.push_back(score_step(g, scorer, h, d));
  NodeId scores = g.stack_rows(rows);         // [T x n]
  NodeId alpha = g.softmax(scores, 0);        // columns (one per dimension) sum to one
  NodeId hm = g.stack_rows(hs);               // [T x n]
  NodeId context = g.sum_rows(g.hadamard(alpha, hm));  // [n]
  return {alpha, context};
}

}  // namespace attnfc
