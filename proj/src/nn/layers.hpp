#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "core/graph.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace attnfc {

enum class Mode { kTrain, kEval };

// One LSTM cell. Each gate weight acts on concat(h_prev, x), so its shape is
// [hidden x (hidden + input)].
struct LstmCellParams {
  Tensor w_forget, w_input, w_cell, w_output;
  Tensor b_forget, b_input, b_cell, b_output;

  static LstmCellParams init(std::size_t hidden, std::size_t input, Rng& rng);

  std::size_t hidden_size() const { return w_forget.rows(); }
  std::size_t input_size() const { return w_forget.cols() - w_forget.rows(); }
};

struct LstmCellNodes {
  NodeId w_forget, w_input, w_cell, w_output;
  NodeId b_forget, b_input, b_cell, b_output;
};

struct LstmState {
  NodeId h, c;
};

LstmCellNodes bind(Graph& g, const LstmCellParams& p);
LstmState lstm_initial_state(Graph& g, std::size_t hidden);
LstmState lstm_cell_step(Graph& g, const LstmCellNodes& cell, const LstmState& prev, NodeId x);
std::vector<LstmState> lstm_sequence(Graph& g, const LstmCellNodes& cell, LstmState state,
                                     std::span<const NodeId> xs);

// Temporal embedding of a scalar time index: element 0 is affine in t, the
// remaining l elements pass the affine map through a relu.
struct Time2VecParams {
  Tensor alpha, beta;  // each [l + 1]

  static Time2VecParams init(std::size_t l, Rng& rng);

  std::size_t dim() const { return alpha.size(); }
};

struct Time2VecNodes {
  NodeId alpha, beta;
  NodeId linear_mask, relu_mask;  // constant selectors for element 0 vs. the rest
};

Time2VecNodes bind(Graph& g, const Time2VecParams& p);
NodeId time2vec(Graph& g, const Time2VecNodes& t2v, double t);

struct DenseParams {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]

  static DenseParams init(std::size_t out, std::size_t in, Rng& rng);
};

struct DenseNodes {
  NodeId weight, bias;
};

DenseNodes bind(Graph& g, const DenseParams& p);
NodeId dense_forward(Graph& g, const DenseNodes& dense, NodeId x);

struct LayerNormParams {
  Tensor gain, offset;  // each [dim]

  static LayerNormParams init(std::size_t dim);
};

struct LayerNormNodes {
  NodeId gain, offset;
};

LayerNormNodes bind(Graph& g, const LayerNormParams& p);
NodeId layer_norm_forward(Graph& g, const LayerNormNodes& norm, NodeId x, double eps = 1e-5);

// Inverted dropout: in train mode kept elements are scaled by 1/(1-rate) so the
// expectation matches eval mode, where the input passes through untouched.
NodeId dropout_forward(Graph& g, NodeId x, double rate, Mode mode, Rng& rng);

}  // namespace attnfc
