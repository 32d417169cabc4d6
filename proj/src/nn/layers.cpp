#include "nn/layers.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace attnfc {

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

LstmCellParams LstmCellParams::init(std::size_t hidden, std::size_t input, Rng& rng) {
  if (hidden == 0 || input == 0) {
    throw ConfigError("lstm init: hidden and input sizes must be positive");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden + input));
  LstmCellParams p;
  p.w_forget = uniform_matrix(hidden, hidden + input, bound, rng);
  p.w_input = uniform_matrix(hidden, hidden + input, bound, rng);
  p.w_cell = uniform_matrix(hidden, hidden + input, bound, rng);
  p.w_output = uniform_matrix(hidden, hidden + input, bound, rng);
  p.b_forget = Tensor::zeros({hidden});
  p.b_input = Tensor::zeros({hidden});
  p.b_cell = Tensor::zeros({hidden});
  p.b_output = Tensor::zeros({hidden});
  return p;
}

LstmCellNodes bind(Graph& g, const LstmCellParams& p) {
  LstmCellNodes n;
  n.w_forget = g.leaf(p.w_forget);
  n.w_input = g.leaf(p.w_input);
  n.w_cell = g.leaf(p.w_cell);
  n.w_output = g.leaf(p.w_output);
  n.b_forget = g.leaf(p.b_forget);
  n.b_input = g.leaf(p.b_input);
  n.b_cell = g.leaf(p.b_cell);
  n.b_output = g.leaf(p.b_output);
  return n;
}

LstmState lstm_initial_state(Graph& g, std::size_t hidden) {
  return {g.leaf(Tensor::zeros({hidden})), g.leaf(Tensor::zeros({hidden}))};
}

LstmState lstm_cell_step(Graph& g, const LstmCellNodes& cell, const LstmState& prev, NodeId x) {
  NodeId hx = g.concat(prev.h, x, 0);
  NodeId f = g.sigmoid(g.add(g.matmul(cell.w_forget, hx), cell.b_forget));
  NodeId i = g.sigmoid(g.add(g.matmul(cell.w_input, hx), cell.b_input));
  NodeId cand = g.tanh_(g.add(g.matmul(cell.w_cell, hx), cell.b_cell));
  NodeId c = g.add(g.hadamard(f, prev.c), g.hadamard(i, cand));
  NodeId o = g.sigmoid(g.add(g.matmul(cell.w_output, hx), cell.b_output));
  NodeId h = g.hadamard(o, g.tanh_(c));
  return {h, c};
}

std::vector<LstmState> lstm_sequence(Graph& g, const LstmCellNodes& cell, LstmState state,
                                     std::span<const NodeId> xs) {
  if (xs.empty()) throw ContractError("lstm_sequence: empty input sequence");
  std::vector<LstmState> states;
  states.reserve(xs.size());
  for (NodeId x : xs) {
    state = lstm_cell_step(g, cell, state, x);
    states.push_back(state);
  }
  return states;
}

Time2VecParams Time2VecParams::init(std::size_t l, Rng& rng) {
  if (l == 0) throw ConfigError("time2vec init: need at least one periodic element");
  Time2VecParams p;
  p.alpha = Tensor({l + 1});
  p.beta = Tensor({l + 1});
  // Frequencies start small so that raw day indices in the low hundreds do not
  // saturate everything downstream before training has a chance to move them.
  for (std::size_t i = 0; i < l + 1; ++i) {
    p.alpha[i] = rng.uniform(-0.05, 0.05);
    p.beta[i] = rng.uniform(-0.05, 0.05);
  }
  return p;
}

Time2VecNodes bind(Graph& g, const Time2VecParams& p) {
  const std::size_t k = p.dim();
  Tensor linear = Tensor::zeros({k});
  Tensor rest = Tensor::full({k}, 1.0);
  linear[0] = 1.0;
  rest[0] = 0.0;
  Time2VecNodes n;
  n.alpha = g.leaf(p.alpha);
  n.beta = g.leaf(p.beta);
  n.linear_mask = g.leaf(linear);
  n.relu_mask = g.leaf(rest);
  return n;
}

NodeId time2vec(Graph& g, const Time2VecNodes& t2v, double t) {
  if (!std::isfinite(t)) throw ContractError("time2vec: time index is not finite");
  const std::size_t k = g.value(t2v.alpha).size();
  NodeId tvec = g.leaf(Tensor::full({k}, t));
  NodeId affine = g.add(g.hadamard(t2v.alpha, tvec), t2v.beta);
  NodeId linear_part = g.hadamard(affine, t2v.linear_mask);
  NodeId relu_part = g.hadamard(g.relu(affine), t2v.relu_mask);
  return g.add(linear_part, relu_part);
}

DenseParams DenseParams::init(std::size_t out, std::size_t in, Rng& rng) {
  if (out == 0 || in == 0) throw ConfigError("dense init: zero-sized layer");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  DenseParams p;
  p.weight = uniform_matrix(out, in, bound, rng);
  p.bias = Tensor::zeros({out});
  return p;
}

DenseNodes bind(Graph& g, const DenseParams& p) {
  return {g.leaf(p.weight), g.leaf(p.bias)};
}

NodeId dense_forward(Graph& g, const DenseNodes& dense, NodeId x) {
  return g.add(g.matmul(dense.weight, x), dense.bias);
}

LayerNormParams LayerNormParams::init(std::size_t dim) {
  if (dim == 0) throw ConfigError("layer norm init: zero-sized layer");
  return {Tensor::full({dim}, 1.0), Tensor::zeros({dim})};
}

LayerNormNodes bind(Graph& g, const LayerNormParams& p) {
  return {g.leaf(p.gain), g.leaf(p.offset)};
}

NodeId layer_norm_forward(Graph& g, const LayerNormNodes& norm, NodeId x, double eps) {
  return g.layer_norm(x, norm.gain, norm.offset, eps);
}

NodeId dropout_forward(Graph& g, NodeId x, double rate, Mode mode, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::kEval || rate == 0.0) return x;
  const Tensor& value = g.value(x);
  Tensor mask(std::vector<std::size_t>(value.shape().begin(), value.shape().end()));
  const double keep = 1.0 - rate;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  return g.hadamard(x, g.leaf(mask));
}

}  // namespace attnfc
