#include "nn/model.hpp"

#include <utility>

#include "core/errors.hpp"

namespace attnfc {

namespace {

constexpr std::size_t kScorerHidden = 7;

void check_window(const ModelConfig& config, const Tensor& window,
                  std::span<const double> time_indices) {
  if (window.rank() != 2 || window.rows() != config.lookback ||
      window.cols() != config.feature_count) {
    throw DimensionError("model: window " + window.shape_str() + " does not match lookback " +
                         std::to_string(config.lookback) + " x features " +
                         std::to_string(config.feature_count));
  }
  if (time_indices.size() != config.lookback) {
    throw DimensionError("model: got " + std::to_string(time_indices.size()) +
                         " time indices for lookback " + std::to_string(config.lookback));
  }
}

void visit_lstm(const std::string& prefix, LstmCellParams& p,
                const std::function<void(const std::string&, Tensor&)>& fn) {
  fn(prefix + ".w_forget", p.w_forget);
  fn(prefix + ".w_input", p.w_input);
  fn(prefix + ".w_cell", p.w_cell);
  fn(prefix + ".w_output", p.w_output);
  fn(prefix + ".b_forget", p.b_forget);
  fn(prefix + ".b_input", p.b_input);
  fn(prefix + ".b_cell", p.b_cell);
  fn(prefix + ".b_output", p.b_output);
}

std::size_t lstm_param_count(std::size_t hidden, std::size_t input) {
  return 4 * hidden * (hidden + input) + 4 * hidden;
}

}  // namespace

std::string to_string(ModelMode mode) {
  switch (mode) {
    case ModelMode::kAttentionLstm: return "attention_lstm";
    case ModelMode::kPlainLstm: return "plain_lstm";
    case ModelMode::kPersistence: return "persistence";
  }
  throw ContractError("unknown model mode");
}

ModelMode model_mode_from_string(const std::string& name) {
  if (name == "attention_lstm") return ModelMode::kAttentionLstm;
  if (name == "plain_lstm") return ModelMode::kPlainLstm;
  if (name == "persistence") return ModelMode::kPersistence;
  throw ConfigError("unknown model mode '" + name +
                    "' (expected attention_lstm, plain_lstm or persistence)");
}

void ModelConfig::validate() const {
  if (lookback < 1) throw ConfigError("model config: lookback must be at least 1");
  if (encoder1_size == 0 || encoder2_size == 0) {
    throw ConfigError("model config: encoder layer sizes must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("model config: dropout rate must lie in [0, 1)");
  }
  if (time2vec_l == 0) throw ConfigError("model config: time2vec_l must be at least 1");
  if (feature_count == 0) throw ConfigError("model config: need at least one feature");
}

std::size_t ModelConfig::augmented_features() const {
  if (mode == ModelMode::kAttentionLstm) return feature_count + time2vec_l + 1;
  return feature_count;
}

std::size_t ModelConfig::param_count() const {
  if (mode == ModelMode::kPersistence) return 0;
  const std::size_t aug = augmented_features();
  std::size_t total = lstm_param_count(encoder1_size, aug) + 2 * encoder1_size +
                      lstm_param_count(encoder2_size, encoder1_size) + 2 * encoder2_size;
  if (mode == ModelMode::kPlainLstm) {
    return total + (encoder2_size + 1);  // head over the final state
  }
  total += 2 * (time2vec_l + 1);
  total += lstm_param_count(encoder2_size, aug);
  total += kScorerHidden * 2 * encoder2_size + kScorerHidden;             // scorer hidden
  total += encoder2_size * kScorerHidden + encoder2_size;                 // scorer read-out
  total += 2 * encoder2_size + 1;                                        // head over [context, h]
  return total;
}

Forecaster Forecaster::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Forecaster m;
  m.config = config;
  if (config.mode == ModelMode::kPersistence) return m;

  Rng rng(seed);
  const std::size_t aug = config.augmented_features();
  if (config.mode == ModelMode::kAttentionLstm) {
    m.t2v = Time2VecParams::init(config.time2vec_l, rng);
  }
  m.encoder1 = LstmCellParams::init(config.encoder1_size, aug, rng);
  m.norm1 = LayerNormParams::init(config.encoder1_size);
  m.encoder2 = LstmCellParams::init(config.encoder2_size, config.encoder1_size, rng);
  m.norm2 = LayerNormParams::init(config.encoder2_size);
  if (config.mode == ModelMode::kAttentionLstm) {
    m.decoder = LstmCellParams::init(config.encoder2_size, aug, rng);
    m.scorer = AttentionScorerParams::init(config.encoder2_size, kScorerHidden,
                                           config.encoder2_size, rng);
    m.head = DenseParams::init(1, 2 * config.encoder2_size, rng);
  } else {
    m.head = DenseParams::init(1, config.encoder2_size, rng);
  }
  return m;
}

void Forecaster::visit_params(const std::function<void(const std::string&, Tensor&)>& fn) {
  if (config.mode == ModelMode::kPersistence) return;
  if (config.mode == ModelMode::kAttentionLstm) {
    fn("t2v.alpha", t2v.alpha);
    fn("t2v.beta", t2v.beta);
  }
  visit_lstm("encoder1", encoder1, fn);
  fn("norm1.gain", norm1.gain);
  fn("norm1.offset", norm1.offset);
  visit_lstm("encoder2", encoder2, fn);
  fn("norm2.gain", norm2.gain);
  fn("norm2.offset", norm2.offset);
  if (config.mode == ModelMode::kAttentionLstm) {
    visit_lstm("decoder", decoder, fn);
    fn("scorer.hidden.weight", scorer.hidden.weight);
    fn("scorer.hidden.bias", scorer.hidden.bias);
    fn("scorer.output.weight", scorer.output.weight);
    fn("scorer.output.bias", scorer.output.bias);
  }
  fn("head.weight", head.weight);
  fn("head.bias", head.bias);
}

void Forecaster::visit_params(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<Forecaster*>(this)->visit_params(
      [&](const std::string& name, Tensor& t) { fn(name, t); });
}

std::size_t Forecaster::param_count() const {
  std::size_t total = 0;
  visit_params([&](const std::string&, const Tensor& t) { total += t.size(); });
  return total;
}

ForecasterNodes bind(Graph& g, const Forecaster& model) {
  if (model.config.mode == ModelMode::kPersistence) {
    throw ContractError("bind: persistence baseline has no parameters to bind");
  }
  ForecasterNodes n;
  n.encoder1 = bind(g, model.encoder1);
  n.norm1 = bind(g, model.norm1);
  n.encoder2 = bind(g, model.encoder2);
  n.norm2 = bind(g, model.norm2);
  n.head = bind(g, model.head);
  if (model.config.mode == ModelMode::kAttentionLstm) {
    n.t2v = bind(g, model.t2v);
    n.decoder = bind(g, model.decoder);
    n.scorer = bind(g, model.scorer);
  }
  return n;
}

std::vector<NodeId> ordered_ids(const ForecasterNodes& nodes, ModelMode mode) {
  if (mode == ModelMode::kPersistence) return {};
  auto lstm_ids = [](const LstmCellNodes& c, std::vector<NodeId>& out) {
    out.insert(out.end(), {c.w_forget, c.w_input, c.w_cell, c.w_output, c.b_forget, c.b_input,
                           c.b_cell, c.b_output});
  };
  std::vector<NodeId> ids;
  if (mode == ModelMode::kAttentionLstm) {
    ids.push_back(nodes.t2v.alpha);
    ids.push_back(nodes.t2v.beta);
  }
  lstm_ids(nodes.encoder1, ids);
  ids.push_back(nodes.norm1.gain);
  ids.push_back(nodes.norm1.offset);
  lstm_ids(nodes.encoder2, ids);
  ids.push_back(nodes.norm2.gain);
  ids.push_back(nodes.norm2.offset);
  if (mode == ModelMode::kAttentionLstm) {
    lstm_ids(nodes.decoder, ids);
    ids.insert(ids.end(), {nodes.scorer.hidden.weight, nodes.scorer.hidden.bias,
                           nodes.scorer.output.weight, nodes.scorer.output.bias});
  }
  ids.push_back(nodes.head.weight);
  ids.push_back(nodes.head.bias);
  return ids;
}

EncodeResult encode(Graph& g, const ForecasterNodes& nodes, const ModelConfig& config,
                    const Tensor& window, std::span<const double> time_indices, Mode mode,
                    Rng& rng) {
  check_window(config, window, time_indices);
  const bool with_time = config.mode == ModelMode::kAttentionLstm;

  EncodeResult out;
  out.input_rows.reserve(config.lookback);
  for (std::size_t r = 0; r < config.lookback; ++r) {
    Tensor row({config.feature_count});
    for (std::size_t c = 0; c < config.feature_count; ++c) row[c] = window.at(r, c);
    NodeId x = g.leaf(std::move(row));
    if (with_time) x = g.concat(x, time2vec(g, nodes.t2v, time_indices[r]), 0);
    out.input_rows.push_back(x);
  }

  std::vector<LstmState> l1 =
      lstm_sequence(g, nodes.encoder1, lstm_initial_state(g, config.encoder1_size),
                    out.input_rows);
  std::vector<NodeId> l2_inputs;
  l2_inputs.reserve(l1.size());
  for (const LstmState& s : l1) {
    NodeId normed = layer_norm_forward(g, nodes.norm1, s.h);
    l2_inputs.push_back(dropout_forward(g, normed, config.dropout_rate, mode, rng));
  }

  std::vector<LstmState> l2 =
      lstm_sequence(g, nodes.encoder2, lstm_initial_state(g, config.encoder2_size), l2_inputs);
  out.h_rows.reserve(l2.size());
  for (const LstmState& s : l2) out.h_rows.push_back(layer_norm_forward(g, nodes.norm2, s.h));
  out.final_state = l2.back();
  return out;
}

PredictResult predict_one(Graph& g, const ForecasterNodes& nodes, const ModelConfig& config,
                          const Tensor& window, std::span<const double> time_indices, Mode mode,
                          Rng& rng) {
  if (config.mode != ModelMode::kAttentionLstm) {
    throw ContractError("predict_one: model is not in attention mode");
  }
  EncodeResult enc = encode(g, nodes, config, window, time_indices, mode, rng);
  // Scores are taken against the decoder state before its step, i.e. the
  // final encoder state that seeds it.
  AttentionResult trace = attend_fine(g, nodes.scorer, enc.h_rows, enc.final_state.h);
  LstmState dec = lstm_cell_step(g, nodes.decoder, enc.final_state, enc.input_rows.back());
  NodeId y = dense_forward(g, nodes.head, g.concat(trace.context, dec.h, 0));
  return {y, trace};
}

NodeId plain_lstm_forward(Graph& g, const ForecasterNodes& nodes, const ModelConfig& config,
                          const Tensor& window, std::span<const double> time_indices, Mode mode,
                          Rng& rng) {
  if (config.mode != ModelMode::kPlainLstm) {
    throw ContractError("plain_lstm_forward: model is not in plain mode");
  }
  EncodeResult enc = encode(g, nodes, config, window, time_indices, mode, rng);
  return dense_forward(g, nodes.head, enc.h_rows.back());
}

NodeId model_forward(Graph& g, const ForecasterNodes& nodes, const ModelConfig& config,
                     const Tensor& window, std::span<const double> time_indices, Mode mode,
                     Rng& rng) {
  switch (config.mode) {
    case ModelMode::kAttentionLstm:
      return predict_one(g, nodes, config, window, time_indices, mode, rng).y;
    case ModelMode::kPlainLstm:
      return plain_lstm_forward(g, nodes, config, window, time_indices, mode, rng);
    case ModelMode::kPersistence:
      throw ContractError("model_forward: persistence baseline has no trainable forward");
  }
  throw ContractError("unknown model mode");
}

ForecastPath forecast_recursive(const Forecaster& model, const Tensor& seed_window,
                                std::span<const double> time_indices, std::size_t horizon,
                                std::size_t target_feature) {
  const ModelConfig& config = model.config;
  if (horizon < 1) throw ContractError("forecast_recursive: horizon must be at least 1");
  if (target_feature >= config.feature_count) {
    throw ContractError("forecast_recursive: target feature index out of range");
  }
  check_window(config, seed_window, time_indices);

  ForecastPath path;
  path.predictions.reserve(horizon);

  if (config.mode == ModelMode::kPersistence) {
    const double last = seed_window.at(config.lookback - 1, target_feature);
    path.predictions.assign(horizon, last);
    return path;
  }

  Tensor window = seed_window;
  std::vector<double> times(time_indices.begin(), time_indices.end());
  Rng rng(0);  // eval mode never draws from it
  for (std::size_t step = 0; step < horizon; ++step) {
    Graph g;
    ForecasterNodes nodes = bind(g, model);
    double y;
    if (config.mode == ModelMode::kAttentionLstm) {
      PredictResult p = predict_one(g, nodes, config, window, times, Mode::kEval, rng);
      y = g.value(p.y)[0];
      path.attention_weights.push_back(g.value(p.trace.weights));
      path.attention_contexts.push_back(g.value(p.trace.context));
    } else {
      y = g.value(plain_lstm_forward(g, nodes, config, window, times, Mode::kEval, rng))[0];
    }
    path.predictions.push_back(y);

    // slide the window one day: reuse the last observed exogenous values,
    // drop the prediction into the target slot
    Tensor next({config.lookback, config.feature_count});
    for (std::size_t r = 0; r + 1 < config.lookback; ++r) {
      for (std::size_t c = 0; c < config.feature_count; ++c) {
        next.at(r, c) = window.at(r + 1, c);
      }
    }
    for (std::size_t c = 0; c < config.feature_count; ++c) {
      next.at(config.lookback - 1, c) = window.at(config.lookback - 1, c);
    }
    next.at(config.lookback - 1, target_feature) = y;
    window = std::move(next);
    for (std::size_t r = 0; r + 1 < times.size(); ++r) times[r] = times[r + 1];
    times.back() += 1.0;
  }
  return path;
}

}  // namespace attnfc
