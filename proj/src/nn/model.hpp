#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "nn/attention.hpp"
#include "nn/layers.hpp"

namespace attnfc {

enum class ModelMode { kAttentionLstm, kPlainLstm, kPersistence };

std::string to_string(ModelMode mode);
ModelMode model_mode_from_string(const std::string& name);

struct ModelConfig {
  std::size_t lookback = 7;
  std::size_t encoder1_size = 14;
  std::size_t encoder2_size = 7;
  double dropout_rate = 0.20;
  std::size_t time2vec_l = 7;
  std::size_t feature_count = 3;
  ModelMode mode = ModelMode::kAttentionLstm;

  void validate() const;

  // Per-step input width seen by the first encoder layer: the raw features
  // plus, when temporal embeddings are in play, the l+1 embedding elements.
  std::size_t augmented_features() const;

  // Closed-form trainable-parameter count for this configuration.
  std::size_t param_count() const;
};

// All trainable state for one forecaster. Which groups are populated depends
// on config.mode; persistence has no parameters at all.
struct Forecaster {
  ModelConfig config;
  Time2VecParams t2v;
  LstmCellParams encoder1, encoder2, decoder;
  LayerNormParams norm1, norm2;
  AttentionScorerParams scorer;
  DenseParams head;

  static Forecaster init(const ModelConfig& config, std::uint64_t seed);

  // Visits every populated parameter tensor in a fixed, documented order;
  // checkpointing and the optimizer both key off these names.
  void visit_params(const std::function<void(const std::string&, Tensor&)>& fn);
  void visit_params(const std::function<void(const std::string&, const Tensor&)>& fn) const;

  std::size_t param_count() const;
};

struct ForecasterNodes {
  Time2VecNodes t2v;
  LstmCellNodes encoder1, encoder2, decoder;
  LayerNormNodes norm1, norm2;
  AttentionScorerNodes scorer;
  DenseNodes head;
};

ForecasterNodes bind(Graph& g, const Forecaster& model);

// Bound leaf ids in the same order visit_params walks the tensors, so
// gradients can be zipped with parameters.
std::vector<NodeId> ordered_ids(const ForecasterNodes& nodes, ModelMode mode);

struct EncodeResult {
  std::vector<NodeId> h_rows;      // top-layer state per step, post-normalization
  LstmState final_state;           // raw top-layer state after the last step
  std::vector<NodeId> input_rows;  // the (augmented) rows actually fed to layer 1
};

EncodeResult encode(Graph& g, const ForecasterNodes& nodes, const ModelConfig& config,
                    const Tensor& window, std::span<const double> time_indices, Mode mode,
                    Rng& rng);

struct PredictResult {
  NodeId y;  // [1], scaled space
  AttentionResult trace;
};

PredictResult predict_one(Graph& g, const ForecasterNodes& nodes, const ModelConfig& config,
                          const Tensor& window, std::span<const double> time_indices, Mode mode,
                          Rng& rng);

NodeId plain_lstm_forward(Graph& g, const ForecasterNodes& nodes, const ModelConfig& config,
                          const Tensor& window, std::span<const double> time_indices, Mode mode,
                          Rng& rng);

// Mode-dispatching forward used by the trainer; persistence is rejected since
// it has nothing to train.
NodeId model_forward(Graph& g, const ForecasterNodes& nodes, const ModelConfig& config,
                     const Tensor& window, std::span<const double> time_indices, Mode mode,
                     Rng& rng);

struct ForecastPath {
  std::vector<double> predictions;         // scaled space, one per horizon step
  std::vector<Tensor> attention_weights;   // [lookback x n] per step (attention mode only)
  std::vector<Tensor> attention_contexts;  // [n] per step (attention mode only)
};

// Rolls the model forward `horizon` days: each prediction is written into the
// target slot of a fresh last row, exogenous features persist at their last
// observed values, and the time index advances by one.
ForecastPath forecast_recursive(const Forecaster& model, const Tensor& seed_window,
                                std::span<const double> time_indices, std::size_t horizon,
                                std::size_t target_feature = 0);

}  // namespace attnfc
