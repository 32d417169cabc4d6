#pragma once

#include <cstdint>
#include <vector>

#include "core/graph.hpp"
#include "data/pipeline.hpp"
#include "nn/model.hpp"
#include "train/adam.hpp"

namespace attnfc {

struct TrainConfig {
  std::size_t epochs = 150;
  AdamConfig adam;
  std::size_t batch_size = 1;
  std::uint64_t seed = 42;
  double gradient_clip = 0.0;  // global max-norm; 0 disables clipping

  void validate() const;
};

// (prediction - target)^2 as a graph node, so it can be differentiated.
NodeId mse_loss(Graph& g, NodeId prediction, NodeId target);

// Mean squared error of the model over a dataset, eval mode.
double dataset_mse(const Forecaster& model, const WindowedDataset& data);

struct TrainResult {
  Forecaster best_model;
  std::vector<double> train_loss, val_loss;  // one entry per epoch
  std::size_t best_epoch = 0;                // 1-based
  double best_val_loss = 0.0;
};

// Batch-size-1 loop in chronological sample order: forward in train mode,
// backward, one Adam step per sample. After each epoch the validation MSE is
// measured in eval mode; the parameters of the best epoch are returned.
TrainResult train(const Forecaster& initial, const WindowedDataset& train_set,
                  const WindowedDataset& val_set, const TrainConfig& config);

}  // namespace attnfc
