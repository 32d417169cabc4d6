#include "train/trainer.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace attnfc {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
  if (batch_size != 1) throw ConfigError("train: only batch size 1 is supported");
  if (gradient_clip < 0.0) throw ConfigError("train: gradient clip must be nonnegative");
  adam.validate();
}

NodeId mse_loss(Graph& g, NodeId prediction, NodeId target) {
  NodeId err = g.sub(prediction, target);
  return g.sum_all(g.hadamard(err, err));
}

double dataset_mse(const Forecaster& model, const WindowedDataset& data) {
  if (data.size() == 0) throw ContractError("dataset_mse: empty dataset");
  Rng rng(0);  // eval mode never draws
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Graph g;
    ForecasterNodes nodes = bind(g, model);
    NodeId y = model_forward(g, nodes, model.config,
                             data.inputs[i],
                             window_times(data.time_indices[i], model.config.lookback),
                             Mode::kEval, rng);
    const double diff = g.value(y)[0] - data.targets[i];
    total += diff * diff;
  }
  return total / static_cast<double>(data.size());
}

TrainResult train(const Forecaster& initial, const WindowedDataset& train_set,
                  const WindowedDataset& val_set, const TrainConfig& config) {
  config.validate();
  initial.config.validate();
  if (initial.config.mode == ModelMode::kPersistence) {
    throw ContractError("train: persistence baseline has nothing to train");
  }
  if (train_set.size() == 0 || val_set.size() == 0) {
    throw ContractError("train: training and validation splits must be nonempty");
  }

  Forecaster model = initial;
  std::vector<Tensor*> params;
  model.visit_params([&](const std::string&, Tensor& t) { params.push_back(&t); });
  AdamState opt = AdamState::like(params);
  Rng rng(config.seed);

  TrainResult result;
  result.best_model = model;
  result.best_val_loss = dataset_mse(model, val_set);
  result.best_epoch = 0;  // pre-training parameters until an epoch beats them

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
      Graph g;
      ForecasterNodes nodes = bind(g, model);
      NodeId y = model_forward(g, nodes, model.config, train_set.inputs[i],
                               window_times(train_set.time_indices[i], model.config.lookback),
                               Mode::kTrain, rng);
      NodeId loss = mse_loss(g, y, g.leaf(Tensor::vector({train_set.targets[i]})));
      const double loss_value = g.value(loss)[0];
      if (!std::isfinite(loss_value)) {
        throw TrainError("train: non-finite loss at epoch " + std::to_string(epoch) +
                         ", sample " + std::to_string(i));
      }
      epoch_loss += loss_value;
      g.backward(loss);

      std::vector<NodeId> ids = ordered_ids(nodes, model.config.mode);
      std::vector<Tensor> grads;
      grads.reserve(ids.size());
      for (NodeId id : ids) grads.push_back(g.grad(id));

      if (config.gradient_clip > 0.0) {
        double sq = 0.0;
        for (const Tensor& t : grads) {
          for (std::size_t k = 0; k < t.size(); ++k) sq += t[k] * t[k];
        }
        const double norm = std::sqrt(sq);
        if (norm > config.gradient_clip) {
          const double factor = config.gradient_clip / norm;
          for (Tensor& t : grads) {
            for (std::size_t k = 0; k < t.size(); ++k) t[k] *= factor;
          }
        }
      }
      adam_step(params, grads, opt, config.adam);
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(train_set.size()));

    const double val = dataset_mse(model, val_set);
    if (!std::isfinite(val)) {
      throw TrainError("train: non-finite validation loss after epoch " + std::to_string(epoch));
    }
    result.val_loss.push_back(val);
    if (val < result.best_val_loss) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      result.best_model = model;
    }
  }
  return result;
}

}  // namespace attnfc
