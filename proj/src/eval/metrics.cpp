#include "eval/metrics.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace attnfc {

namespace {

void check_aligned(std::span<const double> actual, std::span<const double> predicted,
                   const char* what) {
  if (actual.size() != predicted.size()) {
    throw ContractError(std::string(what) + ": " + std::to_string(actual.size()) +
                        " actuals vs " + std::to_string(predicted.size()) + " predictions");
  }
  if (actual.empty()) throw ContractError(std::string(what) + ": empty sequences");
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_aligned(actual, predicted, "rmse");
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    total += d * d;
  }
  return std::sqrt(total / static_cast<double>(actual.size()));
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
  check_aligned(actual, predicted, "mape");
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      throw ContractError("mape: target at index " + std::to_string(i) +
                          " is zero, metric undefined");
    }
    // Percent per term, then the mean; keeps round hand values exact.
    total += 100.0 * std::fabs(actual[i] - predicted[i]) / std::fabs(actual[i]);
  }
  return total / static_cast<double>(actual.size());
}

void HorizonSpec::validate() const {
  if (horizons.empty()) throw ConfigError("horizons: list must be nonempty");
  std::size_t prev = 0;
  for (std::size_t h : horizons) {
    if (h <= prev) throw ConfigError("horizons: must be positive and strictly increasing");
    prev = h;
  }
}

std::vector<double> one_step_predictions(const Forecaster& model, const WindowedDataset& data,
                                         std::size_t target_feature) {
  const ModelConfig& config = model.config;
  Rng rng(0);  // eval mode never draws

  std::vector<double> predicted;
  predicted.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (config.mode == ModelMode::kPersistence) {
      predicted.push_back(data.inputs[i].at(config.lookback - 1, target_feature));
    } else {
      Graph g;
      ForecasterNodes nodes = bind(g, model);
      NodeId y = model_forward(g, nodes, config, data.inputs[i],
                               window_times(data.time_indices[i], config.lookback), Mode::kEval,
                               rng);
      predicted.push_back(g.value(y)[0]);
    }
  }
  return predicted;
}

Score evaluate_test(const Forecaster& model, const WindowedDataset& test_set,
                    const ScalerParams& scaler, std::size_t target_feature) {
  if (test_set.size() == 0) throw ContractError("evaluate_test: empty test split");
  std::vector<double> scaled_pred = one_step_predictions(model, test_set, target_feature);

  std::vector<double> actual, predicted;
  actual.reserve(test_set.size());
  predicted.reserve(test_set.size());
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    actual.push_back(scaler.inverse_value(target_feature, test_set.targets[i]));
    predicted.push_back(scaler.inverse_value(target_feature, scaled_pred[i]));
  }
  return {rmse(actual, predicted), mape(actual, predicted)};
}

Score evaluate_horizon(const Forecaster& model, const Tensor& scaled_rows,
                       const ScalerParams& scaler, std::size_t boundary, std::size_t horizon,
                       std::size_t target_feature) {
  const ModelConfig& config = model.config;
  if (horizon < 1) throw ContractError("evaluate_horizon: horizon must be at least 1");
  if (scaled_rows.rank() != 2 || scaled_rows.cols() != config.feature_count) {
    throw DimensionError("evaluate_horizon: series " + scaled_rows.shape_str() +
                         " does not match feature count " +
                         std::to_string(config.feature_count));
  }
  if (boundary < config.lookback) {
    throw ContractError("evaluate_horizon: boundary " + std::to_string(boundary) +
                        " leaves no room for a lookback-" + std::to_string(config.lookback) +
                        " seed window");
  }
  if (scaled_rows.rows() < boundary + horizon) {
    throw ContractError("evaluate_horizon: need " + std::to_string(boundary + horizon) +
                        " rows to score horizon " + std::to_string(horizon) +
                        " past boundary " + std::to_string(boundary) + ", have " +
                        std::to_string(scaled_rows.rows()));
  }

  // seed strictly from pre-boundary rows
  Tensor seed({config.lookback, config.feature_count});
  const std::size_t base = boundary - config.lookback;
  for (std::size_t r = 0; r < config.lookback; ++r) {
    for (std::size_t c = 0; c < config.feature_count; ++c) {
      seed.at(r, c) = scaled_rows.at(base + r, c);
    }
  }
  ForecastPath path = forecast_recursive(model, seed,
                                         window_times(static_cast<double>(base), config.lookback),
                                         horizon, target_feature);

  std::vector<double> actual, predicted;
  actual.reserve(horizon);
  predicted.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    actual.push_back(
        scaler.inverse_value(target_feature, scaled_rows.at(boundary + k, target_feature)));
    predicted.push_back(scaler.inverse_value(target_feature, path.predictions[k]));
  }
  return {rmse(actual, predicted), mape(actual, predicted)};
}

}  // namespace attnfc
