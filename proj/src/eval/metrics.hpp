#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "data/pipeline.hpp"
#include "nn/model.hpp"

namespace attnfc {

// Both metrics score raw case counts, i.e. values after inverse scaling.
double rmse(std::span<const double> actual, std::span<const double> predicted);
double mape(std::span<const double> actual, std::span<const double> predicted);  // percent

struct HorizonSpec {
  std::vector<std::size_t> horizons = {2, 4, 6, 8, 10, 12, 14};

  void validate() const;  // positive, strictly increasing
};

struct Score {
  double rmse = 0.0;
  double mape = 0.0;
};

// One scaled next-day prediction per sample, eval mode.
std::vector<double> one_step_predictions(const Forecaster& model, const WindowedDataset& data,
                                         std::size_t target_feature = 0);

// One-step-ahead predictions over the whole test split, inverse-scaled and
// scored against the actual targets.
Score evaluate_test(const Forecaster& model, const WindowedDataset& test_set,
                    const ScalerParams& scaler, std::size_t target_feature = 0);

// Seeds a window with the `lookback` rows before `boundary` (the first
// held-out row index), rolls the model forward `horizon` days and scores the
// inverse-scaled path against rows [boundary, boundary+horizon). The forecast
// only ever sees pre-boundary rows plus its own predictions.
Score evaluate_horizon(const Forecaster& model, const Tensor& scaled_rows,
                       const ScalerParams& scaler, std::size_t boundary, std::size_t horizon,
                       std::size_t target_feature = 0);

}  // namespace attnfc
