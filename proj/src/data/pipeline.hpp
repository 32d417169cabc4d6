#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/tensor.hpp"
#include "data/jhu.hpp"

namespace attnfc {

struct Stats {
  double mean = 0.0;
  double std_dev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  double skewness = 0.0;  // m3 / m2^(3/2)
  double kurtosis = 0.0;  // excess: m4 / m2^2 - 3
  std::size_t count = 0;
};

Stats descriptive_stats(std::span<const double> values);

// [N x 3] feature matrix in channel order confirmed, recovered, deaths.
Tensor feature_matrix(const RawSeries& series);

// Per-feature affine map [min, max] -> [-1, 1], fit on training rows only.
// Values beyond the fit range extrapolate linearly. A feature whose training
// rows are constant is only tolerated when listed in `allow_constant`; it then
// scales to 0 and inverts back to its constant value.
struct ScalerParams {
  std::vector<double> min_v, max_v;

  std::size_t features() const { return min_v.size(); }
  bool degenerate(std::size_t feature) const { return min_v[feature] == max_v[feature]; }

  double scale_value(std::size_t feature, double x) const;
  double inverse_value(std::size_t feature, double y) const;
};

ScalerParams fit_scaler(const Tensor& train_rows,
                        const std::vector<std::uint8_t>& allow_constant = {});
Tensor scale(const ScalerParams& params, const Tensor& rows);
Tensor inverse(const ScalerParams& params, const Tensor& rows);

// Sliding windows over a scaled feature matrix. Sample i covers rows
// [i, i+lookback) and its target is row i+lookback's target feature; the
// stored time index is i, the day offset of the window's first row.
struct WindowedDataset {
  std::vector<Tensor> inputs;        // each [lookback x features]
  std::vector<double> targets;       // scaled target-channel values
  std::vector<double> time_indices;  // day offset of each window's first row

  std::size_t size() const { return inputs.size(); }
};

WindowedDataset make_windows(const Tensor& scaled, std::size_t lookback,
                             std::size_t target_feature = 0);

// Times fed to the model for a window starting at day offset `base`.
std::vector<double> window_times(double base, std::size_t lookback);

struct SplitSpec {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;

  void validate() const;
};

struct SplitResult {
  WindowedDataset train, validation, test;
};

// Contiguous chronological partition by sample index; no shuffling.
SplitResult chronological_split(const WindowedDataset& dataset, const SplitSpec& spec);

}  // namespace attnfc
