#include "data/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace attnfc {

Stats descriptive_stats(std::span<const double> values) {
  if (values.size() < 2) {
    throw ContractError("descriptive_stats: need at least 2 values, got " +
                        std::to_string(values.size()));
  }
  const double n = static_cast<double>(values.size());
  Stats s;
  s.count = values.size();
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    s.mean += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean /= n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0) {
    throw ContractError("descriptive_stats: constant series, skewness and kurtosis undefined");
  }
  s.std_dev = std::sqrt(m2);
  s.skewness = m3 / std::pow(m2, 1.5);
  s.kurtosis = m4 / (m2 * m2) - 3.0;
  return s;
}

Tensor feature_matrix(const RawSeries& series) {
  Tensor m({series.size(), 3});
  for (std::size_t i = 0; i < series.size(); ++i) {
    m.at(i, 0) = series.confirmed[i];
    m.at(i, 1) = series.recovered[i];
    m.at(i, 2) = series.deaths[i];
  }
  return m;
}

double ScalerParams::scale_value(std::size_t feature, double x) const {
  if (degenerate(feature)) return 0.0;
  return -1.0 + 2.0 * (x - min_v[feature]) / (max_v[feature] - min_v[feature]);
}

double ScalerParams::inverse_value(std::size_t feature, double y) const {
  if (degenerate(feature)) return min_v[feature];
  return min_v[feature] + (y + 1.0) * 0.5 * (max_v[feature] - min_v[feature]);
}

ScalerParams fit_scaler(const Tensor& train_rows, const std::vector<std::uint8_t>& allow_constant) {
  if (train_rows.rank() != 2 || train_rows.rows() == 0) {
    throw ContractError("fit_scaler: expected a nonempty [rows x features] matrix, got " +
                        train_rows.shape_str());
  }
  const std::size_t features = train_rows.cols();
  if (!allow_constant.empty() && allow_constant.size() != features) {
    throw ContractError("fit_scaler: allow_constant mask length does not match feature count");
  }
  ScalerParams p;
  p.min_v.resize(features);
  p.max_v.resize(features);
  for (std::size_t j = 0; j < features; ++j) {
    double lo = train_rows.at(0, j), hi = train_rows.at(0, j);
    for (std::size_t i = 1; i < train_rows.rows(); ++i) {
      lo = std::min(lo, train_rows.at(i, j));
      hi = std::max(hi, train_rows.at(i, j));
    }
    if (lo == hi && (allow_constant.empty() || !allow_constant[j])) {
      throw ContractError("fit_scaler: feature " + std::to_string(j) +
                          " is constant on the training rows (value " + std::to_string(lo) + ")");
    }
    p.min_v[j] = lo;
    p.max_v[j] = hi;
  }
  return p;
}

namespace {

Tensor map_rows(const ScalerParams& params, const Tensor& rows,
                double (ScalerParams::*fn)(std::size_t, double) const) {
  if (rows.rank() != 2 || rows.cols() != params.features()) {
    throw DimensionError("scaler: expected [rows x " + std::to_string(params.features()) +
                         "] matrix, got " + rows.shape_str());
  }
  Tensor out({rows.rows(), rows.cols()});
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t j = 0; j < rows.cols(); ++j) {
      out.at(i, j) = (params.*fn)(j, rows.at(i, j));
    }
  }
  return out;
}

}  // namespace

Tensor scale(const ScalerParams& params, const Tensor& rows) {
  return map_rows(params, rows, &ScalerParams::scale_value);
}

Tensor inverse(const ScalerParams& params, const Tensor& rows) {
  return map_rows(params, rows, &ScalerParams::inverse_value);
}

WindowedDataset make_windows(const Tensor& scaled, std::size_t lookback,
                             std::size_t target_feature) {
  if (scaled.rank() != 2) {
    throw ContractError("make_windows: expected a [rows x features] matrix, got " +
                        scaled.shape_str());
  }
  if (lookback < 1) throw ContractError("make_windows: lookback must be at least 1");
  if (target_feature >= scaled.cols()) {
    throw ContractError("make_windows: target feature index out of range");
  }
  if (scaled.rows() <= lookback) {
    throw ContractError("make_windows: need more than " + std::to_string(lookback) +
                        " rows to form one sample, got " + std::to_string(scaled.rows()));
  }
  WindowedDataset ds;
  const std::size_t samples = scaled.rows() - lookback;
  ds.inputs.reserve(samples);
  ds.targets.reserve(samples);
  ds.time_indices.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    Tensor window({lookback, scaled.cols()});
    for (std::size_t r = 0; r < lookback; ++r) {
      for (std::size_t c = 0; c < scaled.cols(); ++c) window.at(r, c) = scaled.at(i + r, c);
    }
    ds.inputs.push_back(std::move(window));
    ds.targets.push_back(scaled.at(i + lookback, target_feature));
    ds.time_indices.push_back(static_cast<double>(i));
  }
  return ds;
}

std::vector<double> window_times(double base, std::size_t lookback) {
  std::vector<double> times(lookback);
  for (std::size_t r = 0; r < lookback; ++r) times[r] = base + static_cast<double>(r);
  return times;
}

void SplitSpec::validate() const {
  if (train <= 0.0 || validation <= 0.0 || test <= 0.0) {
    throw ConfigError("split: all three fractions must be positive");
  }
  if (std::fabs(train + validation + test - 1.0) > 1e-9) {
    throw ConfigError("split: fractions must sum to 1");
  }
}

SplitResult chronological_split(const WindowedDataset& dataset, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = dataset.size();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train));
  const auto n_train_val =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * (spec.train + spec.validation)));
  if (n_train == 0 || n_train_val <= n_train || n_train_val >= n) {
    throw ContractError("split: a partition would be empty with " + std::to_string(n) +
                        " samples");
  }
  auto slice = [&](std::size_t lo, std::size_t hi) {
    WindowedDataset part;
    part.inputs.assign(dataset.inputs.begin() + static_cast<long>(lo),
                       dataset.inputs.begin() + static_cast<long>(hi));
    part.targets.assign(dataset.targets.begin() + static_cast<long>(lo),
                        dataset.targets.begin() + static_cast<long>(hi));
    part.time_indices.assign(dataset.time_indices.begin() + static_cast<long>(lo),
                             dataset.time_indices.begin() + static_cast<long>(hi));
    return part;
  };
  return {slice(0, n_train), slice(n_train, n_train_val), slice(n_train_val, n)};
}

}  // namespace attnfc
