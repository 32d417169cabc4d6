#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "data/pipeline.hpp"
#include "eval/metrics.hpp"

namespace attnfc {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

struct ReportRow {
  std::string country;
  std::string model;
  Score test;
  std::vector<std::pair<std::size_t, Score>> horizons;  // (steps, score), ascending
};

struct MetricsReport {
  std::vector<ReportRow> rows;
  std::string window_start, window_end;
  SplitSpec split;
  std::uint64_t seed = 0;
};

enum class ReportFormat { kMarkdown, kCsv };

// One row per (country, model) with RMSE and MAPE cells for the test split
// and each horizon, columns in the fixed order Test, 2, 4, ... Markdown cells
// are shown at 2 decimals; CSV keeps full precision.
std::string render_report(const MetricsReport& report, ReportFormat format);

// Externally published benchmark scores for the four countries at the default
// horizon grid, for side-by-side comparison in rendered reports.
std::vector<ReportRow> reference_rows();

// Long-format `date,actual,predicted` CSV at full precision.
void emit_plot_series(const std::vector<std::string>& dates, std::span<const double> actuals,
                      std::span<const double> predicted, const std::filesystem::path& file);

}  // namespace attnfc
