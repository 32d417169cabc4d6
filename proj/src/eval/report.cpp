#include "eval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "core/errors.hpp"

namespace attnfc {

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw ContractError("format_double: value does not fit");
  return std::string(buf, ptr);
}

namespace {

std::string two_decimals(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

void check_report(const MetricsReport& report) {
  if (report.rows.empty()) throw ContractError("render_report: no rows");
  for (const ReportRow& row : report.rows) {
    for (std::size_t i = 1; i < row.horizons.size(); ++i) {
      if (row.horizons[i].first <= row.horizons[i - 1].first) {
        throw ContractError("render_report: horizons out of order for " + row.country + "/" +
                            row.model);
      }
    }
  }
}

std::vector<std::size_t> horizon_columns(const MetricsReport& report) {
  // the union over rows, ascending; rows missing a horizon render empty cells
  std::vector<std::size_t> cols;
  for (const ReportRow& row : report.rows) {
    for (const auto& [h, score] : row.horizons) {
      bool present = false;
      for (std::size_t c : cols) present = present || c == h;
      if (!present) cols.push_back(h);
    }
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

const Score* find_horizon(const ReportRow& row, std::size_t h) {
  for (const auto& [steps, score] : row.horizons) {
    if (steps == h) return &score;
  }
  return nullptr;
}

}  // namespace

std::string render_report(const MetricsReport& report, ReportFormat format) {
  check_report(report);
  const std::vector<std::size_t> cols = horizon_columns(report);
  std::ostringstream out;

  if (format == ReportFormat::kCsv) {
    out << "country,model";
    for (const char* metric : {"rmse", "mape"}) {
      out << "," << metric << "_test";
      for (std::size_t h : cols) out << "," << metric << "_" << h;
    }
    out << "\n";
    for (const ReportRow& row : report.rows) {
      out << row.country << "," << row.model;
      for (bool use_rmse : {true, false}) {
        out << "," << format_double(use_rmse ? row.test.rmse : row.test.mape);
        for (std::size_t h : cols) {
          const Score* s = find_horizon(row, h);
          out << ",";
          if (s) out << format_double(use_rmse ? s->rmse : s->mape);
        }
      }
      out << "\n";
    }
    return out.str();
  }

  out << "# Forecast quality\n\n";
  out << "Window " << report.window_start << " .. " << report.window_end << ", split "
      << format_double(report.split.train) << "/" << format_double(report.split.validation)
      << "/" << format_double(report.split.test) << ", seed " << report.seed << ".\n";
  out << "RMSE in cumulative case counts, MAPE in percent; steps are recursive\n"
         "forecast days past the training+validation boundary.\n\n";
  out << "| Country | Model | Metric | Test |";
  for (std::size_t h : cols) out << " " << h << " |";
  out << "\n|---|---|---|---|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "---|";
  out << "\n";
  for (const ReportRow& row : report.rows) {
    for (bool use_rmse : {true, false}) {
      out << "| " << row.country << " | " << row.model << " | " << (use_rmse ? "RMSE" : "MAPE")
          << " | " << two_decimals(use_rmse ? row.test.rmse : row.test.mape) << " |";
      for (std::size_t h : cols) {
        const Score* s = find_horizon(row, h);
        out << " " << (s ? two_decimals(use_rmse ? s->rmse : s->mape) : "-") << " |";
      }
      out << "\n";
    }
  }
  return out.str();
}

std::vector<ReportRow> reference_rows() {
  auto row = [](const char* country, const char* model, std::initializer_list<double> cells) {
    ReportRow r;
    r.country = country;
    r.model = model;
    auto it = cells.begin();
    r.test = {it[0], it[1]};
    const std::size_t steps[] = {2, 4, 6, 8, 10, 12, 14};
    for (std::size_t k = 0; k < 7; ++k) {
      r.horizons.emplace_back(steps[k], Score{it[2 + 2 * k], it[3 + 2 * k]});
    }
    return r;
  };
  return {
      row("Italy", "lstm (reference)",
          {312.10, 2.01, 339.09, 2.38, 451.34, 4.06, 538.41, 4.22, 711.05, 6.09, 893.25, 7.22,
           973.78, 6.75, 1174.56, 7.98}),
      row("Italy", "attention_lstm (reference)",
          {209.23, 1.71, 217.49, 1.86, 576.97, 4.21, 479.07, 4.12, 606.40, 5.96, 678.70, 6.02,
           692.52, 6.18, 689.84, 7.07}),
      row("Spain", "lstm (reference)",
          {290.23, 2.29, 378.11, 3.04, 381.44, 2.71, 417.61, 2.89, 514.57, 3.28, 601.15, 4.00,
           718.09, 4.99, 1039.90, 7.03}),
      row("Spain", "attention_lstm (reference)",
          {281.03, 2.11, 299.42, 2.42, 293.61, 2.48, 321.26, 2.51, 471.89, 3.19, 493.11, 3.20,
           617.16, 3.89, 919.27, 6.67}),
      row("Canada", "lstm (reference)",
          {13.82, 0.12, 15.76, 0.14, 19.97, 0.16, 22.55, 0.20, 26.33, 0.22, 32.14, 0.25, 37.04,
           0.29, 46.03, 0.43}),
      row("Canada", "attention_lstm (reference)",
          {12.46, 0.11, 12.67, 0.13, 16.04, 0.14, 18.09, 0.16, 21.96, 0.19, 24.37, 0.21, 26.20,
           0.22, 36.20, 0.28}),
      row("France", "lstm (reference)",
          {201.49, 1.73, 213.77, 1.74, 397.01, 4.26, 217.79, 1.82, 309.14, 2.17, 499.71, 3.59,
           702.83, 5.56, 892.74, 6.03}),
      row("France", "attention_lstm (reference)",
          {163.78, 1.21, 167.36, 1.34, 496.55, 4.61, 174.70, 1.40, 226.64, 1.74, 433.40, 3.14,
           671.82, 5.16, 711.69, 5.75}),
  };
}

void emit_plot_series(const std::vector<std::string>& dates, std::span<const double> actuals,
                      std::span<const double> predicted, const std::filesystem::path& file) {
  if (dates.size() != actuals.size() || dates.size() != predicted.size()) {
    throw ContractError("emit_plot_series: misaligned lengths (" + std::to_string(dates.size()) +
                        " dates, " + std::to_string(actuals.size()) + " actuals, " +
                        std::to_string(predicted.size()) + " predictions)");
  }
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "date,actual,predicted\n";
  for (std::size_t i = 0; i < dates.size(); ++i) {
    out << dates[i] << "," << format_double(actuals[i]) << "," << format_double(predicted[i])
        << "\n";
  }
  if (!out) throw IoError("failed writing " + file.string());
}

}  // namespace attnfc
