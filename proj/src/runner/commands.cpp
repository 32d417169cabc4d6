#include "runner/commands.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "core/errors.hpp"
#include "data/jhu.hpp"
#include "data/pipeline.hpp"
#include "eval/metrics.hpp"
#include "eval/report.hpp"
#include "nn/model.hpp"
#include "train/checkpoint.hpp"
#include "train/trainer.hpp"

namespace attnfc {
namespace {

namespace fs = std::filesystem;

std::string fixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

int status_from(std::size_t failed, std::size_t total) {
  if (failed == 0) return kRunOk;
  return failed == total ? kRunFailed : kRunPartial;
}

std::ofstream open_out(const fs::path& file) {
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  return out;
}

void finish_out(std::ofstream& out, const fs::path& file) {
  out.flush();
  if (!out) throw IoError("failed writing " + file.string());
}

std::string checkpoint_name(ModelMode mode) {
  return mode == ModelMode::kAttentionLstm ? "checkpoint.json"
                                           : "checkpoint_" + to_string(mode) + ".json";
}

std::string losses_name(ModelMode mode) {
  return mode == ModelMode::kAttentionLstm ? "losses.csv"
                                           : "losses_" + to_string(mode) + ".csv";
}

// Runs `work(i, item_log)` for every configured country, `jobs`-wide. Each
// item logs into its own buffer so the combined log comes out in country
// order no matter how the threads interleave; a thrown Error fails only that
// item. Returns the number of failures.
std::size_t for_each_country(const RunConfig& config, std::ostream& log,
                             const std::function<void(std::size_t, std::ostream&)>& work) {
  const std::size_t n = config.countries.size();
  std::vector<std::ostringstream> item_logs(n);
  std::vector<std::string> item_errors(n);
  auto run_item = [&](std::size_t i) {
    try {
      work(i, item_logs[i]);
    } catch (const std::exception& e) {
      item_errors[i] = e.what();
    }
  };

  const std::size_t workers = std::min(config.jobs, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_item(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_item(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  std::size_t failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    log << item_logs[i].str();
    if (!item_errors[i].empty()) {
      ++failed;
      log << "error: " << config.countries[i] << ": " << item_errors[i] << "\n";
    }
  }
  return failed;
}

struct JhuTables {
  JhuTable confirmed, recovered, deaths;
};

JhuTables load_tables(const RunConfig& config) {
  return {parse_jhu_csv(config.confirmed_path()), parse_jhu_csv(config.recovered_path()),
          parse_jhu_csv(config.deaths_path())};
}

void write_stats_csv(const std::string& country, const Stats& s, const fs::path& file) {
  std::ofstream out = open_out(file);
  out << "country,mean,std,min,max,skewness,kurtosis\n";
  out << country << "," << format_double(s.mean) << "," << format_double(s.std_dev) << ","
      << format_double(s.min) << "," << format_double(s.max) << "," << format_double(s.skewness)
      << "," << format_double(s.kurtosis) << "\n";
  finish_out(out, file);
}

// Everything evaluate/forecast/train derive from one ingested series. The
// scaler is fit on the rows a training sample can see (inputs and targets of
// the train split) and nothing later.
struct PreparedData {
  RawSeries series;
  ScalerParams scaler;
  Tensor scaled;  // [N x 3]
  SplitResult split;
  std::size_t test_boundary = 0;  // row index of the first test-split target
};

PreparedData prepare_country(const RunConfig& config, const std::string& country) {
  PreparedData d;
  d.series = load_series_csv(config.out_dir / country_slug(country) / "series.csv", country);

  const Tensor raw = feature_matrix(d.series);
  const std::size_t lookback = config.model.lookback;
  if (raw.rows() <= lookback) {
    throw ContractError(country + ": " + std::to_string(raw.rows()) +
                        " days cannot fill a lookback-" + std::to_string(lookback) + " window");
  }
  const std::size_t samples = raw.rows() - lookback;
  const auto n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(samples) * config.split.train));
  const std::size_t fit_rows = n_train + lookback;
  Tensor train_region({fit_rows, raw.cols()});
  for (std::size_t r = 0; r < fit_rows; ++r) {
    for (std::size_t c = 0; c < raw.cols(); ++c) train_region.at(r, c) = raw.at(r, c);
  }
  // recovered and deaths may legitimately sit at a constant (e.g. substituted
  // zeros); a flat target channel is still an error
  d.scaler = fit_scaler(train_region, {0, 1, 1});
  d.scaled = scale(d.scaler, raw);
  d.split = chronological_split(make_windows(d.scaled, lookback), config.split);
  d.test_boundary = d.split.train.size() + d.split.validation.size() + lookback;
  return d;
}

Forecaster load_model(const RunConfig& config, const std::string& country, ModelMode mode) {
  if (mode == ModelMode::kPersistence) {
    ModelConfig mc = config.model;
    mc.mode = ModelMode::kPersistence;
    return Forecaster::init(mc, config.train.seed);
  }
  const fs::path file = config.out_dir / country_slug(country) / checkpoint_name(mode);
  LoadedCheckpoint loaded = load_checkpoint(file);
  if (loaded.model.config.mode != mode) {
    throw ContractError(file.string() + ": holds a " + to_string(loaded.model.config.mode) +
                        " model, expected " + to_string(mode));
  }
  if (loaded.model.config.lookback != config.model.lookback ||
      loaded.model.config.feature_count != config.model.feature_count) {
    throw ContractError(file.string() + ": window shape " +
                        std::to_string(loaded.model.config.lookback) + "x" +
                        std::to_string(loaded.model.config.feature_count) +
                        " does not match the configured " +
                        std::to_string(config.model.lookback) + "x" +
                        std::to_string(config.model.feature_count));
  }
  return loaded.model;
}

void write_attention_trace(const ForecastPath& path, const fs::path& file) {
  std::ofstream out = open_out(file);
  out << "step,row,dim,weight\n";
  for (std::size_t k = 0; k < path.attention_weights.size(); ++k) {
    const Tensor& w = path.attention_weights[k];
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        out << (k + 1) << "," << r << "," << c << "," << format_double(w.at(r, c)) << "\n";
      }
    }
  }
  finish_out(out, file);
}

ForecastPath horizon_path(const Forecaster& model, const PreparedData& d, std::size_t horizon) {
  const std::size_t lookback = model.config.lookback;
  const std::size_t base = d.test_boundary - lookback;
  Tensor seed({lookback, model.config.feature_count});
  for (std::size_t r = 0; r < lookback; ++r) {
    for (std::size_t c = 0; c < model.config.feature_count; ++c) {
      seed.at(r, c) = d.scaled.at(base + r, c);
    }
  }
  return forecast_recursive(model, seed, window_times(static_cast<double>(base), lookback),
                            horizon);
}

}  // namespace

std::string country_slug(const std::string& country) {
  std::string slug;
  for (char c : country) {
    slug += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  }
  return slug;
}

int run_ingest(const RunConfig& config, std::ostream& log) {
  config.validate();
  const JhuTables tables = load_tables(config);

  std::size_t failed = for_each_country(config, log, [&](std::size_t i, std::ostream& item_log) {
    const std::string& country = config.countries[i];
    std::vector<std::string> warnings;
    RawSeries series = build_series(tables.confirmed, tables.recovered, tables.deaths, country,
                                    config.window_start, config.window_end, warnings);
    for (const std::string& w : warnings) item_log << "warning: " << w << "\n";

    const fs::path dir = config.out_dir / country_slug(country);
    std::error_code ec;
    fs::create_directories(dir, ec);
    save_series_csv(series, dir / "series.csv");
    write_stats_csv(country, descriptive_stats(series.confirmed), dir / "stats.csv");
    item_log << country << ": " << series.size() << " days "
             << date_to_string(series.dates.front()) << ".." << date_to_string(series.dates.back())
             << " -> " << dir.string() << "\n";
  });
  return status_from(failed, config.countries.size());
}

int run_stats(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  const JhuTables tables = load_tables(config);

  std::vector<std::pair<std::string, Stats>> rows(config.countries.size());
  std::size_t failed = for_each_country(config, log, [&](std::size_t i, std::ostream& item_log) {
    const std::string& country = config.countries[i];
    std::vector<std::string> warnings;
    RawSeries series = build_series(tables.confirmed, tables.recovered, tables.deaths, country,
                                    config.window_start, config.window_end, warnings);
    for (const std::string& w : warnings) item_log << "warning: " << w << "\n";
    rows[i] = {country, descriptive_stats(series.confirmed)};
  });

  out << "| country | mean | std | min | max | skewness | kurtosis |\n";
  out << "| --- | --- | --- | --- | --- | --- | --- |\n";
  for (const auto& [country, s] : rows) {
    if (country.empty()) continue;  // that country failed
    out << "| " << country << " | " << fixed2(s.mean) << " | " << fixed2(s.std_dev) << " | "
        << fixed2(s.min) << " | " << fixed2(s.max) << " | " << fixed2(s.skewness) << " | "
        << fixed2(s.kurtosis) << " |\n";
  }
  return status_from(failed, config.countries.size());
}

int run_train(const RunConfig& config, std::ostream& log) {
  config.validate();

  std::size_t failed = for_each_country(config, log, [&](std::size_t i, std::ostream& item_log) {
    const std::string& country = config.countries[i];
    const PreparedData d = prepare_country(config, country);
    const fs::path dir = config.out_dir / country_slug(country);

    for (ModelMode mode : {ModelMode::kAttentionLstm, ModelMode::kPlainLstm}) {
      ModelConfig mc = config.model;
      mc.mode = mode;
      Forecaster model = Forecaster::init(mc, config.train.seed);
      TrainResult result = train(model, d.split.train, d.split.validation, config.train);

      save_checkpoint(result.best_model,
                      {result.best_epoch, result.best_val_loss, config.train.seed},
                      dir / checkpoint_name(mode));

      const fs::path losses = dir / losses_name(mode);
      std::ofstream out = open_out(losses);
      out << "epoch,train_mse,validation_mse\n";
      for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
        out << (e + 1) << "," << format_double(result.train_loss[e]) << ","
            << format_double(result.val_loss[e]) << "\n";
      }
      finish_out(out, losses);

      item_log << country << " " << to_string(mode) << ": best epoch " << result.best_epoch
               << ", validation mse " << format_double(result.best_val_loss) << "\n";
    }
  });
  return status_from(failed, config.countries.size());
}

namespace {

struct EvalEntry {
  ReportRow row;
  std::string error;  // nonempty: the row is absent and this is why
};

struct CountryEval {
  std::vector<EvalEntry> entries;  // attention, plain, persistence in that order
  std::string window_start, window_end;
};

constexpr ModelMode kEvalModes[] = {ModelMode::kAttentionLstm, ModelMode::kPlainLstm,
                                    ModelMode::kPersistence};

CountryEval evaluate_country(const RunConfig& config, const std::string& country,
                             std::ostream& item_log) {
  CountryEval result;
  PreparedData d = prepare_country(config, country);
  result.window_start = date_to_string(d.series.dates.front());
  result.window_end = date_to_string(d.series.dates.back());
  const fs::path dir = config.out_dir / country_slug(country);

  for (ModelMode mode : kEvalModes) {
    EvalEntry entry;
    entry.row.country = country;
    entry.row.model = to_string(mode);
    try {
      Forecaster model = load_model(config, country, mode);
      entry.row.test = evaluate_test(model, d.split.test, d.scaler);
      for (std::size_t h : config.horizons.horizons) {
        entry.row.horizons.emplace_back(
            h, evaluate_horizon(model, d.scaled, d.scaler, d.test_boundary, h));
      }

      if (mode == ModelMode::kAttentionLstm) {
        // test-split overlay and per-horizon attention traces for inspection
        std::vector<double> scaled_pred = one_step_predictions(model, d.split.test);
        std::vector<std::string> dates;
        std::vector<double> actual, predicted;
        for (std::size_t j = 0; j < d.split.test.size(); ++j) {
          dates.push_back(date_to_string(d.series.dates[d.test_boundary + j]));
          actual.push_back(d.scaler.inverse_value(0, d.split.test.targets[j]));
          predicted.push_back(d.scaler.inverse_value(0, scaled_pred[j]));
        }
        emit_plot_series(dates, actual, predicted, dir / "plot_test.csv");
        for (std::size_t h : config.horizons.horizons) {
          write_attention_trace(horizon_path(model, d, h),
                                dir / "attention" / ("horizon_" + std::to_string(h) + ".csv"));
        }
      }
      item_log << country << " " << to_string(mode) << ": test rmse "
               << fixed2(entry.row.test.rmse) << ", mape " << fixed2(entry.row.test.mape)
               << "\n";
    } catch (const std::exception& e) {
      entry.error = e.what();
      item_log << country << " " << to_string(mode) << ": skipped (" << e.what() << ")\n";
    }
    result.entries.push_back(std::move(entry));
  }
  return result;
}

// Report body plus, when some entries failed, a trailing error section naming
// them. With nothing evaluated the files still appear, carrying only the
// errors, so a total failure leaves an explanation behind.
void write_report_files(const MetricsReport& report, const std::vector<std::string>& errors,
                        const fs::path& md_file, const fs::path& csv_file) {
  std::ofstream md = open_out(md_file);
  if (report.rows.empty()) {
    md << "# Forecast quality\n\nNo models could be evaluated.\n";
  } else {
    md << render_report(report, ReportFormat::kMarkdown);
  }
  if (!errors.empty()) {
    md << "\n## Errors\n\n";
    for (const std::string& e : errors) md << "- " << e << "\n";
  }
  finish_out(md, md_file);

  std::ofstream csv = open_out(csv_file);
  csv << (report.rows.empty() ? "country,model\n" : render_report(report, ReportFormat::kCsv));
  finish_out(csv, csv_file);
}

}  // namespace

int run_evaluate(const RunConfig& config, std::ostream& log) {
  config.validate();

  std::vector<CountryEval> evals(config.countries.size());
  std::vector<std::string> country_errors(config.countries.size());
  for_each_country(config, log, [&](std::size_t i, std::ostream& item_log) {
    try {
      evals[i] = evaluate_country(config, config.countries[i], item_log);
    } catch (const std::exception& e) {
      country_errors[i] = e.what();
      throw;
    }
  });

  const std::vector<ReportRow> reference = reference_rows();
  MetricsReport header;  // shared fields, no rows
  header.window_start = date_to_string(config.window_start);
  header.window_end = date_to_string(config.window_end);
  header.split = config.split;
  header.seed = config.train.seed;
  MetricsReport combined = header;
  std::vector<std::string> combined_errors;
  std::size_t failed_entries = 0;

  for (std::size_t i = 0; i < config.countries.size(); ++i) {
    const std::string& country = config.countries[i];
    MetricsReport per_country = header;
    std::vector<std::string> errors;

    if (!country_errors[i].empty()) {
      failed_entries += std::size(kEvalModes);
      errors.push_back(country + ": " + country_errors[i]);
    } else {
      per_country.window_start = evals[i].window_start;
      per_country.window_end = evals[i].window_end;
      for (const EvalEntry& entry : evals[i].entries) {
        if (entry.error.empty()) {
          per_country.rows.push_back(entry.row);
        } else {
          ++failed_entries;
          errors.push_back(country + " " + entry.row.model + ": " + entry.error);
        }
      }
    }
    for (const ReportRow& ref : reference) {
      if (ref.country == country) per_country.rows.push_back(ref);
    }

    if (country_errors[i].empty()) {
      write_report_files(per_country, errors, config.out_dir / country_slug(country) / "report.md",
                         config.out_dir / country_slug(country) / "report.csv");
    }
    combined.rows.insert(combined.rows.end(), per_country.rows.begin(), per_country.rows.end());
    combined_errors.insert(combined_errors.end(), errors.begin(), errors.end());
  }

  write_report_files(combined, combined_errors, config.out_dir / "report.md",
                     config.out_dir / "report.csv");
  log << "report -> " << (config.out_dir / "report.md").string() << "\n";
  return status_from(failed_entries, config.countries.size() * std::size(kEvalModes));
}

int run_forecast(const RunConfig& config, const std::string& country, std::size_t horizon,
                 ForecastResult* result, std::ostream& log) {
  config.validate();
  if (country.empty()) throw ConfigError("forecast: a country must be selected");
  if (horizon < 1) throw ConfigError("forecast: horizon must be at least 1");

  const PreparedData d = prepare_country(config, country);
  const Forecaster model = load_model(config, country, config.model.mode);

  const std::size_t lookback = config.model.lookback;
  const std::size_t base = d.scaled.rows() - lookback;
  Tensor seed({lookback, config.model.feature_count});
  for (std::size_t r = 0; r < lookback; ++r) {
    for (std::size_t c = 0; c < config.model.feature_count; ++c) {
      seed.at(r, c) = d.scaled.at(base + r, c);
    }
  }
  ForecastPath path = forecast_recursive(model, seed,
                                         window_times(static_cast<double>(base), lookback),
                                         horizon);

  const fs::path dir = config.out_dir / country_slug(country);
  const fs::path file = dir / "forecast.csv";
  std::ofstream out = open_out(file);
  out << "date,predicted\n";
  ForecastResult local;
  auto day = std::chrono::sys_days(d.series.dates.back());
  for (std::size_t k = 0; k < horizon; ++k) {
    day += std::chrono::days(1);
    const std::string date = date_to_string(Date{std::chrono::floor<std::chrono::days>(day)});
    const double value = d.scaler.inverse_value(0, path.predictions[k]);
    out << date << "," << format_double(value) << "\n";
    local.dates.push_back(date);
    local.predictions.push_back(value);
  }
  finish_out(out, file);

  if (config.model.mode == ModelMode::kAttentionLstm) {
    write_attention_trace(path, dir / "attention" / "forecast_trace.csv");
  }
  log << country << ": " << horizon << "-day " << to_string(config.model.mode) << " forecast from "
      << local.dates.front() << " -> " << file.string() << "\n";
  if (result != nullptr) *result = std::move(local);
  return kRunOk;
}

}  // namespace attnfc
