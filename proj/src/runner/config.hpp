#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "data/jhu.hpp"
#include "data/pipeline.hpp"
#include "eval/metrics.hpp"
#include "nn/model.hpp"
#include "train/trainer.hpp"

namespace attnfc {

// Everything one reproducible run needs. Populated from defaults, then a
// config file, then command-line overrides, in that order.
struct RunConfig {
  std::filesystem::path data_dir;  // empty: $ATTNFC_DATA_DIR, else "data/jhu"
  std::string confirmed_csv = "time_series_covid19_confirmed_global.csv";
  std::string recovered_csv = "time_series_covid19_recovered_global.csv";
  std::string deaths_csv = "time_series_covid19_deaths_global.csv";
  std::vector<std::string> countries = {"Italy", "Spain", "Canada", "France"};
  Date window_start = Date{std::chrono::year{2020}, std::chrono::month{2}, std::chrono::day{21}};
  Date window_end = Date{std::chrono::year{2020}, std::chrono::month{9}, std::chrono::day{12}};
  SplitSpec split;
  ModelConfig model;
  TrainConfig train;
  HorizonSpec horizons;
  std::filesystem::path out_dir = "out";
  std::size_t jobs = 1;

  void validate() const;
  std::filesystem::path resolved_data_dir() const;
  std::filesystem::path confirmed_path() const { return resolved_data_dir() / confirmed_csv; }
  std::filesystem::path recovered_path() const { return resolved_data_dir() / recovered_csv; }
  std::filesystem::path deaths_path() const { return resolved_data_dir() / deaths_csv; }
};

// Minimal TOML-style document: [section] headers, key = value lines, values
// being quoted strings, numbers, booleans or flat arrays of those; # starts a
// comment. Keys map to RunConfig fields as section.key.
RunConfig load_run_config(const std::filesystem::path& file);

// One dotted-key override, e.g. apply_override(c, "train.seed", "42").
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace attnfc
