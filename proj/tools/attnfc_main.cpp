// Command-line front end. Everything goes through the C API so this binary
// doubles as a living example of driving the shared library.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "attnfc/attnfc.h"

namespace {

struct ConfigDeleter {
  void operator()(attnfc_config* c) const { attnfc_config_free(c); }
};
using ConfigHandle = std::unique_ptr<attnfc_config, ConfigDeleter>;

struct CliOptions {
  std::string config_file, country, out_dir;
  std::int64_t seed = 0;
  int horizon = 14;
  int jobs = 0;
  bool have_seed = false, have_jobs = false;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt, bool seed_required) {
  cmd->add_option("--config", opt.config_file, "configuration file (TOML-style)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out_dir, "output directory root");
  cmd->add_option("--jobs", opt.jobs, "parallel worker count")
      ->check(CLI::PositiveNumber)
      ->each([&](const std::string&) { opt.have_jobs = true; });
  CLI::Option* seed = cmd->add_option("--seed", opt.seed, "run seed")
                          ->check(CLI::NonNegativeNumber)
                          ->each([&](const std::string&) { opt.have_seed = true; });
  if (seed_required) seed->required();
}

// Build the handle from defaults or --config, then layer the flag overrides
// on top. Returns null after printing the reason.
ConfigHandle build_config(const CliOptions& opt) {
  ConfigHandle config(opt.config_file.empty() ? attnfc_config_create()
                                              : attnfc_config_load(opt.config_file.c_str()));
  if (!config) {
    std::fprintf(stderr, "attnfc: %s\n", attnfc_last_error());
    return nullptr;
  }
  auto set = [&](const char* key, const std::string& value) {
    if (attnfc_config_set(config.get(), key, value.c_str()) != ATTNFC_OK) {
      std::fprintf(stderr, "attnfc: %s\n", attnfc_last_error());
      return false;
    }
    return true;
  };
  if (!opt.out_dir.empty() && !set("output.dir", opt.out_dir)) return nullptr;
  if (opt.have_jobs && !set("jobs", std::to_string(opt.jobs))) return nullptr;
  if (opt.have_seed && !set("train.seed", std::to_string(opt.seed))) return nullptr;
  if (!opt.country.empty() && !set("data.countries", opt.country)) return nullptr;
  return config;
}

// Shared-library statuses map straight onto exit codes except INTERNAL,
// which the shell contract folds into the generic failure code.
int finish(int rc) {
  if (rc >= ATTNFC_INPUT && attnfc_last_error()[0] != '\0') {
    std::fprintf(stderr, "attnfc: %s\n", attnfc_last_error());
  }
  return rc > ATTNFC_INPUT ? ATTNFC_INPUT : rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attention-based sequence forecasting over JHU CSSE case counts"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* ingest =
      app.add_subcommand("ingest", "window and aggregate the raw tables per country");
  add_common_flags(ingest, opt, false);
  ingest->add_option("--country", opt.country, "restrict to one country");

  CLI::App* stats = app.add_subcommand("stats", "print per-country descriptive statistics");
  add_common_flags(stats, opt, false);
  stats->add_option("--country", opt.country, "restrict to one country");

  CLI::App* train =
      app.add_subcommand("train", "train both LSTM variants on the ingested series");
  add_common_flags(train, opt, true);
  train->add_option("--country", opt.country, "restrict to one country");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score trained models against the baseline");
  add_common_flags(evaluate, opt, true);
  evaluate->add_option("--country", opt.country, "restrict to one country");

  CLI::App* forecast =
      app.add_subcommand("forecast", "predict past the end of the ingested series");
  add_common_flags(forecast, opt, false);
  forecast->add_option("--country", opt.country, "country to forecast")->required();
  forecast->add_option("--horizon", opt.horizon, "days to forecast")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : ATTNFC_INPUT;  // usage problems exit 2
  }

  ConfigHandle config = build_config(opt);
  if (!config) return ATTNFC_INPUT;

  if (ingest->parsed()) return finish(attnfc_run_ingest(config.get()));
  if (stats->parsed()) return finish(attnfc_run_stats(config.get()));
  if (train->parsed()) return finish(attnfc_run_train(config.get()));
  if (evaluate->parsed()) return finish(attnfc_run_evaluate(config.get()));
  return finish(attnfc_run_forecast(config.get(), opt.country.c_str(), opt.horizon, nullptr, 0,
                                    nullptr));
}
