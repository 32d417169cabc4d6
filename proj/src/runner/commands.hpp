#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "runner/config.hpp"

namespace attnfc {

// Shared exit statuses: everything worked, some per-country work failed, or
// nothing usable was produced (also used for bad input).
inline constexpr int kRunOk = 0;
inline constexpr int kRunPartial = 1;
inline constexpr int kRunFailed = 2;

// Directory-safe form of a country name, used under the output root.
std::string country_slug(const std::string& country);

// Reads the three JHU tables and writes, per country, the windowed series and
// its descriptive statistics under <out>/<country>/. Countries fail
// independently; the returned status reflects how many made it.
int run_ingest(const RunConfig& config, std::ostream& log);

// Prints the per-country statistics table for the configured window to `out`;
// touches nothing on disk.
int run_stats(const RunConfig& config, std::ostream& out, std::ostream& log);

// Trains the attention and plain LSTM variants for every country from the
// ingested series, snapshotting the best-validation parameters per variant
// along with the per-epoch loss curves. A country that aborts is reported and
// skipped, the rest continue.
int run_train(const RunConfig& config, std::ostream& log);

// Scores every (country, model) pair on the held-out split: one-step test
// metrics plus the configured recursive horizons, against the persistence
// baseline, with published reference rows alongside. Writes per-country and
// combined reports; entries with missing checkpoints are recorded as errors
// inside the report and only sink the exit status when nothing succeeds.
int run_evaluate(const RunConfig& config, std::ostream& log);

struct ForecastResult {
  std::vector<std::string> dates;   // ISO, starting the day after the series ends
  std::vector<double> predictions;  // raw counts
};

// Rolls the configured model forward `horizon` days past the end of the
// ingested series for one country and writes <out>/<country>/forecast.csv
// (plus attention traces when the model has them). `result` may be null.
int run_forecast(const RunConfig& config, const std::string& country, std::size_t horizon,
                 ForecastResult* result, std::ostream& log);

}  // namespace attnfc
