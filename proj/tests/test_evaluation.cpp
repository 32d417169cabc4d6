#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "data/pipeline.hpp"
#include "doctest.h"
#include "eval/metrics.hpp"
#include "eval/report.hpp"
#include "nn/model.hpp"

using namespace attnfc;
namespace fs = std::filesystem;

namespace {

ScalerParams identity_scaler(std::size_t features) {
  ScalerParams p;
  p.min_v.assign(features, -1.0);
  p.max_v.assign(features, 1.0);
  return p;
}

ModelConfig persistence_config(std::size_t lookback, std::size_t features) {
  ModelConfig c;
  c.lookback = lookback;
  c.feature_count = features;
  c.mode = ModelMode::kPersistence;
  return c;
}

}  // namespace

TEST_CASE("rmse hand values and contract") {
  std::vector<double> y = {100, 200};
  std::vector<double> perfect = y;
  CHECK(rmse(y, perfect) == 0.0);
  CHECK(rmse(y, std::vector<double>{110, 190}) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(rmse(std::vector<double>{5}, std::vector<double>{2}) == 3.0);
  CHECK_THROWS_AS(rmse(y, std::vector<double>{1}), ContractError);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), ContractError);
}

TEST_CASE("mape hand values and zero-target rejection") {
  std::vector<double> y = {100, 200};
  CHECK(mape(y, y) == 0.0);
  CHECK(mape(y, std::vector<double>{110, 190}) == doctest::Approx(7.5).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(mape(std::vector<double>{100, 0, 50}, std::vector<double>{1, 2, 3}),
                       doctest::Contains("index 1"), ContractError);
}

TEST_CASE("metric algebra: zero iff equal, pair symmetry, scaling") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> y(6), p(6);
    for (std::size_t i = 0; i < 6; ++i) {
      y[i] = rng.uniform(1.0, 100.0);
      p[i] = rng.uniform(1.0, 100.0);
    }
    CHECK(rmse(y, p) > 0.0);  // generically distinct

    // permuting the (y, p) pairs together leaves both metrics unchanged
    std::vector<double> y_perm = {y[3], y[1], y[5], y[0], y[2], y[4]};
    std::vector<double> p_perm = {p[3], p[1], p[5], p[0], p[2], p[4]};
    CHECK(rmse(y_perm, p_perm) == doctest::Approx(rmse(y, p)).epsilon(1e-12));
    CHECK(mape(y_perm, p_perm) == doctest::Approx(mape(y, p)).epsilon(1e-12));

    const double c = rng.uniform(0.5, 3.0);
    std::vector<double> yc = y, pc = p;
    for (std::size_t i = 0; i < 6; ++i) {
      yc[i] *= c;
      pc[i] *= c;
    }
    CHECK(rmse(yc, pc) == doctest::Approx(c * rmse(y, p)).epsilon(1e-9));
    CHECK(mape(yc, pc) == doctest::Approx(mape(y, p)).epsilon(1e-9));
  }
}

TEST_CASE("horizon spec validation") {
  HorizonSpec spec;
  spec.validate();  // default grid is fine
  spec.horizons = {2, 2, 4};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.horizons = {};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.horizons = {0, 1};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("persistence on a constant series has zero test rmse") {
  Tensor rows({12, 1});
  for (std::size_t i = 0; i < 12; ++i) rows[i] = 0.5;
  WindowedDataset ds = make_windows(rows, 4);
  Forecaster m = Forecaster::init(persistence_config(4, 1), 0);
  Score s = evaluate_test(m, ds, identity_scaler(1));
  CHECK(s.rmse == 0.0);
  CHECK(s.mape == 0.0);
}

TEST_CASE("persistence on a daily ramp scores the slope") {
  Tensor rows({20, 1});
  for (std::size_t i = 0; i < 20; ++i) rows[i] = 10.0 + 0.1 * static_cast<double>(i);
  WindowedDataset ds = make_windows(rows, 4);
  Forecaster m = Forecaster::init(persistence_config(4, 1), 0);
  Score s = evaluate_test(m, ds, identity_scaler(1));
  CHECK(s.rmse == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(s.mape > 0.0);
}

TEST_CASE("test metrics come out in raw case counts") {
  // fit range 0..1e6: scaled differences are tiny, raw differences are not
  Tensor raw({30, 1});
  for (std::size_t i = 0; i < 30; ++i) raw[i] = 1e6 * static_cast<double>(i) / 29.0;
  raw[0] = 10.0;  // keep targets nonzero after windowing
  ScalerParams p = fit_scaler(raw);
  WindowedDataset ds = make_windows(scale(p, raw), 4);
  Forecaster m = Forecaster::init(persistence_config(4, 1), 0);
  Score s = evaluate_test(m, ds, p);
  CHECK(s.rmse > 1000.0);
}

TEST_CASE("horizon evaluation of persistence matches the closed form") {
  Tensor rows({16, 1});
  for (std::size_t i = 0; i < 16; ++i) rows[i] = 2.0 * static_cast<double>(i + 1);
  Forecaster m = Forecaster::init(persistence_config(4, 1), 0);
  Score s = evaluate_horizon(m, rows, identity_scaler(1), 10, 3);
  // last observed 20; actuals 22, 24, 26; errors 2, 4, 6
  CHECK(s.rmse == doctest::Approx(std::sqrt((4.0 + 16.0 + 36.0) / 3.0)).epsilon(1e-12));
  CHECK(s.mape ==
        doctest::Approx(100.0 * (2.0 / 22.0 + 4.0 / 24.0 + 6.0 / 26.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("horizon one equals a single manual prediction") {
  ModelConfig cfg;
  cfg.lookback = 4;
  cfg.encoder1_size = 5;
  cfg.encoder2_size = 3;
  cfg.time2vec_l = 2;
  cfg.feature_count = 1;
  Forecaster m = Forecaster::init(cfg, 77);

  Tensor rows({14, 1});
  for (std::size_t i = 0; i < 14; ++i) rows[i] = -1.0 + 0.1 * static_cast<double>(i);
  ScalerParams scaler = identity_scaler(1);
  const std::size_t boundary = 11;

  Score s = evaluate_horizon(m, rows, scaler, boundary, 1);

  Tensor window({4, 1});
  for (std::size_t r = 0; r < 4; ++r) window[r] = rows[boundary - 4 + r];
  Graph g;
  Rng rng(0);
  ForecasterNodes nodes = bind(g, m);
  double y = g.value(predict_one(g, nodes, cfg, window,
                                 window_times(static_cast<double>(boundary - 4), 4), Mode::kEval,
                                 rng)
                         .y)[0];
  CHECK(s.rmse == doctest::Approx(std::fabs(rows[boundary] - y)).epsilon(1e-12));
}

TEST_CASE("horizon evaluation never reads held-out exogenous data") {
  ModelConfig cfg;
  cfg.lookback = 4;
  cfg.encoder1_size = 5;
  cfg.encoder2_size = 3;
  cfg.time2vec_l = 2;
  cfg.feature_count = 3;
  Forecaster m = Forecaster::init(cfg, 5);

  Tensor rows({15, 3});
  Rng rng(6);
  const std::size_t boundary = 10;
  for (std::size_t i = 0; i < 15; ++i) {
    rows.at(i, 0) = -0.9 + 0.1 * static_cast<double>(i);
    // poison post-boundary exogenous cells: any leak turns the forecast NaN
    const bool held_out = i >= boundary;
    rows.at(i, 1) = held_out ? std::nan("") : rng.uniform(-1.0, 1.0);
    rows.at(i, 2) = held_out ? std::nan("") : rng.uniform(-1.0, 1.0);
  }
  Score s = evaluate_horizon(m, rows, identity_scaler(3), boundary, 5);
  CHECK(std::isfinite(s.rmse));
  CHECK(std::isfinite(s.mape));
}

TEST_CASE("horizon evaluation rejects short series") {
  Tensor rows({12, 1});
  for (std::size_t i = 0; i < 12; ++i) rows[i] = static_cast<double>(i + 1);
  Forecaster m = Forecaster::init(persistence_config(4, 1), 0);
  CHECK_THROWS_WITH_AS(evaluate_horizon(m, rows, identity_scaler(1), 10, 6),
                       doctest::Contains("need 16"), ContractError);
  CHECK_THROWS_AS(evaluate_horizon(m, rows, identity_scaler(1), 2, 3), ContractError);
  CHECK_THROWS_AS(evaluate_horizon(m, rows, identity_scaler(1), 10, 0), ContractError);
}

TEST_CASE("reports render in both formats with fixed columns") {
  MetricsReport report;
  report.window_start = "2020-02-21";
  report.window_end = "2020-09-12";
  report.seed = 42;
  ReportRow row;
  row.country = "Atlantis";
  row.model = "attention_lstm";
  row.test = {209.231234, 1.7149};
  const std::size_t steps[] = {2, 4, 6, 8, 10, 12, 14};
  for (std::size_t k = 0; k < 7; ++k) {
    row.horizons.emplace_back(steps[k], Score{100.0 + static_cast<double>(k), 1.0});
  }
  report.rows = {row};

  std::string md = render_report(report, ReportFormat::kMarkdown);
  CHECK(md.find("| Country | Model | Metric | Test | 2 | 4 | 6 | 8 | 10 | 12 | 14 |") !=
        std::string::npos);
  CHECK(md.find("| Atlantis | attention_lstm | RMSE | 209.23 |") != std::string::npos);
  CHECK(md.find("| Atlantis | attention_lstm | MAPE | 1.71 |") != std::string::npos);

  std::string csv = render_report(report, ReportFormat::kCsv);
  std::istringstream lines(csv);
  std::string header, data;
  std::getline(lines, header);
  std::getline(lines, data);
  CHECK(header ==
        "country,model,rmse_test,rmse_2,rmse_4,rmse_6,rmse_8,rmse_10,rmse_12,rmse_14,"
        "mape_test,mape_2,mape_4,mape_6,mape_8,mape_10,mape_12,mape_14");

  // 16 metric cells after the two label cells, full precision, re-parse exact
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream fields(data);
  while (std::getline(fields, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() == 18);
  double parsed = 0.0;
  auto [ptr, ec] = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), parsed);
  CHECK(ec == std::errc{});
  CHECK(parsed == 209.231234);

  CHECK_THROWS_AS(render_report(MetricsReport{}, ReportFormat::kCsv), ContractError);
}

TEST_CASE("bundled reference scores cover both models and all four countries") {
  std::vector<ReportRow> rows = reference_rows();
  REQUIRE(rows.size() == 8);
  CHECK(rows[1].country == "Italy");
  CHECK(rows[1].model == "attention_lstm (reference)");
  CHECK(rows[1].test.rmse == 209.23);
  CHECK(rows[1].horizons.back().first == 14);
  CHECK(rows[1].horizons.back().second.rmse == 689.84);
  CHECK(rows[4].country == "Canada");
  CHECK(rows[4].horizons.back().second.rmse == 46.03);
  for (const ReportRow& r : rows) REQUIRE(r.horizons.size() == 7);
}

TEST_CASE("plot series round-trips at full precision") {
  std::vector<std::string> dates;
  std::vector<double> actual, predicted;
  Rng rng(9);
  for (int i = 0; i < 14; ++i) {
    dates.push_back("2020-09-" + std::to_string(10 + i));
    actual.push_back(rng.uniform(1e5, 3e5));
    predicted.push_back(rng.uniform(1e5, 3e5));
  }
  fs::path file = fs::temp_directory_path() / "attnfc_plot.csv";
  emit_plot_series(dates, actual, predicted, file);

  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  CHECK(line == "date,actual,predicted");
  std::size_t count = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string d, a, p;
    std::getline(fields, d, ',');
    std::getline(fields, a, ',');
    std::getline(fields, p, ',');
    CHECK(d == dates[count]);
    double av = 0.0, pv = 0.0;
    std::from_chars(a.data(), a.data() + a.size(), av);
    std::from_chars(p.data(), p.data() + p.size(), pv);
    CHECK(av == actual[count]);
    CHECK(pv == predicted[count]);
    ++count;
  }
  CHECK(count == 14);

  CHECK_THROWS_AS(emit_plot_series(dates, actual, std::vector<double>{1.0}, file),
                  ContractError);
}
