#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace attnfc {

using Date = std::chrono::year_month_day;

Date parse_mdy(const std::string& text);    // JHU header form, M/D/YY
Date parse_iso_date(const std::string& text);  // YYYY-MM-DD
std::string date_to_string(Date d);            // ISO form

struct JhuRow {
  std::string province;
  std::string country;
  double lat = 0.0;
  double lon = 0.0;
  std::vector<double> values;  // one per date column, cumulative
};

struct JhuTable {
  std::vector<Date> dates;
  std::vector<JhuRow> rows;
};

// Reads one JHU CSSE global time-series file: a
// `Province/State,Country/Region,Lat,Long` header followed by M/D/YY date
// columns, fields possibly quoted. Errors carry 1-based row/column locations.
JhuTable parse_jhu_csv(const std::filesystem::path& file);

struct AggregatedSeries {
  std::string country;
  std::vector<Date> dates;
  std::vector<double> values;
};

// Per-date sum over every province row of `country`.
AggregatedSeries aggregate_country(const JhuTable& table, const std::string& country);

struct RawSeries {
  std::string country;
  std::vector<Date> dates;  // strictly increasing, daily
  std::vector<double> confirmed, recovered, deaths;

  std::size_t size() const { return dates.size(); }
};

// Assembles the three cumulative channels for one country over [start, end]
// inclusive. A country absent from the recovered table gets zeros; decreasing
// stretches (upstream corrections) are reported as warnings, not failures.
RawSeries build_series(const JhuTable& confirmed, const JhuTable& recovered,
                       const JhuTable& deaths, const std::string& country, Date start, Date end,
                       std::vector<std::string>& warnings);

// `date,confirmed,recovered,deaths` rows, one per day.
void save_series_csv(const RawSeries& series, const std::filesystem::path& file);
RawSeries load_series_csv(const std::filesystem::path& file, const std::string& country);

}  // namespace attnfc
