#include "data/jhu.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "core/errors.hpp"

namespace attnfc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t row) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {  // escaped quote
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) {
    throw IngestError("row " + std::to_string(row) + ": unterminated quoted field");
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_cell(const std::string& text, std::size_t row, std::size_t col1) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw IngestError("row " + std::to_string(row) + ", column " + std::to_string(col1) +
                      ": cannot parse '" + text + "' as a number");
  }
  return value;
}

int parse_int_field(const std::string& text, const std::string& what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IngestError("cannot parse " + what + " '" + text + "'");
  }
  return value;
}

}  // namespace

Date parse_mdy(const std::string& text) {
  std::size_t a = text.find('/');
  std::size_t b = text.find('/', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw IngestError("date '" + text + "' is not in M/D/YY form");
  }
  int month = parse_int_field(text.substr(0, a), "month in date");
  int day = parse_int_field(text.substr(a + 1, b - a - 1), "day in date");
  int year = parse_int_field(text.substr(b + 1), "year in date");
  if (year < 100) year += 2000;
  Date d{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
         std::chrono::day{static_cast<unsigned>(day)}};
  if (!d.ok()) throw IngestError("date '" + text + "' is not a valid calendar date");
  return d;
}

Date parse_iso_date(const std::string& text) {
  std::size_t a = text.find('-');
  std::size_t b = text.find('-', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw IngestError("date '" + text + "' is not in YYYY-MM-DD form");
  }
  int year = parse_int_field(text.substr(0, a), "year in date");
  int month = parse_int_field(text.substr(a + 1, b - a - 1), "month in date");
  int day = parse_int_field(text.substr(b + 1), "day in date");
  Date d{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
         std::chrono::day{static_cast<unsigned>(day)}};
  if (!d.ok()) throw IngestError("date '" + text + "' is not a valid calendar date");
  return d;
}

std::string date_to_string(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

JhuTable parse_jhu_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());

  std::string line;
  if (!std::getline(in, line)) throw IngestError(file.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_csv_line(line, 1);
  if (header.size() < 5 || header[0] != "Province/State" || header[1] != "Country/Region" ||
      header[2] != "Lat" || header[3] != "Long") {
    throw IngestError(file.string() +
                      ": missing or malformed header (expected Province/State,Country/Region,"
                      "Lat,Long followed by date columns)");
  }

  JhuTable table;
  table.dates.reserve(header.size() - 4);
  for (std::size_t c = 4; c < header.size(); ++c) {
    try {
      table.dates.push_back(parse_mdy(header[c]));
    } catch (const IngestError& e) {
      throw IngestError(file.string() + ": header column " + std::to_string(c + 1) + ": " +
                        e.what());
    }
  }

  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line, row_no);
    if (fields.size() != header.size()) {
      throw IngestError(file.string() + ": row " + std::to_string(row_no) + " has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    JhuRow row;
    row.province = fields[0];
    row.country = fields[1];
    row.lat = fields[2].empty() ? 0.0 : parse_cell(fields[2], row_no, 3);
    row.lon = fields[3].empty() ? 0.0 : parse_cell(fields[3], row_no, 4);
    row.values.reserve(table.dates.size());
    for (std::size_t c = 4; c < fields.size(); ++c) {
      row.values.push_back(parse_cell(fields[c], row_no, c + 1));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

AggregatedSeries aggregate_country(const JhuTable& table, const std::string& country) {
  AggregatedSeries out;
  out.country = country;
  out.dates = table.dates;
  out.values.assign(table.dates.size(), 0.0);
  bool found = false;
  for (const JhuRow& row : table.rows) {
    if (row.country != country) continue;
    found = true;
    for (std::size_t i = 0; i < row.values.size(); ++i) out.values[i] += row.values[i];
  }
  if (!found) {
    std::set<std::string> names;
    for (const JhuRow& row : table.rows) names.insert(row.country);
    std::string list;
    for (const std::string& name : names) {
      if (!list.empty()) list += ", ";
      list += name;
    }
    throw IngestError("unknown country '" + country + "'; available: " + list);
  }
  return out;
}

namespace {

// Restricts an aggregated series to [start, end] and demands full daily
// coverage of that window.
std::vector<double> window_values(const AggregatedSeries& agg, Date start, Date end,
                                  const std::string& what) {
  using std::chrono::sys_days;
  const auto first = sys_days(start);
  const auto last = sys_days(end);
  const std::size_t expected = static_cast<std::size_t>((last - first).count()) + 1;
  std::vector<double> values(expected, 0.0);
  std::vector<bool> seen(expected, false);
  for (std::size_t i = 0; i < agg.dates.size(); ++i) {
    const auto day = sys_days(agg.dates[i]);
    if (day < first || day > last) continue;
    const auto offset = static_cast<std::size_t>((day - first).count());
    if (seen[offset]) {
      throw IngestError(what + ": duplicate date column " + date_to_string(agg.dates[i]));
    }
    seen[offset] = true;
    values[offset] = agg.values[i];
  }
  for (std::size_t i = 0; i < expected; ++i) {
    if (!seen[i]) {
      throw IngestError(what + ": window not fully covered, missing " +
                        date_to_string(Date{std::chrono::floor<std::chrono::days>(
                            first + std::chrono::days(static_cast<long>(i)))}));
    }
  }
  return values;
}

void check_channel(const std::string& country, const std::string& channel,
                   const std::vector<double>& values, const std::vector<Date>& dates,
                   std::vector<std::string>& warnings) {
  std::vector<std::size_t> drops;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) {
      throw IngestError(country + " " + channel + ": negative count on " +
                        date_to_string(dates[i]));
    }
    if (i > 0 && values[i] < values[i - 1]) drops.push_back(i);
  }
  if (!drops.empty()) {
    std::ostringstream msg;
    msg << country << " " << channel << ": cumulative series decreases at day";
    if (drops.size() > 1) msg << "s";
    for (std::size_t k = 0; k < drops.size() && k < 5; ++k) msg << " " << drops[k];
    if (drops.size() > 5) msg << " (+" << drops.size() - 5 << " more)";
    msg << " (upstream revision, kept as reported)";
    warnings.push_back(msg.str());
  }
}

}  // namespace

RawSeries build_series(const JhuTable& confirmed, const JhuTable& recovered,
                       const JhuTable& deaths, const std::string& country, Date start, Date end,
                       std::vector<std::string>& warnings) {
  using std::chrono::sys_days;
  if (!start.ok() || !end.ok() || sys_days(start) > sys_days(end)) {
    throw ConfigError("build_series: invalid date window " + date_to_string(start) + ".." +
                      date_to_string(end));
  }

  RawSeries out;
  out.country = country;
  for (auto day = sys_days(start); day <= sys_days(end); day += std::chrono::days(1)) {
    out.dates.push_back(Date{std::chrono::floor<std::chrono::days>(day)});
  }

  out.confirmed = window_values(aggregate_country(confirmed, country), start, end,
                                country + " confirmed");
  out.deaths = window_values(aggregate_country(deaths, country), start, end, country + " deaths");
  try {
    out.recovered = window_values(aggregate_country(recovered, country), start, end,
                                  country + " recovered");
  } catch (const IngestError&) {
    warnings.push_back(country + " recovered: no usable rows, substituting zeros");
    out.recovered.assign(out.dates.size(), 0.0);
  }

  check_channel(country, "confirmed", out.confirmed, out.dates, warnings);
  check_channel(country, "recovered", out.recovered, out.dates, warnings);
  check_channel(country, "deaths", out.deaths, out.dates, warnings);
  return out;
}

namespace {

// Shortest decimal form that parses back to the same double, so the ingest
// output survives a reload bit for bit.
std::string series_number(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw IoError("cannot format series value");
  return std::string(buf, ptr);
}

}  // namespace

void save_series_csv(const RawSeries& series, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "date,confirmed,recovered,deaths\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << date_to_string(series.dates[i]) << "," << series_number(series.confirmed[i]) << ","
        << series_number(series.recovered[i]) << "," << series_number(series.deaths[i]) << "\n";
  }
  if (!out) throw IoError("failed writing " + file.string());
}

RawSeries load_series_csv(const std::filesystem::path& file, const std::string& country) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open series file " + file.string());
  RawSeries out;
  out.country = country;
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line, 1) !=
                                     std::vector<std::string>{"date", "confirmed", "recovered",
                                                              "deaths"}) {
    throw IngestError(file.string() + ": not a series file (bad header)");
  }
  for (std::size_t row_no = 2; std::getline(in, line); ++row_no) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line, row_no);
    if (fields.size() != 4) {
      throw IngestError(file.string() + ": row " + std::to_string(row_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected 4");
    }
    out.dates.push_back(parse_iso_date(fields[0]));
    out.confirmed.push_back(parse_cell(fields[1], row_no, 2));
    out.recovered.push_back(parse_cell(fields[2], row_no, 3));
    out.deaths.push_back(parse_cell(fields[3], row_no, 4));
  }
  if (out.dates.empty()) throw IngestError(file.string() + ": no data rows");
  for (std::size_t i = 1; i < out.dates.size(); ++i) {
    auto gap = std::chrono::sys_days(out.dates[i]) - std::chrono::sys_days(out.dates[i - 1]);
    if (gap != std::chrono::days(1)) {
      throw IngestError(file.string() + ": dates are not consecutive at row " +
                        std::to_string(i + 2));
    }
  }
  return out;
}

}  // namespace attnfc
