#include "runner/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "core/errors.hpp"

namespace attnfc {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Removes a trailing comment, leaving quoted '#' characters alone.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& token, const std::string& where) {
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"')
    return token.substr(1, token.size() - 2);
  if (!token.empty() && (token.front() == '"' || token.back() == '"'))
    throw ConfigError(where + ": unbalanced quotes in '" + token + "'");
  return token;
}

// Splits an array body or a comma-separated override value into raw elements.
std::vector<std::string> split_elements(const std::string& body, const std::string& where) {
  std::vector<std::string> out;
  std::string current;
  bool quoted = false;
  for (char c : body) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(unquote(trim(current), where));
      current.clear();
    } else {
      current += c;
    }
  }
  std::string last = trim(current);
  if (!last.empty() || !out.empty()) out.push_back(unquote(last, where));
  if (quoted) throw ConfigError(where + ": unterminated string");
  return out;
}

double parse_number(const std::string& v, const std::string& where) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  return value;
}

std::size_t parse_count(const std::string& v, const std::string& where) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(where + ": expected a non-negative integer, got '" + v + "'");
  return value;
}

Date parse_config_date(const std::string& v, const std::string& where) {
  try {
    return parse_iso_date(v);
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

void expect_single(const std::vector<std::string>& values, const std::string& where) {
  if (values.size() != 1)
    throw ConfigError(where + ": expected a single value, got " +
                      std::to_string(values.size()));
}

// One assignment, shared by file parsing and command-line overrides. `values`
// has one element for scalars and any number for list-valued keys.
void apply_values(RunConfig& c, const std::string& key, const std::vector<std::string>& values,
                  const std::string& where) {
  auto one = [&]() -> const std::string& {
    expect_single(values, where);
    return values[0];
  };
  if (key == "data.dir") {
    c.data_dir = one();
  } else if (key == "data.confirmed") {
    c.confirmed_csv = one();
  } else if (key == "data.recovered") {
    c.recovered_csv = one();
  } else if (key == "data.deaths") {
    c.deaths_csv = one();
  } else if (key == "data.countries") {
    c.countries = values;
  } else if (key == "data.window-start") {
    c.window_start = parse_config_date(one(), where);
  } else if (key == "data.window-end") {
    c.window_end = parse_config_date(one(), where);
  } else if (key == "split.train") {
    c.split.train = parse_number(one(), where);
  } else if (key == "split.validation") {
    c.split.validation = parse_number(one(), where);
  } else if (key == "split.test") {
    c.split.test = parse_number(one(), where);
  } else if (key == "model.lookback") {
    c.model.lookback = parse_count(one(), where);
  } else if (key == "model.encoder1") {
    c.model.encoder1_size = parse_count(one(), where);
  } else if (key == "model.encoder2") {
    c.model.encoder2_size = parse_count(one(), where);
  } else if (key == "model.dropout") {
    c.model.dropout_rate = parse_number(one(), where);
  } else if (key == "model.time2vec-l") {
    c.model.time2vec_l = parse_count(one(), where);
  } else if (key == "model.mode") {
    try {
      c.model.mode = model_mode_from_string(one());
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  } else if (key == "train.epochs") {
    c.train.epochs = parse_count(one(), where);
  } else if (key == "train.learning-rate") {
    c.train.adam.learning_rate = parse_number(one(), where);
  } else if (key == "train.beta1") {
    c.train.adam.beta1 = parse_number(one(), where);
  } else if (key == "train.beta2") {
    c.train.adam.beta2 = parse_number(one(), where);
  } else if (key == "train.epsilon") {
    c.train.adam.epsilon = parse_number(one(), where);
  } else if (key == "train.seed") {
    c.train.seed = parse_count(one(), where);
  } else if (key == "train.gradient-clip") {
    c.train.gradient_clip = parse_number(one(), where);
  } else if (key == "eval.horizons") {
    c.horizons.horizons.clear();
    for (const std::string& v : values) c.horizons.horizons.push_back(parse_count(v, where));
  } else if (key == "output.dir") {
    c.out_dir = one();
  } else if (key == "jobs") {
    c.jobs = parse_count(one(), where);
  } else {
    throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (countries.empty()) throw ConfigError("config: no countries selected");
  std::set<std::string> seen;
  for (const std::string& name : countries) {
    if (name.empty()) throw ConfigError("config: empty country name");
    if (!seen.insert(name).second) throw ConfigError("config: duplicate country '" + name + "'");
  }
  if (!window_start.ok() || !window_end.ok()) throw ConfigError("config: invalid window date");
  if (std::chrono::sys_days(window_start) >= std::chrono::sys_days(window_end))
    throw ConfigError("config: window start " + date_to_string(window_start) +
                      " is not before window end " + date_to_string(window_end));
  if (confirmed_csv.empty() || recovered_csv.empty() || deaths_csv.empty())
    throw ConfigError("config: data file names must be non-empty");
  if (out_dir.empty()) throw ConfigError("config: output directory must be non-empty");
  if (jobs == 0) throw ConfigError("config: jobs must be at least 1");
  split.validate();
  model.validate();
  train.validate();
  horizons.validate();
}

std::filesystem::path RunConfig::resolved_data_dir() const {
  if (!data_dir.empty()) return data_dir;
  if (const char* env = std::getenv("ATTNFC_DATA_DIR"); env != nullptr && *env != '\0')
    return env;
  return "data/jhu";
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  RunConfig config;
  std::string section;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    std::string where = file.filename().string() + ":" + std::to_string(line_no);
    std::string text = trim(strip_comment(line));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3)
        throw ConfigError(where + ": malformed section header '" + text + "'");
      section = trim(text.substr(1, text.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value', got '" + text + "'");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (value.empty()) throw ConfigError(where + ": missing value for '" + key + "'");
    std::vector<std::string> values;
    if (value.front() == '[') {
      if (value.back() != ']')
        throw ConfigError(where + ": unterminated array for '" + key + "'");
      values = split_elements(value.substr(1, value.size() - 2), where);
    } else {
      values = {unquote(value, where)};
    }
    apply_values(config, section.empty() ? key : section + "." + key, values, where);
  }
  return config;
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  std::string where = "override " + key;
  bool list_valued = key == "data.countries" || key == "eval.horizons";
  std::vector<std::string> values =
      list_valued ? split_elements(value, where) : std::vector<std::string>{value};
  if (values.empty()) throw ConfigError(where + ": missing value");
  apply_values(config, key, values, where);
}

}  // namespace attnfc
