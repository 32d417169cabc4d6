#include "attnfc/attnfc.h"

#include <algorithm>
#include <iostream>
#include <new>
#include <string>

#include "core/errors.hpp"
#include "runner/commands.hpp"
#include "runner/config.hpp"

struct attnfc_config {
  attnfc::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

// Input-shaped problems (bad config, unreadable or malformed files) come back
// as ATTNFC_INPUT; anything else crossing the boundary is ATTNFC_INTERNAL.
// Exceptions must never escape into C callers.
template <typename Fn>
int guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const attnfc::ConfigError& e) {
    g_last_error = e.what();
    return ATTNFC_INPUT;
  } catch (const attnfc::IngestError& e) {
    g_last_error = e.what();
    return ATTNFC_INPUT;
  } catch (const attnfc::IoError& e) {
    g_last_error = e.what();
    return ATTNFC_INPUT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ATTNFC_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ATTNFC_INTERNAL;
  }
}

int require_config(const attnfc_config* config) {
  if (config != nullptr) return ATTNFC_OK;
  g_last_error = "null configuration handle";
  return ATTNFC_INPUT;
}

}  // namespace

extern "C" {

const char* attnfc_version(void) { return "1.0.0"; }

const char* attnfc_last_error(void) { return g_last_error.c_str(); }

attnfc_config* attnfc_config_create(void) {
  g_last_error.clear();
  return new (std::nothrow) attnfc_config{};
}

attnfc_config* attnfc_config_load(const char* path) {
  g_last_error.clear();
  if (path == nullptr) {
    g_last_error = "null config path";
    return nullptr;
  }
  try {
    return new attnfc_config{attnfc::load_run_config(path)};
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

int attnfc_config_set(attnfc_config* config, const char* key, const char* value) {
  if (int rc = require_config(config); rc != ATTNFC_OK) return rc;
  if (key == nullptr || value == nullptr) {
    g_last_error = "null override key or value";
    return ATTNFC_INPUT;
  }
  return guarded([&] {
    attnfc::apply_override(config->cfg, key, value);
    return ATTNFC_OK;
  });
}

void attnfc_config_free(attnfc_config* config) { delete config; }

int attnfc_run_ingest(const attnfc_config* config) {
  if (int rc = require_config(config); rc != ATTNFC_OK) return rc;
  return guarded([&] { return attnfc::run_ingest(config->cfg, std::cerr); });
}

int attnfc_run_stats(const attnfc_config* config) {
  if (int rc = require_config(config); rc != ATTNFC_OK) return rc;
  return guarded([&] { return attnfc::run_stats(config->cfg, std::cout, std::cerr); });
}

int attnfc_run_train(const attnfc_config* config) {
  if (int rc = require_config(config); rc != ATTNFC_OK) return rc;
  return guarded([&] { return attnfc::run_train(config->cfg, std::cerr); });
}

int attnfc_run_evaluate(const attnfc_config* config) {
  if (int rc = require_config(config); rc != ATTNFC_OK) return rc;
  return guarded([&] { return attnfc::run_evaluate(config->cfg, std::cerr); });
}

int attnfc_run_forecast(const attnfc_config* config, const char* country, int horizon,
                        double* out_values, int capacity, int* out_len) {
  if (int rc = require_config(config); rc != ATTNFC_OK) return rc;
  if (country == nullptr || *country == '\0') {
    g_last_error = "forecast: a country must be selected";
    return ATTNFC_INPUT;
  }
  if (horizon < 1) {
    g_last_error = "forecast: horizon must be at least 1";
    return ATTNFC_INPUT;
  }
  return guarded([&] {
    attnfc::ForecastResult result;
    int rc = attnfc::run_forecast(config->cfg, country, static_cast<std::size_t>(horizon),
                                  &result, std::cerr);
    if (out_len != nullptr) *out_len = static_cast<int>(result.predictions.size());
    if (out_values != nullptr && capacity > 0) {
      const auto n = std::min<std::size_t>(result.predictions.size(),
                                           static_cast<std::size_t>(capacity));
      for (std::size_t i = 0; i < n; ++i) out_values[i] = result.predictions[i];
    }
    return rc;
  });
}

}  // extern "C"
