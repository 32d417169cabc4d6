/* C surface of the forecasting toolkit. Configuration lives behind an opaque
 * handle; every entry point returns one of the ATTNFC_* codes below and leaves
 * a human-readable message in attnfc_last_error() when something went wrong.
 * The handle is not thread-safe; the error message is thread-local. */
#ifndef ATTNFC_H
#define ATTNFC_H

#ifdef __cplusplus
extern "C" {
#endif

enum {
  ATTNFC_OK = 0,       /* everything asked for was produced */
  ATTNFC_PARTIAL = 1,  /* some per-country work failed, the rest completed */
  ATTNFC_INPUT = 2,    /* bad configuration or input; nothing usable produced */
  ATTNFC_INTERNAL = 3  /* unexpected failure inside the library */
};

typedef struct attnfc_config attnfc_config;

const char* attnfc_version(void);

/* Message from the most recent failing call on this thread, empty after a
 * success. The pointer stays valid until the next call on the same thread. */
const char* attnfc_last_error(void);

/* A handle with built-in defaults, or NULL if allocation fails. */
attnfc_config* attnfc_config_create(void);

/* A handle populated from a config file, or NULL with attnfc_last_error()
 * set. */
attnfc_config* attnfc_config_load(const char* path);

/* Applies one dotted-key override, e.g. ("train.seed", "42") or
 * ("data.countries", "Italy,Spain"). */
int attnfc_config_set(attnfc_config* config, const char* key, const char* value);

void attnfc_config_free(attnfc_config* config);

/* The five pipeline stages. Progress and warnings go to stderr; the stats
 * table goes to stdout. Per-country failures are reported but do not stop the
 * remaining countries. */
int attnfc_run_ingest(const attnfc_config* config);
int attnfc_run_stats(const attnfc_config* config);
int attnfc_run_train(const attnfc_config* config);
int attnfc_run_evaluate(const attnfc_config* config);

/* Forecasts `horizon` days past the end of the ingested series for one
 * country and writes forecast.csv. When `out_values` is non-NULL, up to
 * `capacity` predicted counts are copied into it; when `out_len` is non-NULL
 * it receives the full prediction count regardless of capacity. */
int attnfc_run_forecast(const attnfc_config* config, const char* country, int horizon,
                        double* out_values, int capacity, int* out_len);

#ifdef __cplusplus
}
#endif

#endif /* ATTNFC_H */
