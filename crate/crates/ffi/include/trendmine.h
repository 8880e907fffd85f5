#ifndef TRENDMINE_H
#define TRENDMINE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Distance used by [`tm_hdbscan`].
typedef enum TmMetric {
  TM_METRIC_EUCLIDEAN = 0,
  TM_METRIC_COSINE = 1,
} TmMetric;

// Result codes. The first four match the command-line exit codes.
typedef enum TmStatus {
  TM_STATUS_OK = 0,
  // Bad configuration or parameter.
  TM_STATUS_USAGE = 1,
  // Malformed or unusable input data.
  TM_STATUS_DATA = 2,
  TM_STATUS_INTERNAL = 3,
  // A required pointer argument was null.
  TM_STATUS_NULL_ARGUMENT = 4,
  // A string argument was not valid UTF-8.
  TM_STATUS_INVALID_UTF8 = 5,
  // The library panicked; state touched by the call is unspecified.
  TM_STATUS_PANIC = 6,
} TmStatus;

// Opaque pipeline configuration.
typedef struct TmConfig TmConfig;

// Least-squares line fitted by [`tm_fit_ols`].
typedef struct TmOlsFit {
  double slope;
  double intercept;
  double r_squared;
} TmOlsFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The library version as a static NUL-terminated string.
const char *tm_version(void);

// The message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library on this thread.
const char *tm_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a pointer obtained from this library and not yet freed.
void tm_string_free(char *s);

// A configuration with every default.
struct TmConfig *tm_config_new(void);

// Loads a TOML configuration file into a new handle stored in `*out`.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` valid for one write.
enum TmStatus tm_config_load(const char *path, struct TmConfig **out);

// Sets one configuration key; `value` is a TOML literal or a bare string.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` valid NUL-terminated strings.
enum TmStatus tm_config_set(struct TmConfig *cfg, const char *key, const char *value);

// Writes the configuration as a TOML document to `*out`.
//
// # Safety
// `cfg` must be a live handle; `out` valid for one write.
enum TmStatus tm_config_to_toml(const struct TmConfig *cfg, char **out);

// Releases a configuration handle. Null is ignored.
//
// # Safety
// `cfg` must be null or a live handle not used afterwards.
void tm_config_free(struct TmConfig *cfg);

// Runs the full pipeline into `out_dir`. On success the run report (JSON)
// is stored in `*report_json` unless `report_json` is null.
//
// # Safety
// `cfg` must be a live handle; `out_dir` a valid NUL-terminated string;
// `report_json` null or valid for one write.
enum TmStatus tm_run_pipeline(const struct TmConfig *cfg, const char *out_dir, char **report_json);

// Preprocesses one text with the bundled resources. `lang` ("en", "ar") may
// be null. The result is a JSON object with `cleaned_text`, `tokens`,
// `ngrams` and `token_count`.
//
// # Safety
// `text` must be a valid NUL-terminated string; `lang` null or one;
// `out_json` valid for one write.
enum TmStatus tm_preprocess_text(const char *text, const char *lang, char **out_json);

// Clusters `n_points` row-major vectors of `dim` values. Labels (−1 for
// noise) are written to `labels_out[0..n_points]`. `min_samples` of 0 means
// "same as `min_cluster_size`".
//
// # Safety
// `data` must point to `n_points * dim` readable doubles and `labels_out`
// to `n_points` writable 64-bit integers.
enum TmStatus tm_hdbscan(const double *data,
                         uintptr_t n_points,
                         uintptr_t dim,
                         uintptr_t min_cluster_size,
                         uintptr_t min_samples,
                         enum TmMetric metric,
                         int64_t *labels_out);

// Ordinary least squares of `ys` on `xs` (both of length `n`).
//
// # Safety
// `xs` and `ys` must point to `n` readable doubles; `out` valid for one write.
enum TmStatus tm_fit_ols(const double *xs, const double *ys, uintptr_t n, struct TmOlsFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRENDMINE_H */
