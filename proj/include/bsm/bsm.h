/* SPDX-License-Identifier: Apache-2.0 */
#ifndef BSM_BSM_H
#define BSM_BSM_H

/*
 * C interface to the bsm library: experiment configs, runs, sweeps, report
 * recomputation and the stateless metric kernels.
 *
 * Every fallible call returns a bsm_status. On failure a message describing
 * the error is available from bsm_last_error() on the calling thread until
 * the next failing call. Handles are opaque and owned by the caller; free
 * them with the matching *_free function (NULL is accepted).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BSM_BUILDING_LIBRARY)
#    define BSM_API __declspec(dllexport)
#  else
#    define BSM_API __declspec(dllimport)
#  endif
#else
#  define BSM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bsm_status {
  BSM_OK = 0,
  BSM_ERR_INVALID_INPUT = 1,
  BSM_ERR_UNSUPPORTED_SHAPE = 2,
  BSM_ERR_UNDEFINED_METRIC = 3,
  BSM_ERR_TRAINING_DIVERGENCE = 4,
  BSM_ERR_PARSE = 5,
  BSM_ERR_IO = 6,
  BSM_ERR_INTERNAL = 99
} bsm_status;

typedef enum bsm_metric {
  BSM_METRIC_ROC_AUC = 0,
  BSM_METRIC_ECE = 1,
  BSM_METRIC_BRIER = 2,
  BSM_METRIC_NLL = 3,
  BSM_METRIC_ACCURACY = 4,
  BSM_METRIC_NOISE_RATE = 5
} bsm_metric;

typedef struct bsm_config bsm_config;
typedef struct bsm_report bsm_report;

BSM_API const char* bsm_version(void);
BSM_API const char* bsm_last_error(void);
BSM_API const char* bsm_status_name(bsm_status status);

/* ---- configuration ---- */

BSM_API bsm_status bsm_config_load(const char* path, bsm_config** out);
BSM_API bsm_status bsm_config_parse(const char* text, bsm_config** out);
/* Sets a dotted key, e.g. ("train.method", "bsm"). Re-validates the config. */
BSM_API bsm_status bsm_config_set(bsm_config* config, const char* key, const char* value);
/* Copies the value of `key` into buf (NUL terminated). *needed receives the
 * full length including the terminator, so a too-small buffer can be
 * resized and retried. */
BSM_API bsm_status bsm_config_get(const bsm_config* config, const char* key, char* buf, size_t buf_len,
                                  size_t* needed);
/* 16 hex digits plus NUL. */
BSM_API bsm_status bsm_config_hash(const bsm_config* config, char out[17]);
BSM_API size_t bsm_config_key_count(void);
BSM_API const char* bsm_config_key_name(size_t index);
BSM_API void bsm_config_free(bsm_config* config);

/* ---- pipeline ---- */

/* Trains, evaluates and writes every report file into out_dir. `out` may be
 * NULL when the caller only wants the files. */
BSM_API bsm_status bsm_run(const bsm_config* config, const char* out_dir, bsm_report** out);

/* axis: alphas | noise_rates | methods | tta_repeats | ensemble_sizes.
 * Writes out_dir/sweep.csv; members that fail are recorded in their row and
 * counted in *n_failed (may be NULL). */
BSM_API bsm_status bsm_sweep(const bsm_config* config, const char* axis, const char* const* values, size_t n_values,
                             const char* out_dir, size_t* n_failed);

/* Recomputes metrics from a predictions.csv written by bsm_run. */
BSM_API bsm_status bsm_report_from_predictions(const char* predictions_csv, bsm_report** out);
BSM_API bsm_status bsm_report_get(const bsm_report* report, bsm_metric metric, double* out);
BSM_API bsm_status bsm_report_seed(const bsm_report* report, uint64_t* out);
/* Writes metrics.csv and/or metrics.json into dir. */
BSM_API bsm_status bsm_report_write(const bsm_report* report, const char* dir, int csv, int json);
BSM_API void bsm_report_free(bsm_report* report);

/* ---- metric kernels ----
 * probs is row-major n x k, labels has n entries in [0, k). */

BSM_API bsm_status bsm_entropy(const double* probs_row, size_t k, double* out);
BSM_API bsm_status bsm_ece(const double* probs, const int* labels, size_t n, size_t k, double bin_width, double* out);
BSM_API bsm_status bsm_nll_binary(const double* probs, const int* labels, size_t n, size_t k, double* out);
BSM_API bsm_status bsm_brier(const double* probs, const int* labels, size_t n, size_t k, double* out);
BSM_API bsm_status bsm_accuracy(const double* probs, const int* labels, size_t n, size_t k, double* out);
BSM_API bsm_status bsm_roc_auc(const double* scores, const int* labels, size_t n, double* out);
BSM_API bsm_status bsm_spearman(const double* x, const double* y, size_t n, double* rho, double* p_value);

#ifdef __cplusplus
}
#endif

#endif /* BSM_BSM_H */
