// SPDX-License-Identifier: Apache-2.0
#include "bsm/bsm.h"

#include <cstring>
#include <new>
#include <string>

#include "bsm/analysis.hpp"
#include "bsm/config.hpp"
#include "bsm/error.hpp"
#include "bsm/experiment.hpp"
#include "bsm/prob_metrics.hpp"

struct bsm_config {
  bsm::ExperimentConfig value;
};

struct bsm_report {
  bsm::MetricsReport value;
};

namespace {

thread_local std::string g_last_error;

bsm_status to_status(bsm::ErrorCode code) {
  switch (code) {
    case bsm::ErrorCode::invalid_input: return BSM_ERR_INVALID_INPUT;
    case bsm::ErrorCode::unsupported_shape: return BSM_ERR_UNSUPPORTED_SHAPE;
    case bsm::ErrorCode::undefined_metric: return BSM_ERR_UNDEFINED_METRIC;
    case bsm::ErrorCode::training_divergence: return BSM_ERR_TRAINING_DIVERGENCE;
    case bsm::ErrorCode::parse_error: return BSM_ERR_PARSE;
    case bsm::ErrorCode::io_error: return BSM_ERR_IO;
  }
  return BSM_ERR_INTERNAL;
}

template <typename F>
bsm_status guarded(F&& f) {
  try {
    f();
    return BSM_OK;
  } catch (const bsm::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BSM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BSM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BSM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) bsm::fail(bsm::ErrorCode::invalid_input, std::string(what) + " is NULL");
}

bsm::PredictionBatch make_batch(const double* probs, const int* labels, size_t n, size_t k) {
  need(probs, "probs");
  need(labels, "labels");
  bsm::PredictionBatch b;
  b.probs = Eigen::Map<const bsm::Matrix>(probs, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  b.labels.assign(labels, labels + n);
  return b;
}

}  // namespace

extern "C" {

const char* bsm_version(void) { return bsm::kVersion; }

const char* bsm_last_error(void) { return g_last_error.c_str(); }

const char* bsm_status_name(bsm_status status) {
  switch (status) {
    case BSM_OK: return "ok";
    case BSM_ERR_INVALID_INPUT: return "invalid input";
    case BSM_ERR_UNSUPPORTED_SHAPE: return "unsupported shape";
    case BSM_ERR_UNDEFINED_METRIC: return "undefined metric";
    case BSM_ERR_TRAINING_DIVERGENCE: return "training divergence";
    case BSM_ERR_PARSE: return "parse error";
    case BSM_ERR_IO: return "i/o error";
    case BSM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

bsm_status bsm_config_load(const char* path, bsm_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new bsm_config{bsm::load_config(path)};
  });
}

bsm_status bsm_config_parse(const char* text, bsm_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new bsm_config{bsm::parse_config(text)};
  });
}

bsm_status bsm_config_set(bsm_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    bsm::ExperimentConfig updated = config->value;
    bsm::set_config_value(updated, key, value);
    try {
      updated.validate();
    } catch (const bsm::Error& e) {
      bsm::fail(bsm::ErrorCode::parse_error, e.what());
    }
    config->value = std::move(updated);
  });
}

bsm_status bsm_config_get(const bsm_config* config, const char* key, char* buf, size_t buf_len, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    const std::string v = bsm::get_config_value(config->value, key);
    if (needed) *needed = v.size() + 1;
    if (buf && buf_len > 0) {
      const size_t n = std::min(buf_len - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
      if (n < v.size()) bsm::fail(bsm::ErrorCode::invalid_input, "buffer too small for value of " + std::string(key));
    }
  });
}

bsm_status bsm_config_hash(const bsm_config* config, char out[17]) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    const auto h = bsm::config_hash(config->value);
    std::memcpy(out, h.c_str(), 17);
  });
}

size_t bsm_config_key_count(void) { return bsm::config_keys().size(); }

const char* bsm_config_key_name(size_t index) {
  const auto& keys = bsm::config_keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

void bsm_config_free(bsm_config* config) { delete config; }

bsm_status bsm_run(const bsm_config* config, const char* out_dir, bsm_report** out) {
  return guarded([&] {
    need(config, "config");
    need(out_dir, "out_dir");
    auto result = bsm::run_experiment(config->value, out_dir);
    if (out) *out = new bsm_report{std::move(result.report)};
  });
}

bsm_status bsm_sweep(const bsm_config* config, const char* axis, const char* const* values, size_t n_values,
                     const char* out_dir, size_t* n_failed) {
  return guarded([&] {
    need(config, "config");
    need(axis, "axis");
    need(values, "values");
    need(out_dir, "out_dir");
    std::vector<std::string> vals;
    for (size_t i = 0; i < n_values; ++i) {
      need(values[i], "sweep value");
      vals.emplace_back(values[i]);
    }
    const auto rows = bsm::run_sweep(config->value, bsm::parse_sweep_axis(axis), vals, out_dir);
    if (n_failed) {
      *n_failed = 0;
      for (const auto& r : rows) *n_failed += r.report ? 0 : 1;
    }
  });
}

bsm_status bsm_report_from_predictions(const char* predictions_csv, bsm_report** out) {
  return guarded([&] {
    need(predictions_csv, "predictions_csv");
    need(out, "out");
    *out = new bsm_report{bsm::report_from_predictions(predictions_csv)};
  });
}

bsm_status bsm_report_get(const bsm_report* report, bsm_metric metric, double* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    const auto& r = report->value;
    switch (metric) {
      case BSM_METRIC_ROC_AUC: *out = r.roc_auc; return;
      case BSM_METRIC_ECE: *out = r.ece; return;
      case BSM_METRIC_BRIER: *out = r.brier; return;
      case BSM_METRIC_NLL: *out = r.nll; return;
      case BSM_METRIC_ACCURACY: *out = r.accuracy; return;
      case BSM_METRIC_NOISE_RATE: *out = r.noise_rate; return;
    }
    bsm::fail(bsm::ErrorCode::invalid_input, "unknown metric id");
  });
}

bsm_status bsm_report_seed(const bsm_report* report, uint64_t* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = report->value.seed;
  });
}

bsm_status bsm_report_write(const bsm_report* report, const char* dir, int csv, int json) {
  return guarded([&] {
    need(report, "report");
    need(dir, "dir");
    std::filesystem::create_directories(dir);
    bsm::write_metrics(dir, report->value, csv != 0, json != 0);
  });
}

void bsm_report_free(bsm_report* report) { delete report; }

bsm_status bsm_entropy(const double* probs_row, size_t k, double* out) {
  return guarded([&] {
    need(probs_row, "probs_row");
    need(out, "out");
    *out = bsm::predictive_entropy(std::span<const double>(probs_row, k));
  });
}

bsm_status bsm_ece(const double* probs, const int* labels, size_t n, size_t k, double bin_width, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = bsm::expected_calibration_error(make_batch(probs, labels, n, k), bin_width).ece;
  });
}

bsm_status bsm_nll_binary(const double* probs, const int* labels, size_t n, size_t k, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = bsm::negative_log_likelihood_binary(make_batch(probs, labels, n, k));
  });
}

bsm_status bsm_brier(const double* probs, const int* labels, size_t n, size_t k, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = bsm::brier_score(make_batch(probs, labels, n, k));
  });
}

bsm_status bsm_accuracy(const double* probs, const int* labels, size_t n, size_t k, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = bsm::accuracy(make_batch(probs, labels, n, k));
  });
}

bsm_status bsm_roc_auc(const double* scores, const int* labels, size_t n, double* out) {
  return guarded([&] {
    need(scores, "scores");
    need(labels, "labels");
    need(out, "out");
    *out = bsm::roc_auc(std::span<const double>(scores, n), std::span<const int>(labels, n));
  });
}

bsm_status bsm_spearman(const double* x, const double* y, size_t n, double* rho, double* p_value) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    const auto c = bsm::spearman(std::span<const double>(x, n), std::span<const double>(y, n));
    if (rho) *rho = c.rho;
    if (p_value) *p_value = c.p_value;
  });
}

}  // extern "C"
