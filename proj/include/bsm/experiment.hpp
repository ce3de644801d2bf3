// SPDX-License-Identifier: Apache-2.0
#pragma once

// Train -> estimate -> analyze pipeline and the report files it writes.
//
// Files written by run_experiment into the output directory:
//   metrics.csv / metrics.json   headline metrics with provenance
//   predictions.csv              validation probabilities (exact round trip)
//   reliability.csv              bin_lo, bin_hi, count, conf_mean, acc, gap
//   referral.csv                 rejected_fraction, n_retained, accuracy, roc_auc
//   threshold.csv                threshold, n_retained, accuracy
//   distance.csv                 per-sample min cosine distance vs uncertainty
//   correlation.csv              Spearman rho / p for similarity and distance
//   domain_shift.csv             mean uncertainty in-domain vs shifted
//   train_log.json, model_<m>.txt
// Every CSV starts with a `# ` provenance line.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsm/config.hpp"
#include "bsm/prob_metrics.hpp"

namespace bsm {

inline constexpr const char* kVersion = "1.0.0";

struct MetricsReport {
  std::string method;
  double noise_rate = 0.0;
  std::string estimator;
  double roc_auc = 0.0;
  double ece = 0.0;
  double brier = 0.0;
  double nll = 0.0;
  double accuracy = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version = kVersion;
  double bin_width = 0.1;
};

/// The metric half of a report, from a binary prediction batch.
MetricsReport compute_metrics(const PredictionBatch& batch, double bin_width);

/// Extra per-run numbers the distance and domain-shift analyses produce.
struct AnalysisSummary {
  double spearman_similarity_rho = 0.0;
  double spearman_similarity_p = 1.0;
  double spearman_distance_rho = 0.0;
  double spearman_distance_p = 1.0;
  double mean_uncertainty_in_domain = 0.0;
  double mean_uncertainty_shifted = 0.0;
  std::size_t distance_samples = 0;
};

struct ExperimentResult {
  MetricsReport report;
  AnalysisSummary summary;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

enum class SweepAxis { alphas, noise_rates, methods, tta_repeats, ensemble_sizes };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
  std::string value;
  std::optional<MetricsReport> report;
  std::string error;  // set when the member failed
};

/// One experiment per value (seed = base seed + ordinal) in
/// <out_dir>/<axis>_<ordinal>/, consolidated into <out_dir>/sweep.csv.
/// Member failures are recorded in their row; the sweep continues.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const std::string> values,
                                const std::filesystem::path& out_dir);

/// Applies one sweep value to a copy of the config.
ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepAxis axis, const std::string& value,
                                   std::size_t ordinal);

/// predictions.csv round trip.
void write_predictions(const std::filesystem::path& path, const PredictionBatch& batch, const MetricsReport& provenance);
PredictionBatch read_predictions(const std::filesystem::path& path, MetricsReport* provenance = nullptr);

/// Recomputes the metrics of a persisted predictions file.
MetricsReport report_from_predictions(const std::filesystem::path& path);

void write_metrics(const std::filesystem::path& dir, const MetricsReport& report, bool csv, bool json,
                   const AnalysisSummary* summary = nullptr);

/// `# bsm <version> config_hash=<h> seed=<s> ...` line heading every CSV.
std::string provenance_line(const MetricsReport& report);

}  // namespace bsm
