// SPDX-License-Identifier: Apache-2.0
#pragma once

// Metric kernels over batches of class-probability predictions: entropy,
// expected calibration error with its reliability bins, binary NLL, Brier
// score, ROC-AUC and accuracy. All functions are pure.

#include <cstddef>
#include <span>
#include <vector>

#include "bsm/matrix.hpp"

namespace bsm {

/// N x K probabilities plus N labels in {0..K-1}.
struct PredictionBatch {
  Matrix probs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t num_classes() const { return static_cast<std::size_t>(probs.cols()); }
  std::span<const double> row(std::size_t i) const { return row_span(probs, static_cast<Eigen::Index>(i)); }
};

inline constexpr double kRowSumTolerance = 1e-6;
inline constexpr double kLogClamp = 1e-12;

/// Throws invalid_input unless rows are normalized probabilities and labels
/// are in range.
void validate(const PredictionBatch& batch);

/// Lowest index wins ties.
std::size_t argmax(std::span<const double> row);

/// Shannon entropy in nats with 0 ln 0 = 0.
double predictive_entropy(std::span<const double> probs_row);

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double conf_mean = 0.0;
  double acc = 0.0;

  double gap() const { return conf_mean - acc; }
};

struct ReliabilityBins {
  double bin_width = 0.1;
  std::vector<ReliabilityBin> bins;
};

struct CalibrationResult {
  double ece = 0.0;
  ReliabilityBins reliability;
};

/// Bin index of a confidence under half-open (m w, (m+1) w] bins; a
/// confidence of exactly 0 lands in the first bin.
std::size_t confidence_bin(double confidence, double bin_width, std::size_t num_bins);

/// Confidence is the max class probability; a sample is correct when its
/// argmax equals the label.
CalibrationResult expected_calibration_error(const PredictionBatch& batch, double bin_width = 0.1);

/// Mean of -ln p(true class), binary batches only.
double negative_log_likelihood_binary(const PredictionBatch& batch);

/// Mean over samples of K^{-1} sum_k (t_k - p_k)^2.
double brier_score(const PredictionBatch& batch);

/// Mann-Whitney AUC with average ranks for ties. Labels are 0/1.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

double accuracy(const PredictionBatch& batch);

/// Per-sample correctness flags (argmax == label).
std::vector<bool> correctness(const PredictionBatch& batch);

/// Probability of class 1, the score used for binary ROC-AUC.
std::vector<double> positive_scores(const PredictionBatch& batch);

/// 1-based ranks, tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace bsm
