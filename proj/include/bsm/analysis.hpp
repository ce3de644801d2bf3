// SPDX-License-Identifier: Apache-2.0
#pragma once

// Evaluation analyses over per-sample uncertainties: decision referral by
// rejected fraction, uncertainty-threshold sweeps, feature-space distance to
// the training set, and Spearman rank correlation.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsm/matrix.hpp"

namespace bsm {

struct ReferralPoint {
  double rejected_fraction = 0.0;
  double accuracy = 0.0;
  std::optional<double> roc_auc;  // absent when a class vanished from the retained set
  std::size_t n_retained = 0;
};

struct ReferralCurve {
  std::vector<ReferralPoint> points;
  std::vector<std::string> diagnostics;  // one line per excluded point
};

/// For each fraction f (processed in increasing order), rejects the
/// ceil(f N) most uncertain samples (equal uncertainties: lower index
/// rejected first) and scores the rest. `labels` are the true binary
/// labels and `scores` the positive-class probabilities used for AUC.
ReferralCurve referral_curve(std::span<const double> uncertainties, const std::vector<bool>& correct,
                             std::span<const double> scores, std::span<const int> labels,
                             std::span<const double> fractions);

struct ThresholdPoint {
  double threshold = 0.0;
  double accuracy = 0.0;
  std::size_t n_retained = 0;
};

struct ThresholdCurve {
  std::vector<ThresholdPoint> points;
  std::vector<std::string> diagnostics;
};

/// Keeps samples with uncertainty <= t.
ThresholdCurve threshold_curve(std::span<const double> uncertainties, const std::vector<bool>& correct,
                               std::span<const double> thresholds);

/// 1 - max cosine similarity between `query` and the rows of `bank`. Zero
/// rows of the bank are skipped; a zero query, or a bank without a nonzero
/// row, is rejected.
double min_cosine_distance(std::span<const double> query, const Matrix& bank);

struct DistanceRecord {
  std::size_t sample_index = 0;
  double min_cosine_distance = 0.0;
  double uncertainty = 0.0;
  bool correct = false;

  double similarity() const { return 1.0 - min_cosine_distance; }
};

struct DistanceAnalysis {
  std::vector<DistanceRecord> records;
  std::vector<std::string> diagnostics;  // queries skipped for zero features
};

/// Distance records for every query row with a nonzero feature vector.
DistanceAnalysis distance_records(const Matrix& query_features, const Matrix& train_features,
                                  std::span<const double> uncertainties, const std::vector<bool>& correct);

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;
};

/// Pearson correlation of average ranks; two-sided p-value from
/// t = rho sqrt((N-2)/(1-rho^2)) against Student-t with N-2 dof.
Correlation spearman(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value by enumerating every permutation of y (N <= 10).
double spearman_exact_p(std::span<const double> x, std::span<const double> y);

}  // namespace bsm
