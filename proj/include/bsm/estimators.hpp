// SPDX-License-Identifier: Apache-2.0
#pragma once

// Predictors that turn trained networks into probabilities plus an entropy
// uncertainty: single forward, ensemble mean, MC dropout, and test-time
// perturbation averaging.

#include <optional>
#include <span>
#include <vector>

#include "bsm/augment.hpp"
#include "bsm/matrix.hpp"
#include "bsm/mlp.hpp"
#include "bsm/prob_metrics.hpp"
#include "bsm/rng.hpp"

namespace bsm {

struct EstimatorOutput {
  Matrix mean_probs;                // N x K
  std::vector<double> uncertainty;  // entropy of each mean_probs row
  std::optional<Matrix> variance;   // MC dropout only

  PredictionBatch batch(std::span<const int> labels) const;
};

/// Averages per-pass probability matrices in pass order. With `tau_inv`
/// set, also fills the diagonal predictive variance
/// tau^-1 + mean(y * y) - mean(y) * mean(y).
EstimatorOutput summarize_passes(std::span<const Matrix> passes, std::optional<double> tau_inv = std::nullopt);

/// Row-wise softmax of a logit matrix.
Matrix softmax_rows(const Matrix& logits);

EstimatorOutput single_forward(const MlpModel& model, const Matrix& inputs);

EstimatorOutput ensemble_predict(std::span<const MlpModel> models, const Matrix& inputs);

EstimatorOutput mc_dropout_predict(const MlpModel& model, const Matrix& inputs, int passes, double tau_inv, Rng& rng);

/// repeats == 0 evaluates the unperturbed inputs only; otherwise the mean
/// over `repeats` perturbed copies (the original is not included).
EstimatorOutput tta_predict(const MlpModel& model, const Matrix& inputs, const PerturbationPolicy& policy, int repeats,
                            Rng& rng);

}  // namespace bsm
