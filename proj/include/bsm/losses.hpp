// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-sample losses and their gradients with respect to pre-softmax logits.
// Bootstrap targets and noise weights are treated as constants (no gradient
// flows through them).

#include <span>
#include <vector>

namespace bsm {

struct LossOutput {
  double value = 0.0;
  std::vector<double> grad_logits;
};

/// Hard bootstrapping uses the one-hot argmax prediction as the secondary
/// target; soft uses the predicted distribution itself.
enum class Bootstrap { hard, soft };

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// Cross-entropy against an arbitrary target distribution. Every loss below
/// reduces to this with a particular target.
LossOutput soft_target_ce(std::span<const double> logits, std::span<const double> target);

LossOutput ce_loss(std::span<const double> logits, int label);

/// Target (1 - w) onehot(label) + w z.
LossOutput bs_loss(std::span<const double> logits, int label, double w, Bootstrap mode = Bootstrap::hard);

/// gamma ce(label_i) + (1 - gamma) ce(label_j); logits come from the mixed input.
LossOutput mixup_ce_loss(std::span<const double> logits, int label_i, int label_j, double gamma);

/// gamma bs(label_i, w_i) + (1 - gamma) bs(label_j, w_j), both halves sharing
/// the single prediction made on the mixed input.
LossOutput bsm_loss(std::span<const double> logits, int label_i, int label_j, double gamma, double w_i, double w_j,
                    Bootstrap mode = Bootstrap::hard);

}  // namespace bsm
