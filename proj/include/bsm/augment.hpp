// SPDX-License-Identifier: Apache-2.0
#pragma once

// Mixup pair construction and a feature-space input perturbation policy.
//
// The perturbation policy is a stand-in for an image test-time augmentation
// pipeline. Reference values of that image pipeline, for documentation only:
//   brightness, hue, saturation, contrast ~ U(-0.15, 0.15)
//   horizontal flip ~ Bern(0.5)
//   translation (x and y) ~ U(-22, 22) px
//   rotation ~ U(-10, 10) degrees
//   resize to 224 x 224

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bsm/matrix.hpp"
#include "bsm/rng.hpp"

namespace bsm {

struct MixupPair {
  std::vector<double> mixed_input;
  int label_i = 0;
  int label_j = 0;
  double gamma = 1.0;
  std::size_t index_i = 0;
  std::size_t index_j = 0;
};

struct PerturbationPolicy {
  double noise_sigma = 0.0;   // std of additive isotropic Gaussian noise
  double scale_jitter = 0.0;  // half-range of per-dimension multiplicative jitter

  bool is_identity() const { return noise_sigma == 0.0 && scale_jitter == 0.0; }
  void validate() const;
};

/// One draw from Beta(alpha, alpha) as g1 / (g1 + g2) with Gamma(alpha) draws.
double sample_gamma(double alpha, Rng& rng);

/// Partner of row i is perm[i] for a uniform random permutation; one mixing
/// coefficient per pair. `forced_gamma` replaces the Beta draw (test hook).
std::vector<MixupPair> mixup_batch(const Matrix& inputs, std::span<const int> labels, double alpha, Rng& rng,
                                   std::optional<double> forced_gamma = std::nullopt);

/// input * (1 + u) + n, u ~ U(-jitter, jitter) per dimension, n ~ N(0, sigma^2).
std::vector<double> perturb(std::span<const double> input, const PerturbationPolicy& policy, Rng& rng);

/// Row-wise perturb over a whole matrix, rows visited in order.
Matrix perturb_rows(const Matrix& inputs, const PerturbationPolicy& policy, Rng& rng);

}  // namespace bsm
