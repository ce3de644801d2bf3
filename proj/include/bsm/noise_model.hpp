// SPDX-License-Identifier: Apache-2.0
#pragma once

// Two-component Beta mixture over normalized per-sample training losses.
// The higher-mean component models noisy labels; its posterior is the weight
// that moves a sample's bootstrapping target from its label to the model's
// own prediction.

#include <cstdint>
#include <span>
#include <vector>

namespace bsm {

struct BetaComponent {
  double alpha = 1.0;
  double beta = 1.0;

  double mean() const { return alpha / (alpha + beta); }
};

struct BetaMixtureModel {
  BetaComponent clean;  // lower mean
  BetaComponent noisy;  // higher mean
  double pi_clean = 0.5;
  bool uninformative = false;
};

inline constexpr double kLossEdgeClamp = 1e-4;
inline constexpr double kShapeMin = 0.01;
inline constexpr double kShapeMax = 100.0;
inline constexpr double kVarianceFloor = 1e-6;

/// Min-max rescale to [0,1], then clamp into [1e-4, 1 - 1e-4]. A constant
/// input maps to 0.5 everywhere.
std::vector<double> normalize_losses(std::span<const double> raw);

double beta_log_pdf(double x, double alpha, double beta);
double beta_pdf(double x, double alpha, double beta);

/// Per-iteration diagnostics of an EM run.
struct BmmTrace {
  std::vector<double> log_likelihood;  // after the initial and every later M-step
  std::vector<double> pi_clean;
};

/// EM with a weighted moment-matching M-step. Initial responsibilities come
/// from thresholding at the mean loss, so the result does not depend on
/// `seed`; the argument is kept so callers can thread one through.
BetaMixtureModel fit_bmm(std::span<const double> normalized_losses, int iterations = 10, std::uint64_t seed = 0,
                         BmmTrace* trace = nullptr);

/// Observed-data log-likelihood of the mixture.
double mixture_log_likelihood(const BetaMixtureModel& model, std::span<const double> normalized_losses);

/// P(noisy component | loss). 0.5 for an uninformative model.
double noisy_posterior(const BetaMixtureModel& model, double normalized_loss);

}  // namespace bsm
