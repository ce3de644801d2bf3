// SPDX-License-Identifier: Apache-2.0
#include "bsm/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsm/error.hpp"

namespace bsm {

namespace {

constexpr double kPiMin = 1e-6;

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

BetaComponent moment_match(std::span<const double> x, std::span<const double> weight) {
  double wsum = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    wsum += weight[i];
    mean += weight[i] * x[i];
  }
  if (wsum <= 0.0) return {1.0, 1.0};
  mean /= wsum;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) var += weight[i] * (x[i] - mean) * (x[i] - mean);
  var = std::max(var / wsum, kVarianceFloor);

  const double common = mean * (1.0 - mean) / var - 1.0;
  return {std::clamp(mean * common, kShapeMin, kShapeMax), std::clamp((1.0 - mean) * common, kShapeMin, kShapeMax)};
}

// log(pi f1), log((1-pi) f2) for one loss.
std::pair<double, double> weighted_log_densities(const BetaMixtureModel& m, double x) {
  return {std::log(m.pi_clean) + beta_log_pdf(x, m.clean.alpha, m.clean.beta),
          std::log(1.0 - m.pi_clean) + beta_log_pdf(x, m.noisy.alpha, m.noisy.beta)};
}

double log_add(double a, double b) {
  const double hi = std::max(a, b);
  if (!std::isfinite(hi)) return hi;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

std::vector<double> normalize_losses(std::span<const double> raw) {
  require(raw.size() >= 2, "normalize_losses needs at least 2 losses");
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(raw.size(), 0.5);
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = std::clamp((raw[i] - lo) / (hi - lo), kLossEdgeClamp, 1.0 - kLossEdgeClamp);
  return out;
}

double beta_log_pdf(double x, double alpha, double beta) {
  require(x > 0.0 && x < 1.0, "beta_pdf argument must lie in (0, 1)");
  require(alpha > 0.0 && beta > 0.0, "beta shapes must be positive");
  return (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log1p(-x) - log_beta_fn(alpha, beta);
}

double beta_pdf(double x, double alpha, double beta) { return std::exp(beta_log_pdf(x, alpha, beta)); }

double mixture_log_likelihood(const BetaMixtureModel& model, std::span<const double> losses) {
  double ll = 0.0;
  for (double x : losses) {
    const auto [a, b] = weighted_log_densities(model, x);
    ll += log_add(a, b);
  }
  return ll;
}

BetaMixtureModel fit_bmm(std::span<const double> losses, int iterations, [[maybe_unused]] std::uint64_t seed,
                         BmmTrace* trace) {
  require(losses.size() >= 10, "fit_bmm needs at least 10 losses");
  require(iterations >= 1, "fit_bmm needs at least one iteration");
  for (double x : losses) require(x > 0.0 && x < 1.0, "fit_bmm losses must lie in (0, 1)");

  BetaMixtureModel model;
  const auto [lo_it, hi_it] = std::minmax_element(losses.begin(), losses.end());
  if (!(*hi_it > *lo_it)) {
    model.uninformative = true;
    return model;
  }

  const std::size_t n = losses.size();
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
  std::vector<double> r_clean(n), r_noisy(n);
  for (std::size_t i = 0; i < n; ++i) {
    r_clean[i] = losses[i] < mean ? 1.0 : 0.0;
    r_noisy[i] = 1.0 - r_clean[i];
  }

  auto m_step = [&] {
    model.clean = moment_match(losses, r_clean);
    model.noisy = moment_match(losses, r_noisy);
    const double pi = std::accumulate(r_clean.begin(), r_clean.end(), 0.0) / static_cast<double>(n);
    model.pi_clean = std::clamp(pi, kPiMin, 1.0 - kPiMin);
  };

  m_step();
  if (trace) {
    trace->log_likelihood.push_back(mixture_log_likelihood(model, losses));
    trace->pi_clean.push_back(model.pi_clean);
  }
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto [a, b] = weighted_log_densities(model, losses[i]);
      const double total = log_add(a, b);
      r_clean[i] = std::isfinite(total) ? std::exp(a - total) : 0.5;
      r_noisy[i] = 1.0 - r_clean[i];
    }
    m_step();
    if (trace) {
      trace->log_likelihood.push_back(mixture_log_likelihood(model, losses));
      trace->pi_clean.push_back(model.pi_clean);
    }
  }

  if (model.clean.mean() > model.noisy.mean()) {
    std::swap(model.clean, model.noisy);
    model.pi_clean = 1.0 - model.pi_clean;
  }
  return model;
}

double noisy_posterior(const BetaMixtureModel& model, double normalized_loss) {
  if (model.uninformative) return 0.5;
  const auto [a, b] = weighted_log_densities(model, normalized_loss);
  const double total = log_add(a, b);
  if (!std::isfinite(total)) return 0.5;
  return std::clamp(std::exp(b - total), 0.0, 1.0);
}

}  // namespace bsm
