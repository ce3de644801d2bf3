// SPDX-License-Identifier: Apache-2.0
#include "bsm/losses.hpp"

#include <algorithm>
#include <cmath>

#include "bsm/error.hpp"
#include "bsm/prob_metrics.hpp"

namespace bsm {

namespace {

void check_label(int label, std::size_t k) {
  require(label >= 0 && static_cast<std::size_t>(label) < k, "label out of range");
}

// (1 - w) onehot(label) + w z, with z from the prediction h.
std::vector<double> bootstrap_target(std::span<const double> h, int label, double w, Bootstrap mode) {
  std::vector<double> t(h.size(), 0.0);
  if (mode == Bootstrap::hard) {
    t[argmax(h)] += w;
  } else {
    for (std::size_t k = 0; k < h.size(); ++k) t[k] += w * h[k];
  }
  t[static_cast<std::size_t>(label)] += 1.0 - w;
  return t;
}

}  // namespace

std::vector<double> log_softmax(std::span<const double> logits) {
  require(!logits.empty(), "logits are empty");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  const double lse = mx + std::log(s);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), "logits are empty");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double s = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - mx);
    s += out[k];
  }
  for (double& p : out) p /= s;
  return out;
}

LossOutput soft_target_ce(std::span<const double> logits, std::span<const double> target) {
  require(logits.size() == target.size(), "target and logits differ in length");
  const auto logp = log_softmax(logits);
  const auto h = softmax(logits);
  double tsum = 0.0;
  LossOutput out;
  out.grad_logits.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out.value -= target[k] * logp[k];
    tsum += target[k];
  }
  // d/dz of -t^T log softmax(z) is sum(t) h - t.
  for (std::size_t k = 0; k < logits.size(); ++k) out.grad_logits[k] = tsum * h[k] - target[k];
  out.value = std::max(out.value, 0.0);
  return out;
}

LossOutput ce_loss(std::span<const double> logits, int label) {
  check_label(label, logits.size());
  std::vector<double> t(logits.size(), 0.0);
  t[static_cast<std::size_t>(label)] = 1.0;
  return soft_target_ce(logits, t);
}

LossOutput bs_loss(std::span<const double> logits, int label, double w, Bootstrap mode) {
  check_label(label, logits.size());
  require(w >= 0.0 && w <= 1.0, "bootstrap weight must lie in [0, 1]");
  const auto h = softmax(logits);
  return soft_target_ce(logits, bootstrap_target(h, label, w, mode));
}

LossOutput mixup_ce_loss(std::span<const double> logits, int label_i, int label_j, double gamma) {
  return bsm_loss(logits, label_i, label_j, gamma, 0.0, 0.0);
}

LossOutput bsm_loss(std::span<const double> logits, int label_i, int label_j, double gamma, double w_i, double w_j,
                    Bootstrap mode) {
  check_label(label_i, logits.size());
  check_label(label_j, logits.size());
  require(gamma >= 0.0 && gamma <= 1.0, "mixing coefficient must lie in [0, 1]");
  require(w_i >= 0.0 && w_i <= 1.0 && w_j >= 0.0 && w_j <= 1.0, "bootstrap weights must lie in [0, 1]");

  const auto h = softmax(logits);
  const auto t_i = bootstrap_target(h, label_i, w_i, mode);
  const auto t_j = bootstrap_target(h, label_j, w_j, mode);
  const auto part_i = soft_target_ce(logits, t_i);
  const auto part_j = soft_target_ce(logits, t_j);

  LossOutput out;
  out.value = gamma * part_i.value + (1.0 - gamma) * part_j.value;
  out.grad_logits.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k)
    out.grad_logits[k] = gamma * part_i.grad_logits[k] + (1.0 - gamma) * part_j.grad_logits[k];
  return out;
}

}  // namespace bsm
