// SPDX-License-Identifier: Apache-2.0
#include "bsm/prob_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bsm/error.hpp"

namespace bsm {

namespace {

void check_row(std::span<const double> row) {
  require(!row.empty(), "probability row is empty");
  double sum = 0.0;
  for (double p : row) {
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "probability outside [0,1]");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= kRowSumTolerance,
          "probability row sums to " + std::to_string(sum) + ", expected 1");
}

void require_nonempty(const PredictionBatch& batch) {
  require(batch.size() > 0, "prediction batch is empty");
}

}  // namespace

void validate(const PredictionBatch& batch) {
  require(static_cast<std::size_t>(batch.probs.rows()) == batch.labels.size(),
          "probs has " + std::to_string(batch.probs.rows()) + " rows but " +
              std::to_string(batch.labels.size()) + " labels");
  require(batch.probs.cols() >= 1 || batch.size() == 0, "probs has no columns");
  const auto k = static_cast<int>(batch.num_classes());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    check_row(batch.row(i));
    require(batch.labels[i] >= 0 && batch.labels[i] < k, "label out of range at row " + std::to_string(i));
  }
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = k;
  return best;
}

double predictive_entropy(std::span<const double> probs_row) {
  check_row(probs_row);
  double h = 0.0;
  for (double p : probs_row)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::size_t confidence_bin(double confidence, double bin_width, std::size_t num_bins) {
  if (confidence <= 0.0) return 0;
  const double m = std::ceil(confidence / bin_width) - 1.0;
  if (m < 0.0) return 0;
  return std::min(static_cast<std::size_t>(m), num_bins - 1);
}

CalibrationResult expected_calibration_error(const PredictionBatch& batch, double bin_width) {
  require(bin_width > 0.0 && bin_width <= 1.0, "bin_width must lie in (0, 1]");
  validate(batch);
  require_nonempty(batch);

  const auto num_bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
  std::vector<double> conf_sum(num_bins, 0.0);
  std::vector<double> correct_sum(num_bins, 0.0);
  std::vector<std::size_t> counts(num_bins, 0);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = batch.row(i);
    const std::size_t pred = argmax(row);
    const double conf = row[pred];
    const std::size_t b = confidence_bin(conf, bin_width, num_bins);
    conf_sum[b] += conf;
    correct_sum[b] += (static_cast<int>(pred) == batch.labels[i]) ? 1.0 : 0.0;
    ++counts[b];
  }

  CalibrationResult out;
  out.reliability.bin_width = bin_width;
  out.reliability.bins.resize(num_bins);
  const double n = static_cast<double>(batch.size());
  for (std::size_t b = 0; b < num_bins; ++b) {
    auto& bin = out.reliability.bins[b];
    bin.lo = static_cast<double>(b) * bin_width;
    bin.hi = std::min(static_cast<double>(b + 1) * bin_width, 1.0);
    bin.count = counts[b];
    if (counts[b] == 0) continue;
    const double c = static_cast<double>(counts[b]);
    bin.conf_mean = conf_sum[b] / c;
    bin.acc = correct_sum[b] / c;
    out.ece += (c / n) * std::abs(bin.conf_mean - bin.acc);
  }
  return out;
}

double negative_log_likelihood_binary(const PredictionBatch& batch) {
  if (batch.num_classes() != 2)
    fail(ErrorCode::unsupported_shape, "binary NLL needs K = 2, got K = " + std::to_string(batch.num_classes()));
  validate(batch);
  require_nonempty(batch);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double p = std::clamp(batch.row(i)[static_cast<std::size_t>(batch.labels[i])], kLogClamp, 1.0 - kLogClamp);
    total -= std::log(p);
  }
  return total / static_cast<double>(batch.size());
}

double brier_score(const PredictionBatch& batch) {
  validate(batch);
  require_nonempty(batch);
  const std::size_t k = batch.num_classes();
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = batch.row(i);
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double t = (static_cast<int>(c) == batch.labels[i]) ? 1.0 : 0.0;
      s += (t - row[c]) * (t - row[c]);
    }
    total += s / static_cast<double>(k);
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), "scores and labels differ in length");
  std::size_t n_pos = 0;
  for (int y : labels) {
    require(y == 0 || y == 1, "ROC-AUC labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(ErrorCode::undefined_metric, "ROC-AUC needs both classes present");

  const auto ranks = average_ranks(scores);
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) pos_rank_sum += ranks[i];
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double accuracy(const PredictionBatch& batch) {
  validate(batch);
  require_nonempty(batch);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (static_cast<int>(argmax(batch.row(i))) == batch.labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

std::vector<bool> correctness(const PredictionBatch& batch) {
  std::vector<bool> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    out[i] = static_cast<int>(argmax(batch.row(i))) == batch.labels[i];
  return out;
}

std::vector<double> positive_scores(const PredictionBatch& batch) {
  if (batch.num_classes() != 2)
    fail(ErrorCode::unsupported_shape, "positive-class score needs K = 2");
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = batch.row(i)[1];
  return out;
}

}  // namespace bsm
