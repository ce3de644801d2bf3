// SPDX-License-Identifier: Apache-2.0
#include "bsm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "bsm/error.hpp"
#include "bsm/prob_metrics.hpp"

namespace bsm {

namespace {

double accuracy_of(const std::vector<bool>& correct, std::span<const std::size_t> idx) {
  std::size_t hits = 0;
  for (std::size_t i : idx) hits += correct[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) fail(ErrorCode::undefined_metric, "correlation undefined for a constant vector");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

ReferralCurve referral_curve(std::span<const double> uncertainties, const std::vector<bool>& correct,
                             std::span<const double> scores, std::span<const int> labels,
                             std::span<const double> fractions) {
  const std::size_t n = uncertainties.size();
  require(correct.size() == n && scores.size() == n && labels.size() == n, "referral inputs differ in length");
  for (double f : fractions) require(f >= 0.0 && f < 1.0, "referral fractions must lie in [0, 1)");

  // most uncertain first; equal uncertainty -> lower index first
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return uncertainties[a] > uncertainties[b]; });

  std::vector<double> sorted(fractions.begin(), fractions.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  ReferralCurve curve;
  for (double f : sorted) {
    const auto rejected = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n) - 1e-9));
    if (rejected >= n) {
      curve.diagnostics.push_back("fraction " + std::to_string(f) + ": no sample retained");
      continue;
    }
    const std::size_t kept = n - rejected;
    if (!curve.points.empty() && kept >= curve.points.back().n_retained) {
      curve.diagnostics.push_back("fraction " + std::to_string(f) + ": retains the same samples as fraction " +
                                  std::to_string(curve.points.back().rejected_fraction));
      continue;
    }
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(rejected), order.end());
    std::sort(idx.begin(), idx.end());

    ReferralPoint pt;
    pt.rejected_fraction = f;
    pt.n_retained = kept;
    pt.accuracy = accuracy_of(correct, idx);
    std::vector<double> s;
    std::vector<int> y;
    bool has_pos = false, has_neg = false;
    for (std::size_t i : idx) {
      s.push_back(scores[i]);
      y.push_back(labels[i]);
      (labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (has_pos && has_neg) pt.roc_auc = roc_auc(s, y);
    curve.points.push_back(pt);
  }
  return curve;
}

ThresholdCurve threshold_curve(std::span<const double> uncertainties, const std::vector<bool>& correct,
                               std::span<const double> thresholds) {
  require(correct.size() == uncertainties.size(), "threshold inputs differ in length");
  ThresholdCurve curve;
  for (double t : thresholds) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < uncertainties.size(); ++i)
      if (uncertainties[i] <= t) idx.push_back(i);
    if (idx.empty()) {
      curve.diagnostics.push_back("threshold " + std::to_string(t) + ": no sample retained");
      continue;
    }
    curve.points.push_back({t, accuracy_of(correct, idx), idx.size()});
  }
  return curve;
}

double min_cosine_distance(std::span<const double> query, const Matrix& bank) {
  require(static_cast<Eigen::Index>(query.size()) == bank.cols(), "query and bank widths differ");
  const double qn = norm(query);
  require(qn > 0.0, "cosine distance undefined for a zero query vector");
  double best = -2.0;
  bool any = false;
  for (Eigen::Index r = 0; r < bank.rows(); ++r) {
    const auto row = row_span(bank, r);
    const double rn = norm(row);
    if (rn == 0.0) continue;
    double dot = 0.0;
    for (std::size_t d = 0; d < query.size(); ++d) dot += query[d] * row[d];
    best = std::max(best, std::clamp(dot / (qn * rn), -1.0, 1.0));
    any = true;
  }
  require(any, "cosine distance needs at least one nonzero bank row");
  return 1.0 - best;
}

DistanceAnalysis distance_records(const Matrix& query_features, const Matrix& train_features,
                                  std::span<const double> uncertainties, const std::vector<bool>& correct) {
  const auto n = static_cast<std::size_t>(query_features.rows());
  require(uncertainties.size() == n && correct.size() == n, "distance inputs differ in length");
  DistanceAnalysis out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = row_span(query_features, static_cast<Eigen::Index>(i));
    if (norm(q) == 0.0) {
      out.diagnostics.push_back("sample " + std::to_string(i) + ": zero feature vector, skipped");
      continue;
    }
    out.records.push_back({i, min_cosine_distance(q, train_features), uncertainties[i], correct[i]});
  }
  return out;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "spearman inputs differ in length");
  require(x.size() >= 3, "spearman needs at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  Correlation c;
  c.rho = pearson(rx, ry);
  const double dof = static_cast<double>(x.size() - 2);
  const double denom = (1.0 - c.rho) * (1.0 + c.rho);
  if (denom <= 0.0) {
    c.p_value = 0.0;
    return c;
  }
  const double t = c.rho * std::sqrt(dof / denom);
  const boost::math::students_t dist(dof);
  c.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return c;
}

double spearman_exact_p(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "spearman inputs differ in length");
  require(x.size() >= 3 && x.size() <= 10, "exact permutation test supports 3 <= N <= 10");
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  const double observed = std::abs(pearson(rx, ry));
  std::sort(ry.begin(), ry.end());
  std::size_t total = 0, extreme = 0;
  do {
    ++total;
    if (std::abs(pearson(rx, ry)) >= observed - 1e-12) ++extreme;
  } while (std::next_permutation(ry.begin(), ry.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace bsm
