// SPDX-License-Identifier: Apache-2.0
#include "bsm/augment.hpp"

#include <algorithm>
#include <limits>

#include "bsm/error.hpp"

namespace bsm {

void PerturbationPolicy::validate() const {
  require(noise_sigma >= 0.0 && scale_jitter >= 0.0, "perturbation parameters must be nonnegative");
}

double sample_gamma(double alpha, Rng& rng) {
  require(alpha > 0.0, "mixup alpha must be positive");
  for (;;) {
    const double g1 = rng.gamma(alpha);
    const double g2 = rng.gamma(alpha);
    const double s = g1 + g2;
    if (!(s > 0.0)) continue;  // both draws underflowed (tiny alpha)
    const double g = g1 / s;
    // keep the draw strictly inside (0, 1)
    if (g > 0.0 && g < 1.0) return g;
  }
}

std::vector<MixupPair> mixup_batch(const Matrix& inputs, std::span<const int> labels, double alpha, Rng& rng,
                                   std::optional<double> forced_gamma) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  require(n >= 2, "mixup needs at least two samples");
  require(labels.size() == n, "mixup inputs and labels differ in length");

  const auto partner = rng.permutation(n);
  std::vector<MixupPair> pairs(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = pairs[i];
    p.index_i = i;
    p.index_j = partner[i];
    p.label_i = labels[i];
    p.label_j = labels[p.index_j];
    p.gamma = forced_gamma ? *forced_gamma : sample_gamma(alpha, rng);
    const auto xi = row_span(inputs, static_cast<Eigen::Index>(i));
    const auto xj = row_span(inputs, static_cast<Eigen::Index>(p.index_j));
    p.mixed_input.resize(xi.size());
    for (std::size_t d = 0; d < xi.size(); ++d) p.mixed_input[d] = p.gamma * xi[d] + (1.0 - p.gamma) * xj[d];
  }
  return pairs;
}

std::vector<double> perturb(std::span<const double> input, const PerturbationPolicy& policy, Rng& rng) {
  policy.validate();
  std::vector<double> out(input.begin(), input.end());
  if (policy.is_identity()) return out;
  for (std::size_t d = 0; d < out.size(); ++d) {
    if (policy.scale_jitter > 0.0) out[d] *= 1.0 + rng.uniform(-policy.scale_jitter, policy.scale_jitter);
    if (policy.noise_sigma > 0.0) out[d] += rng.normal(0.0, policy.noise_sigma);
  }
  return out;
}

Matrix perturb_rows(const Matrix& inputs, const PerturbationPolicy& policy, Rng& rng) {
  Matrix out(inputs.rows(), inputs.cols());
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    const auto p = perturb(row_span(inputs, r), policy, rng);
    std::copy(p.begin(), p.end(), row_span(out, r).begin());
  }
  return out;
}

}  // namespace bsm
