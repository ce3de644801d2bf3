// SPDX-License-Identifier: Apache-2.0
#include "bsm/estimators.hpp"

#include "bsm/error.hpp"
#include "bsm/losses.hpp"

namespace bsm {

PredictionBatch EstimatorOutput::batch(std::span<const int> labels) const {
  require(labels.size() == static_cast<std::size_t>(mean_probs.rows()), "label count does not match predictions");
  return {mean_probs, std::vector<int>(labels.begin(), labels.end())};
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const auto p = softmax(row_span(logits, r));
    std::copy(p.begin(), p.end(), row_span(out, r).begin());
  }
  return out;
}

EstimatorOutput summarize_passes(std::span<const Matrix> passes, std::optional<double> tau_inv) {
  require(!passes.empty(), "at least one pass is required");
  const auto rows = passes.front().rows();
  const auto cols = passes.front().cols();
  for (const auto& p : passes)
    require(p.rows() == rows && p.cols() == cols, "prediction passes differ in shape");

  const double t = static_cast<double>(passes.size());
  EstimatorOutput out;
  if (passes.size() == 1) {
    out.mean_probs = passes.front();
  } else {
    out.mean_probs = Matrix::Zero(rows, cols);
    for (const auto& p : passes) out.mean_probs += p;
    out.mean_probs /= t;
  }
  out.uncertainty.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r)
    out.uncertainty[static_cast<std::size_t>(r)] = predictive_entropy(row_span(out.mean_probs, r));

  if (tau_inv) {
    require(*tau_inv >= 0.0, "tau_inv must be nonnegative");
    Matrix second = Matrix::Zero(rows, cols);
    for (const auto& p : passes) second += p.cwiseProduct(p);
    second /= t;
    Matrix var = second - out.mean_probs.cwiseProduct(out.mean_probs);
    var.array() += *tau_inv;
    out.variance = std::move(var);
  }
  return out;
}

EstimatorOutput single_forward(const MlpModel& model, const Matrix& inputs) {
  const Matrix probs = softmax_rows(forward(model, inputs, false).logits);
  return summarize_passes(std::span<const Matrix>(&probs, 1));
}

EstimatorOutput ensemble_predict(std::span<const MlpModel> models, const Matrix& inputs) {
  require(!models.empty(), "ensemble needs at least one member");
  const auto& s0 = models.front().shape;
  std::vector<Matrix> passes;
  passes.reserve(models.size());
  for (const auto& m : models) {
    require(m.shape.input_dim == s0.input_dim && m.shape.num_classes == s0.num_classes,
            "ensemble members disagree on input/output shape");
    passes.push_back(softmax_rows(forward(m, inputs, false).logits));
  }
  return summarize_passes(passes);
}

EstimatorOutput mc_dropout_predict(const MlpModel& model, const Matrix& inputs, int passes, double tau_inv, Rng& rng) {
  require(passes >= 1, "MC dropout needs at least one pass");
  std::vector<Matrix> probs;
  probs.reserve(static_cast<std::size_t>(passes));
  for (int t = 0; t < passes; ++t) probs.push_back(softmax_rows(forward(model, inputs, true, &rng).logits));
  return summarize_passes(probs, tau_inv);
}

EstimatorOutput tta_predict(const MlpModel& model, const Matrix& inputs, const PerturbationPolicy& policy, int repeats,
                            Rng& rng) {
  require(repeats >= 0, "TTA repeats must be nonnegative");
  policy.validate();
  // identity copies all equal the original
  if (repeats == 0 || policy.is_identity()) return single_forward(model, inputs);
  std::vector<Matrix> probs;
  probs.reserve(static_cast<std::size_t>(repeats));
  for (int t = 0; t < repeats; ++t)
    probs.push_back(softmax_rows(forward(model, perturb_rows(inputs, policy, rng), false).logits));
  return summarize_passes(probs);
}

}  // namespace bsm
