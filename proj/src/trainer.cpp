// SPDX-License-Identifier: Apache-2.0
#include "bsm/trainer.hpp"

#include <cmath>
#include <limits>


#include "bsm/error.hpp"
#include "bsm/prob_metrics.hpp"
#include "bsm/rng.hpp"

namespace bsm {

namespace {

enum Stream : std::uint64_t { kInit = 1, kShuffle, kMix, kDropout, kAugment };

std::uint64_t member_stream(int member, Stream s) { return 16u * static_cast<std::uint64_t>(member) + s; }

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

double mean_of(std::span<const double> v, std::span<const std::size_t> idx) {
  if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (std::size_t i : idx) s += v[i];
  return s / static_cast<double>(idx.size());
}

double eval_accuracy(const MlpModel& model, const LabeledSet& set) {
  const auto logits = forward(model, set.inputs, false).logits;
  std::size_t hits = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r)
    if (static_cast<int>(argmax(row_span(logits, r))) == set.clean_labels[static_cast<std::size_t>(r)]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(set.size());
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "ce") return Method::ce;
  if (name == "ce_aug") return Method::ce_aug;
  if (name == "mixup_ce") return Method::mixup_ce;
  if (name == "bsm") return Method::bsm;
  fail(ErrorCode::invalid_input, "unknown method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::ce: return "ce";
    case Method::ce_aug: return "ce_aug";
    case Method::mixup_ce: return "mixup_ce";
    case Method::bsm: return "bsm";
  }
  return "?";
}

void TrainConfig::validate() const {
  require(alpha > 0.0, "train.alpha must be positive");
  require(noise_rate >= 0.0 && noise_rate <= 1.0, "train.noise_rate must lie in [0, 1]");
  require(learning_rate >= 0.0, "train.learning_rate must be nonnegative");
  require(lr_decay > 0.0 && lr_decay <= 1.0, "train.lr_decay must lie in (0, 1]");
  require(weight_decay >= 0.0, "train.weight_decay must be nonnegative");
  require(batch_size >= 1, "train.batch_size must be positive");
  require(max_epochs >= 1, "train.max_epochs must be positive");
  require(patience >= 1, "train.patience must be positive");
  require(warmup_epochs >= 0, "train.warmup_epochs must be nonnegative");
  require(bmm_iterations >= 1, "train.bmm_iterations must be positive");
  policy.validate();
  shape.validate();
  dataset.validate();
}

std::vector<double> per_sample_ce(const MlpModel& model, const Matrix& inputs, std::span<const int> labels) {
  const auto logits = forward(model, inputs, false).logits;
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = ce_loss(row_span(logits, static_cast<Eigen::Index>(i)), labels[i]).value;
  return out;
}

TrainResult train(const TrainConfig& config, const Dataset& data, int member, const TrainHooks& hooks) {
  config.validate();
  const auto& train_set = data.train;
  const std::size_t n = train_set.size();
  require(n >= 2 && data.val.size() >= 1, "training needs at least two training and one validation sample");
  require(train_set.inputs.cols() == config.shape.input_dim, "dataset width does not match the network input");

  Rng shuffle_rng(derive_seed(config.seed, member_stream(member, kShuffle)));
  Rng mix_rng(derive_seed(config.seed, member_stream(member, kMix)));
  Rng dropout_rng(derive_seed(config.seed, member_stream(member, kDropout)));
  Rng augment_rng(derive_seed(config.seed, member_stream(member, kAugment)));

  MlpModel model = kaiming_init(config.shape, derive_seed(config.seed, member_stream(member, kInit)));
  Adam adam(model.parameter_count());

  const bool mixes = config.method == Method::mixup_ce || config.method == Method::bsm;
  const bool perturbs = config.augment || config.method == Method::ce_aug;
  const bool bootstraps = config.method == Method::bsm;

  std::vector<std::size_t> clean_idx;
  {
    std::size_t f = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (f < train_set.flipped.size() && train_set.flipped[f] == i) {
        ++f;
        continue;
      }
      clean_idx.push_back(i);
    }
  }

  std::vector<double> weights(n, 0.0);
  int weights_from = 0;

  TrainResult result;
  auto& log = result.log;
  log.method = to_string(config.method);
  log.seed = config.seed;
  log.member = member;
  result.model = model;
  double best_acc = -1.0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = config.learning_rate * std::pow(config.lr_decay, epoch - 1);
    if (bootstraps) {
      rec.weights_from_epoch = weights_from;
      double s = 0.0;
      for (double w : weights) s += w;
      rec.mean_weight = s / static_cast<double>(n);
    }

    const auto order = shuffle_rng.permutation(n);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const auto b = static_cast<Eigen::Index>(idx.size());

      Matrix x = gather_rows(train_set.inputs, idx);
      std::vector<int> y(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) y[i] = train_set.observed_labels[idx[i]];
      if (perturbs) x = perturb_rows(x, config.policy, augment_rng);

      std::vector<MixupPair> pairs;
      if (mixes && idx.size() >= 2) {
        pairs = mixup_batch(x, y, config.alpha, mix_rng);
        for (Eigen::Index r = 0; r < b; ++r) {
          const auto& mixed = pairs[static_cast<std::size_t>(r)].mixed_input;
          std::copy(mixed.begin(), mixed.end(), row_span(x, r).begin());
        }
      }

      auto fwd = forward(model, x, true, &dropout_rng);
      Matrix grad(b, fwd.logits.cols());
      double batch_loss = 0.0;
      for (Eigen::Index r = 0; r < b; ++r) {
        const auto logits = row_span(fwd.logits, r);
        const auto i = static_cast<std::size_t>(r);
        LossOutput out;
        if (pairs.empty()) {
          out = bootstraps ? bs_loss(logits, y[i], weights[idx[i]], config.bootstrap) : ce_loss(logits, y[i]);
        } else {
          const auto& p = pairs[i];
          out = bootstraps ? bsm_loss(logits, p.label_i, p.label_j, p.gamma, weights[idx[p.index_i]],
                                      weights[idx[p.index_j]], config.bootstrap)
                           : mixup_ce_loss(logits, p.label_i, p.label_j, p.gamma);
        }
        if (!std::isfinite(out.value))
          fail(ErrorCode::training_divergence, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                                   std::to_string(batches));
        batch_loss += out.value;
        for (std::size_t k = 0; k < out.grad_logits.size(); ++k)
          grad(r, static_cast<Eigen::Index>(k)) = out.grad_logits[k] / static_cast<double>(b);
      }
      backward_step(model, fwd.cache, grad, adam, rec.learning_rate, config.weight_decay);
      if (!all_finite(model))
        fail(ErrorCode::training_divergence, "non-finite parameters after epoch " + std::to_string(epoch));
      loss_sum += batch_loss / static_cast<double>(b);
      ++batches;
    }
    rec.train_loss = loss_sum / static_cast<double>(batches);

    // No-gradient pass on the original inputs: per-sample losses for the
    // noise model and the clean/flipped diagnostics.
    const auto losses = per_sample_ce(model, train_set.inputs, train_set.observed_labels);
    rec.clean_ce = mean_of(losses, clean_idx);
    rec.flipped_ce = mean_of(losses, train_set.flipped);
    if (bootstraps) {
      const auto normalized = normalize_losses(losses);
      const BetaMixtureModel bmm = hooks.fit_noise_model
                                       ? hooks.fit_noise_model(normalized)
                                       : fit_bmm(normalized, config.bmm_iterations, config.seed);
      rec.bmm = bmm;
      if (epoch >= config.warmup_epochs) {
        for (std::size_t i = 0; i < n; ++i) weights[i] = noisy_posterior(bmm, normalized[i]);
        weights_from = epoch;
      }
    }

    rec.val_accuracy = eval_accuracy(model, data.val);
    log.epochs.push_back(rec);
    if (rec.val_accuracy > best_acc) {
      best_acc = rec.val_accuracy;
      log.best_epoch = epoch;
      result.model = model;
    } else if (epoch - log.best_epoch >= config.patience) {
      log.early_stopped = true;
      break;
    }
  }
  log.best_val_accuracy = best_acc;
  return result;
}

nlohmann::json to_json(const TrainLog& log) {
  nlohmann::json j;
  j["method"] = log.method;
  j["seed"] = log.seed;
  j["member"] = log.member;
  j["best_epoch"] = log.best_epoch;
  j["best_val_accuracy"] = log.best_val_accuracy;
  j["early_stopped"] = log.early_stopped;
  auto& epochs = j["epochs"] = nlohmann::json::array();
  for (const auto& e : log.epochs) {
    nlohmann::json r;
    r["epoch"] = e.epoch;
    r["learning_rate"] = e.learning_rate;
    r["train_loss"] = e.train_loss;
    r["clean_ce"] = e.clean_ce;
    r["flipped_ce"] = std::isnan(e.flipped_ce) ? nlohmann::json(nullptr) : nlohmann::json(e.flipped_ce);
    r["val_accuracy"] = e.val_accuracy;
    if (e.weights_from_epoch >= 0) {
      r["weights_from_epoch"] = e.weights_from_epoch;
      r["mean_weight"] = e.mean_weight;
    }
    if (e.bmm) {
      r["bmm"] = {{"clean_alpha", e.bmm->clean.alpha}, {"clean_beta", e.bmm->clean.beta},
                  {"noisy_alpha", e.bmm->noisy.alpha}, {"noisy_beta", e.bmm->noisy.beta},
                  {"pi_clean", e.bmm->pi_clean},       {"uninformative", e.bmm->uninformative}};
    }
    epochs.push_back(std::move(r));
  }
  return j;
}

}  // namespace bsm
