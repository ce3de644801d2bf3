// SPDX-License-Identifier: Apache-2.0
#pragma once

// Minibatch training of the MLP under one of four regimes:
//   ce        plain cross-entropy
//   ce_aug    cross-entropy on perturbed inputs
//   mixup_ce  cross-entropy on mixup pairs
//   bsm       bootstrapping loss on mixup pairs, per-sample weights from a
//             Beta mixture refit on every epoch's losses
// Adam, exponential per-epoch learning-rate decay, and early stopping on
// validation accuracy with best-checkpoint restore.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "bsm/augment.hpp"
#include "bsm/dataset.hpp"
#include "bsm/losses.hpp"
#include "bsm/mlp.hpp"
#include "bsm/noise_model.hpp"

namespace bsm {

enum class Method { ce, ce_aug, mixup_ce, bsm };

Method parse_method(const std::string& name);
std::string to_string(Method method);

struct TrainConfig {
  Method method = Method::ce;
  double alpha = 0.3;
  double noise_rate = 0.0;
  double learning_rate = 5e-4;
  double lr_decay = 0.95;
  double weight_decay = 5e-4;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 20;
  int warmup_epochs = 1;
  int bmm_iterations = 10;
  bool augment = false;  // perturb training inputs; implied by ce_aug
  Bootstrap bootstrap = Bootstrap::hard;
  PerturbationPolicy policy{0.05, 0.05};
  MlpShape shape;
  DatasetSpec dataset;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;   // mean minibatch objective
  double clean_ce = 0.0;     // end-of-epoch CE on samples whose label was not flipped
  double flipped_ce = 0.0;   // same on flipped samples; NaN when none were flipped
  double val_accuracy = 0.0;
  int weights_from_epoch = -1;  // bsm: epoch whose fit supplied this epoch's w (0 = warm-up zeros)
  double mean_weight = 0.0;     // bsm: mean w used during this epoch
  std::optional<BetaMixtureModel> bmm;  // bsm: fit at the end of this epoch
};

struct TrainLog {
  std::string method;
  std::uint64_t seed = 0;
  int member = 0;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  bool early_stopped = false;
};

nlohmann::json to_json(const TrainLog& log);

struct TrainHooks {
  /// Replaces fit_bmm when set; receives normalized losses.
  std::function<BetaMixtureModel(std::span<const double>)> fit_noise_model;
};

struct TrainResult {
  MlpModel model;  // best-validation-accuracy checkpoint
  TrainLog log;
};

/// `member` selects an independent random stream for ensemble members; the
/// data are shared.
TrainResult train(const TrainConfig& config, const Dataset& data, int member = 0, const TrainHooks& hooks = {});

/// Per-sample cross-entropy of the eval-mode network.
std::vector<double> per_sample_ce(const MlpModel& model, const Matrix& inputs, std::span<const int> labels);

}  // namespace bsm
