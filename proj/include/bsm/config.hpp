// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment configuration: flat `key = value` text with dotted section
// names, `#` comments. Only `train.method` is required; every other key has
// a default. Lists are comma separated.
//
//   train.method = bsm
//   train.noise_rate = 0.2
//   estimator.kind = tta
//   estimator.repeats = 64
//   analysis.fractions = 0, 0.1, 0.2, 0.3

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bsm/trainer.hpp"

namespace bsm {

enum class EstimatorKind { single, ensemble, mc_dropout, tta };

EstimatorKind parse_estimator_kind(const std::string& name);
std::string to_string(EstimatorKind kind);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::single;
  int members = 5;      // ensemble
  int passes = 16;      // mc_dropout
  int repeats = 0;      // tta
  double tau_inv = 0.0; // mc_dropout
};

struct AnalysisConfig {
  double bin_width = 0.1;
  std::vector<double> fractions{0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> thresholds{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  double domain_shift = 3.0;  // validation inputs moved by this many training stddevs per dimension
};

struct ExperimentConfig {
  TrainConfig train;
  EstimatorConfig estimator;
  AnalysisConfig analysis;
  std::string output_dir = "bsm_out";
  bool write_csv = true;
  bool write_json = true;
  std::string load_models_dir;  // when set, models are read from here instead of trained

  int model_count() const { return estimator.kind == EstimatorKind::ensemble ? estimator.members : 1; }
  void validate() const;
};

/// Parses config text. Errors are parse_error and name the offending key or
/// line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets one dotted key from its text form.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& config, const std::string& key);

/// Every recognized key, in canonical order.
const std::vector<std::string>& config_keys();

/// All keys except output settings, one `key = value` per line. Two configs
/// with the same canonical text produce the same results.
std::string canonical_text(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical text, 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace bsm
