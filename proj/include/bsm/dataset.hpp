// SPDX-License-Identifier: Apache-2.0
#pragma once

// Synthetic balanced binary datasets and symmetric label-noise injection.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bsm/matrix.hpp"

namespace bsm {

enum class DatasetKind { two_moons, blobs };

DatasetKind parse_dataset_kind(const std::string& name);
std::string to_string(DatasetKind kind);

/// One split. `observed_labels` differ from `clean_labels` exactly on
/// `flipped` (sorted ascending).
struct LabeledSet {
  Matrix inputs;
  std::vector<int> clean_labels;
  std::vector<int> observed_labels;
  std::vector<std::size_t> flipped;

  std::size_t size() const { return clean_labels.size(); }
};

/// Training split may carry injected noise; validation never does.
struct Dataset {
  LabeledSet train;
  LabeledSet val;
};

struct DatasetSpec {
  DatasetKind kind = DatasetKind::two_moons;
  int n_train = 2000;
  int n_val = 500;
  double generator_noise = 0.2;

  void validate() const;
};

/// n/2 samples per class, rows shuffled. two_moons: interleaving half
/// circles; blobs: Gaussians around (-1,-1) and (1,1). Jitter std is
/// `generator_noise`.
LabeledSet generate_dataset(DatasetKind kind, int n, double generator_noise, std::uint64_t seed);

struct NoisyLabels {
  std::vector<int> labels;
  std::vector<std::size_t> flipped;
};

/// Flips floor(rate * N) binary labels picked uniformly without replacement.
NoisyLabels inject_label_noise(std::span<const int> labels, double rate, std::uint64_t seed);

/// Train and validation splits drawn independently from `seed`, label noise
/// injected into the training split only.
Dataset build_dataset(const DatasetSpec& spec, double noise_rate, std::uint64_t seed);

/// Per-dimension population standard deviation of the rows.
std::vector<double> column_stddev(const Matrix& inputs);

}  // namespace bsm
