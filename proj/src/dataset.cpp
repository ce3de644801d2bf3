// SPDX-License-Identifier: Apache-2.0
#include "bsm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bsm/error.hpp"
#include "bsm/rng.hpp"

namespace bsm {

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "two_moons") return DatasetKind::two_moons;
  if (name == "blobs") return DatasetKind::blobs;
  fail(ErrorCode::invalid_input, "unknown dataset kind '" + name + "'");
}

std::string to_string(DatasetKind kind) { return kind == DatasetKind::two_moons ? "two_moons" : "blobs"; }

void DatasetSpec::validate() const {
  require(n_train >= 2 && n_val >= 2, "n_train and n_val must be at least 2");
  require(n_train % 2 == 0 && n_val % 2 == 0, "n_train and n_val must be even (balanced classes)");
  require(generator_noise >= 0.0, "generator noise must be nonnegative");
}

LabeledSet generate_dataset(DatasetKind kind, int n, double generator_noise, std::uint64_t seed) {
  require(n >= 4 && n % 2 == 0, "dataset size must be even and at least 4");
  require(generator_noise >= 0.0, "generator noise must be nonnegative");
  Rng rng(seed);

  Matrix raw(n, 2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int y = i < n / 2 ? 0 : 1;
    double x0 = 0.0, x1 = 0.0;
    if (kind == DatasetKind::two_moons) {
      const double t = rng.uniform(0.0, std::numbers::pi);
      if (y == 0) {
        x0 = std::cos(t);
        x1 = std::sin(t);
      } else {
        x0 = 1.0 - std::cos(t);
        x1 = 0.5 - std::sin(t);
      }
    } else {
      x0 = x1 = (y == 0) ? -1.0 : 1.0;
    }
    if (generator_noise > 0.0) {
      x0 += rng.normal(0.0, generator_noise);
      x1 += rng.normal(0.0, generator_noise);
    }
    raw(i, 0) = x0;
    raw(i, 1) = x1;
    labels[static_cast<std::size_t>(i)] = y;
  }

  const auto order = rng.permutation(static_cast<std::size_t>(n));
  LabeledSet out;
  out.inputs.resize(n, 2);
  out.clean_labels.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.inputs.row(static_cast<Eigen::Index>(i)) = raw.row(static_cast<Eigen::Index>(order[i]));
    out.clean_labels[i] = labels[order[i]];
  }
  out.observed_labels = out.clean_labels;
  return out;
}

NoisyLabels inject_label_noise(std::span<const int> labels, double rate, std::uint64_t seed) {
  require(rate >= 0.0 && rate <= 1.0, "noise rate must lie in [0, 1]");
  NoisyLabels out;
  out.labels.assign(labels.begin(), labels.end());
  const auto count = static_cast<std::size_t>(std::floor(rate * static_cast<double>(labels.size())));
  if (count == 0) return out;

  Rng rng(seed);
  auto order = rng.permutation(labels.size());
  out.flipped.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(out.flipped.begin(), out.flipped.end());
  for (std::size_t i : out.flipped) {
    require(out.labels[i] == 0 || out.labels[i] == 1, "label flipping is defined for binary labels");
    out.labels[i] = 1 - out.labels[i];
  }
  return out;
}

Dataset build_dataset(const DatasetSpec& spec, double noise_rate, std::uint64_t seed) {
  spec.validate();
  Dataset d;
  d.train = generate_dataset(spec.kind, spec.n_train, spec.generator_noise, derive_seed(seed, 101));
  d.val = generate_dataset(spec.kind, spec.n_val, spec.generator_noise, derive_seed(seed, 102));
  auto noisy = inject_label_noise(d.train.clean_labels, noise_rate, derive_seed(seed, 103));
  d.train.observed_labels = std::move(noisy.labels);
  d.train.flipped = std::move(noisy.flipped);
  return d;
}

std::vector<double> column_stddev(const Matrix& inputs) {
  require(inputs.rows() > 0, "no rows");
  std::vector<double> out(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
    const double mean = inputs.col(c).mean();
    out[static_cast<std::size_t>(c)] =
        std::sqrt((inputs.col(c).array() - mean).square().sum() / static_cast<double>(inputs.rows()));
  }
  return out;
}

}  // namespace bsm
