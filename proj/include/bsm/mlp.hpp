// SPDX-License-Identifier: Apache-2.0
#pragma once

// Fully-connected classifier D -> H1 -> H2 -> K with ReLU hidden units and
// inverted dropout after each hidden layer, trained by hand-written backprop
// and Adam with decoupled weight decay.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "bsm/matrix.hpp"
#include "bsm/rng.hpp"

namespace bsm {

struct MlpShape {
  int input_dim = 2;
  int hidden1 = 64;
  int hidden2 = 64;
  int num_classes = 2;
  double dropout = 0.2;

  void validate() const;
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
};

struct MlpModel {
  MlpShape shape;
  std::array<DenseLayer, 3> layers;

  std::size_t parameter_count() const;
};

/// Intermediates of a batched forward pass; masks already carry the 1/(1-p)
/// scale (all ones when dropout is inactive).
struct ForwardCache {
  Matrix input;
  Matrix pre1, act1, mask1;
  Matrix pre2, act2, mask2;
};

struct ForwardResult {
  Matrix logits;    // B x K
  Matrix features;  // B x H2, penultimate ReLU activations before dropout
  ForwardCache cache;
};

/// Zero-mean Gaussian weights with variance 2 / fan_in; zero biases.
MlpModel kaiming_init(const MlpShape& shape, std::uint64_t seed);

/// Batched forward. `rng` is only touched when dropout is active and the
/// rate is nonzero; masks are drawn row by row, layer 1 before layer 2.
/// Throws training_divergence on non-finite logits.
ForwardResult forward(const MlpModel& model, const Matrix& inputs, bool dropout_active, Rng* rng = nullptr);

/// Gradient of every parameter, laid out like the model.
struct Gradients {
  std::array<DenseLayer, 3> layers;
};

/// `grad_logits` is dLoss/dlogits for the batch, already scaled by whatever
/// reduction (mean) the caller applied to the loss.
Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& grad_logits);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a flat parameter vector. Decoupled weight decay is applied to
/// the parameters before the moment update: p -= lr * lambda * p.
class Adam {
 public:
  explicit Adam(std::size_t num_params = 0, AdamConfig config = {});

  void step(std::span<double> params, std::span<const double> grads, double lr, double weight_decay);
  long steps() const { return t_; }
  std::size_t size() const { return m_.size(); }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

/// Flattened parameter / gradient views in a fixed order (layer by layer,
/// weight then bias).
std::vector<double> flatten(const MlpModel& model);
std::vector<double> flatten(const Gradients& grads);
void unflatten(std::span<const double> flat, MlpModel& model);

/// backward + one Adam step on the model.
void backward_step(MlpModel& model, const ForwardCache& cache, const Matrix& grad_logits, Adam& adam, double lr,
                   double weight_decay);

bool all_finite(const MlpModel& model);

/// Text format with a version header; values are hex floats so a reload is
/// bit-exact.
void write_model(std::ostream& out, const MlpModel& model);
MlpModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace bsm
