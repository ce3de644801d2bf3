// SPDX-License-Identifier: Apache-2.0
#include "bsm/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "bsm/error.hpp"

namespace bsm {

namespace {

constexpr const char* kModelMagic = "bsm-mlp";
constexpr int kModelVersion = 1;

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, bool active, Rng* rng) {
  Matrix mask = Matrix::Ones(rows, cols);
  if (!active || rate <= 0.0) return mask;
  require(rng != nullptr, "active dropout needs a random stream");
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) mask(r, c) = rng->bernoulli(keep) ? scale : 0.0;
  return mask;
}

Matrix affine(const Matrix& x, const DenseLayer& layer) {
  Matrix out = x * layer.weight.transpose();
  out.rowwise() += layer.bias.transpose();
  return out;
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') fail(ErrorCode::parse_error, "bad number in model file: " + tok);
  return v;
}

}  // namespace

void MlpShape::validate() const {
  require(input_dim >= 1 && hidden1 >= 1 && hidden2 >= 1 && num_classes >= 2, "invalid network shape");
  require(dropout >= 0.0 && dropout < 1.0, "dropout rate must lie in [0, 1)");
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

MlpModel kaiming_init(const MlpShape& shape, std::uint64_t seed) {
  shape.validate();
  MlpModel model;
  model.shape = shape;
  const std::array<std::pair<int, int>, 3> dims{{{shape.hidden1, shape.input_dim},
                                                 {shape.hidden2, shape.hidden1},
                                                 {shape.num_classes, shape.hidden2}}};
  Rng rng(seed);
  for (std::size_t l = 0; l < 3; ++l) {
    const auto [out, in] = dims[l];
    const double stddev = std::sqrt(2.0 / in);
    auto& layer = model.layers[l];
    layer.weight.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = rng.normal(0.0, stddev);
    layer.bias = Vector::Zero(out);
  }
  return model;
}

ForwardResult forward(const MlpModel& model, const Matrix& inputs, bool dropout_active, Rng* rng) {
  require(inputs.cols() == model.shape.input_dim, "input width does not match the model");
  if (!inputs.allFinite()) fail(ErrorCode::training_divergence, "non-finite network input");
  const double p = model.shape.dropout;

  ForwardResult res;
  auto& c = res.cache;
  c.input = inputs;
  c.pre1 = affine(inputs, model.layers[0]);
  c.act1 = c.pre1.cwiseMax(0.0);
  c.mask1 = dropout_mask(c.act1.rows(), c.act1.cols(), p, dropout_active, rng);
  c.pre2 = affine(c.act1.cwiseProduct(c.mask1), model.layers[1]);
  c.act2 = c.pre2.cwiseMax(0.0);
  c.mask2 = dropout_mask(c.act2.rows(), c.act2.cols(), p, dropout_active, rng);
  res.logits = affine(c.act2.cwiseProduct(c.mask2), model.layers[2]);
  res.features = c.act2;
  if (!res.logits.allFinite()) fail(ErrorCode::training_divergence, "non-finite logits in forward pass");
  return res;
}

Gradients backward(const MlpModel& model, const ForwardCache& c, const Matrix& grad_logits) {
  require(grad_logits.rows() == c.input.rows() && grad_logits.cols() == model.shape.num_classes,
          "gradient shape does not match the forward cache");
  Gradients g;
  const Matrix drop2 = c.act2.cwiseProduct(c.mask2);
  const Matrix drop1 = c.act1.cwiseProduct(c.mask1);

  g.layers[2].weight = grad_logits.transpose() * drop2;
  g.layers[2].bias = grad_logits.colwise().sum().transpose();

  Matrix d2 = (grad_logits * model.layers[2].weight).cwiseProduct(c.mask2);
  d2 = d2.cwiseProduct((c.pre2.array() > 0.0).cast<double>().matrix());
  g.layers[1].weight = d2.transpose() * drop1;
  g.layers[1].bias = d2.colwise().sum().transpose();

  Matrix d1 = (d2 * model.layers[1].weight).cwiseProduct(c.mask1);
  d1 = d1.cwiseProduct((c.pre1.array() > 0.0).cast<double>().matrix());
  g.layers[0].weight = d1.transpose() * c.input;
  g.layers[0].bias = d1.colwise().sum().transpose();
  return g;
}

Adam::Adam(std::size_t num_params, AdamConfig config)
    : config_(config), m_(num_params, 0.0), v_(num_params, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr, double weight_decay) {
  require(params.size() == m_.size() && grads.size() == m_.size(), "Adam state does not match parameter count");
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] -= lr * weight_decay * params[i];
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
  }
}

namespace {

template <typename Layers>
std::vector<double> flatten_layers(const Layers& layers) {
  std::vector<double> flat;
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

}  // namespace

std::vector<double> flatten(const MlpModel& model) { return flatten_layers(model.layers); }
std::vector<double> flatten(const Gradients& grads) { return flatten_layers(grads.layers); }

void unflatten(std::span<const double> flat, MlpModel& model) {
  require(flat.size() == model.parameter_count(), "flat parameter vector has the wrong length");
  std::size_t off = 0;
  for (auto& l : model.layers) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), l.weight.size(), l.weight.data());
    off += static_cast<std::size_t>(l.weight.size());
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), l.bias.size(), l.bias.data());
    off += static_cast<std::size_t>(l.bias.size());
  }
}

void backward_step(MlpModel& model, const ForwardCache& cache, const Matrix& grad_logits, Adam& adam, double lr,
                   double weight_decay) {
  const auto grads = flatten(backward(model, cache, grad_logits));
  auto params = flatten(model);
  adam.step(params, grads, lr, weight_decay);
  unflatten(params, model);
}

bool all_finite(const MlpModel& model) {
  for (const auto& l : model.layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

void write_model(std::ostream& out, const MlpModel& model) {
  const auto& s = model.shape;
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "shape " << s.input_dim << ' ' << s.hidden1 << ' ' << s.hidden2 << ' ' << s.num_classes << ' '
      << hex(s.dropout) << '\n';
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    out << "weight " << l << ' ' << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out << (c ? " " : "") << hex(layer.weight(r, c));
      out << '\n';
    }
    out << "bias " << l << ' ' << layer.bias.size() << '\n';
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << (r ? " " : "") << hex(layer.bias(r));
    out << '\n';
  }
}

MlpModel read_model(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kModelMagic) fail(ErrorCode::parse_error, "not a model file (missing '" + std::string(kModelMagic) + "' header)");
  if (version != kModelVersion) fail(ErrorCode::parse_error, "unsupported model file version " + std::to_string(version));

  MlpModel model;
  std::string tag, tok;
  in >> tag >> model.shape.input_dim >> model.shape.hidden1 >> model.shape.hidden2 >> model.shape.num_classes >> tok;
  if (!in || tag != "shape") fail(ErrorCode::parse_error, "model file: malformed shape line");
  model.shape.dropout = parse_double(tok);
  model.shape.validate();

  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    std::size_t idx = 0;
    Eigen::Index rows = 0, cols = 0;
    in >> tag >> idx >> rows >> cols;
    if (!in || tag != "weight" || idx != l) fail(ErrorCode::parse_error, "model file: malformed weight header");
    auto& layer = model.layers[l];
    layer.weight.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows * cols; ++i) {
      in >> tok;
      layer.weight.data()[i] = parse_double(tok);
    }
    Eigen::Index n = 0;
    in >> tag >> idx >> n;
    if (!in || tag != "bias" || idx != l) fail(ErrorCode::parse_error, "model file: malformed bias header");
    layer.bias.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      in >> tok;
      layer.bias(i) = parse_double(tok);
    }
  }
  if (!in) fail(ErrorCode::parse_error, "model file truncated");
  const auto& s = model.shape;
  const bool consistent = model.layers[0].weight.rows() == s.hidden1 && model.layers[0].weight.cols() == s.input_dim &&
                          model.layers[1].weight.rows() == s.hidden2 && model.layers[1].weight.cols() == s.hidden1 &&
                          model.layers[2].weight.rows() == s.num_classes && model.layers[2].weight.cols() == s.hidden2;
  if (!consistent) fail(ErrorCode::parse_error, "model file: layer sizes disagree with shape line");
  return model;
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  write_model(out, model);
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot read " + path.string());
  return read_model(in);
}

}  // namespace bsm
