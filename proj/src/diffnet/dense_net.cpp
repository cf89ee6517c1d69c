/*
 * Copyright 2026 The ntn-gai Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ntn/diffnet/dense_net.hpp"

#include <cmath>
#include <string>

#include "ntn/common/errors.hpp"

namespace ntn::diffnet {

namespace {

void apply_activation(Activation act, Matrix& z) {
  switch (act) {
    case Activation::identity:
      break;
    case Activation::relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::tanh:
      z = fast_tanh(z);
      break;
    case Activation::sigmoid:
      z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      break;
    case Activation::exp:
      z = z.array().exp().matrix();
      break;
    case Activation::softmax:
      z = softmax_columns(z);
      break;
  }
}

// Gradient w.r.t. the pre-activation given the post-activation y and dL/dy.
Matrix activation_backward(Activation act, const Matrix& y, const Matrix& dy) {
  switch (act) {
    case Activation::identity:
      return dy;
    case Activation::relu:
      return (y.array() > 0.0).select(dy, 0.0);
    case Activation::tanh:
      return (dy.array() * (1.0 - y.array().square())).matrix();
    case Activation::sigmoid:
      return (dy.array() * y.array() * (1.0 - y.array())).matrix();
    case Activation::exp:
      return (dy.array() * y.array()).matrix();
    case Activation::softmax: {
      Matrix dz(y.rows(), y.cols());
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        const double inner = y.col(c).dot(dy.col(c));
        dz.col(c) = (y.col(c).array() * (dy.col(c).array() - inner)).matrix();
      }
      return dz;
    }
  }
  return dy;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::exp: return "exp";
    case Activation::softmax: return "softmax";
  }
  return "unknown";
}

Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    out.col(c) = (logits.col(c).array() - m).exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

Matrix fast_tanh(const Matrix& x) { return (1.0 - 2.0 / ((2.0 * x.array()).exp() + 1.0)).matrix(); }

void Gradients::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : bias) b.setZero();
}

void Gradients::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : bias) b *= factor;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.weights.size() != weights.size()) throw ConfigError("gradient layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    bias[l] += other.bias[l];
  }
  return *this;
}

std::optional<std::size_t> Gradients::first_non_finite_layer() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !bias[l].allFinite()) return l;
  }
  return std::nullopt;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) s += weights[l].squaredNorm() + bias[l].squaredNorm();
  return s;
}

DenseNet::DenseNet(std::span<const LayerShape> shapes, Rng& rng) {
  if (shapes.empty()) throw ConfigError("DenseNet needs at least one layer");
  layers_.reserve(shapes.size());
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& s = shapes[l];
    if (s.inputs <= 0 || s.outputs <= 0) throw ConfigError("layer widths must be positive");
    if (l > 0 && shapes[l - 1].outputs != s.inputs) {
      throw ConfigError("layer " + std::to_string(l) + " input width " + std::to_string(s.inputs) +
                        " does not chain with previous output width " +
                        std::to_string(shapes[l - 1].outputs));
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.inputs));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer layer;
    layer.weights.resize(s.outputs, s.inputs);
    layer.bias.resize(s.outputs);
    for (Eigen::Index c = 0; c < s.inputs; ++c)
      for (Eigen::Index r = 0; r < s.outputs; ++r) layer.weights(r, c) = u(rng);
    for (Eigen::Index r = 0; r < s.outputs; ++r) layer.bias(r) = u(rng);
    layer.activation = s.activation;
    layers_.push_back(std::move(layer));
  }
}

Eigen::Index DenseNet::input_width() const { return layers_.empty() ? 0 : layers_.front().weights.cols(); }

Eigen::Index DenseNet::output_width() const { return layers_.empty() ? 0 : layers_.back().weights.rows(); }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool DenseNet::all_finite() const {
  for (const auto& l : layers_)
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

Vector DenseNet::forward(const Vector& input) const {
  Matrix batch = input;
  return forward(batch).col(0);
}

Matrix DenseNet::forward(const Matrix& batch) const {
  if (batch.rows() != input_width()) {
    throw ConfigError("input width " + std::to_string(batch.rows()) + " does not match network input width " +
                      std::to_string(input_width()));
  }
  Matrix x = batch;
  for (const auto& layer : layers_) {
    Matrix z = layer.weights * x;
    z.colwise() += layer.bias;
    apply_activation(layer.activation, z);
    x = std::move(z);
  }
  return x;
}

Matrix DenseNet::forward(const Matrix& batch, GradientTape& tape) const {
  if (batch.rows() != input_width()) {
    throw ConfigError("input width " + std::to_string(batch.rows()) + " does not match network input width " +
                      std::to_string(input_width()));
  }
  tape.inputs_.clear();
  tape.outputs_.clear();
  tape.inputs_.reserve(layers_.size());
  tape.outputs_.reserve(layers_.size());
  Matrix x = batch;
  for (const auto& layer : layers_) {
    Matrix z = layer.weights * x;
    z.colwise() += layer.bias;
    apply_activation(layer.activation, z);
    tape.inputs_.push_back(std::move(x));
    x = z;
    tape.outputs_.push_back(std::move(z));
  }
  return x;
}

Matrix DenseNet::backward(const GradientTape& tape, const Matrix& output_grad, Gradients& grads) const {
  if (tape.inputs_.size() != layers_.size()) throw ConfigError("tape was not recorded by this network");
  if (output_grad.rows() != output_width() || output_grad.cols() != tape.batch_size()) {
    throw ConfigError("output gradient shape " + std::to_string(output_grad.rows()) + "x" +
                      std::to_string(output_grad.cols()) + " does not match network output " +
                      std::to_string(output_width()) + "x" + std::to_string(tape.batch_size()));
  }
  if (grads.weights.size() != layers_.size()) grads = zero_gradients();
  Matrix dy = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& layer = layers_[k];
    const Matrix dz = activation_backward(layer.activation, tape.outputs_[k], dy);
    grads.weights[k].noalias() += dz * tape.inputs_[k].transpose();
    grads.bias[k] += dz.rowwise().sum();
    dy.noalias() = layer.weights.transpose() * dz;
  }
  return dy;
}

Gradients DenseNet::zero_gradients() const {
  Gradients g;
  g.weights.reserve(layers_.size());
  g.bias.reserve(layers_.size());
  for (const auto& l : layers_) {
    g.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

void DenseNet::soft_update_from(const DenseNet& online, double tau) {
  if (online.layers_.size() != layers_.size()) throw ConfigError("soft update between different architectures");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weights = tau * online.layers_[l].weights + (1.0 - tau) * layers_[l].weights;
    layers_[l].bias = tau * online.layers_[l].bias + (1.0 - tau) * layers_[l].bias;
  }
}

}  // namespace ntn::diffnet
