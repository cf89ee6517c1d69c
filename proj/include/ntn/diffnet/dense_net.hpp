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

#ifndef NTN_DIFFNET_DENSE_NET_HPP
#define NTN_DIFFNET_DENSE_NET_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ntn/common/random.hpp"

namespace ntn::diffnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { identity, relu, tanh, sigmoid, exp, softmax };

std::string_view to_string(Activation a);

struct LayerShape {
  Eigen::Index inputs = 0;
  Eigen::Index outputs = 0;
  Activation activation = Activation::identity;
};

struct DenseLayer {
  Matrix weights;  // outputs x inputs
  Vector bias;
  Activation activation = Activation::identity;
};

// Per-parameter accumulator with the same shapes as a DenseNet's layers.
class Gradients {
public:
  std::vector<Matrix> weights;
  std::vector<Vector> bias;

  void set_zero();
  void scale(double factor);
  Gradients& operator+=(const Gradients& other);

  // Index of the first layer holding a NaN or infinity.
  std::optional<std::size_t> first_non_finite_layer() const;
  double squared_norm() const;
};

// Activations recorded by one batched forward pass. Columns are samples.
class GradientTape {
public:
  const Matrix& output() const { return outputs_.back(); }
  const Matrix& input() const { return inputs_.front(); }
  Eigen::Index batch_size() const { return inputs_.empty() ? 0 : inputs_.front().cols(); }
  bool empty() const { return inputs_.empty(); }

private:
  friend class DenseNet;
  std::vector<Matrix> inputs_;   // input to layer l
  std::vector<Matrix> outputs_;  // post-activation output of layer l
};

// Fully connected feed-forward network in double precision.
//
// Batched calls take one sample per column. Softmax is applied per column and
// is only meaningful as the final activation.
class DenseNet {
public:
  DenseNet() = default;

  // Weights and biases are drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  DenseNet(std::span<const LayerShape> shapes, Rng& rng);
  DenseNet(std::initializer_list<LayerShape> shapes, Rng& rng)
      : DenseNet(std::span<const LayerShape>(shapes.begin(), shapes.size()), rng) {}

  Vector forward(const Vector& input) const;
  Matrix forward(const Matrix& batch) const;
  Matrix forward(const Matrix& batch, GradientTape& tape) const;

  // Accumulates parameter gradients of sum_j <output_grad_j, y_j> into
  // `grads` and returns the gradient with respect to the tape's input.
  Matrix backward(const GradientTape& tape, const Matrix& output_grad, Gradients& grads) const;

  Gradients zero_gradients() const;

  // this <- tau * online + (1 - tau) * this
  void soft_update_from(const DenseNet& online, double tau);

  Eigen::Index input_width() const;
  Eigen::Index output_width() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  std::span<DenseLayer> layers() { return layers_; }
  std::span<const DenseLayer> layers() const { return layers_; }

private:
  std::vector<DenseLayer> layers_;
};

// Column-wise softmax with max subtraction.
Matrix softmax_columns(const Matrix& logits);

// tanh through the vectorized exp, 1 - 2 / (exp(2x) + 1). Eigen evaluates
// double tanh one scalar at a time, which dominated the diffusion chains.
Matrix fast_tanh(const Matrix& x);

}  // namespace ntn::diffnet

#endif  // NTN_DIFFNET_DENSE_NET_HPP
