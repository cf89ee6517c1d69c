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

#include "ntn/diffnet/adam.hpp"

#include <cmath>
#include <string>

#include "ntn/common/errors.hpp"

namespace ntn::diffnet {

void adam_update(Eigen::Ref<Eigen::ArrayXd> param, const Eigen::Ref<const Eigen::ArrayXd>& grad,
                 Eigen::Ref<Eigen::ArrayXd> m, Eigen::Ref<Eigen::ArrayXd> v, std::int64_t step,
                 double lr, const AdamConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.square();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  param -= lr * (m / c1) / ((v / c2).sqrt() + cfg.epsilon);
}

Adam::Adam(const DenseNet& net, AdamConfig cfg) : m_(net.zero_gradients()), v_(net.zero_gradients()), cfg_(cfg) {}

void Adam::step(DenseNet& net, const Gradients& grads, double lr) {
  auto layers = net.layers();
  if (grads.weights.size() != layers.size() || m_.weights.size() != layers.size()) {
    throw ConfigError("gradient/optimizer state does not match network with " + std::to_string(layers.size()) +
                      " layers");
  }
  if (auto bad = grads.first_non_finite_layer()) {
    throw TrainingError("non-finite gradient in layer " + std::to_string(*bad), *bad);
  }
  ++t_;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weights;
    if (grads.weights[l].rows() != w.rows() || grads.weights[l].cols() != w.cols())
      throw ConfigError("gradient shape mismatch in layer " + std::to_string(l));
    Eigen::Map<Eigen::ArrayXd> wp(w.data(), w.size());
    Eigen::Map<const Eigen::ArrayXd> wg(grads.weights[l].data(), grads.weights[l].size());
    Eigen::Map<Eigen::ArrayXd> wm(m_.weights[l].data(), m_.weights[l].size());
    Eigen::Map<Eigen::ArrayXd> wv(v_.weights[l].data(), v_.weights[l].size());
    adam_update(wp, wg, wm, wv, t_, lr, cfg_);
    adam_update(layers[l].bias.array(), grads.bias[l].array(), m_.bias[l].array(), v_.bias[l].array(), t_, lr,
                cfg_);
  }
}

void ScalarAdam::step(double& param, double grad, double lr) {
  if (!std::isfinite(grad)) throw TrainingError("non-finite scalar gradient");
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad * grad;
  const double mh = m_ / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
  const double vh = v_ / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
  param -= lr * mh / (std::sqrt(vh) + cfg_.epsilon);
}

}  // namespace ntn::diffnet
