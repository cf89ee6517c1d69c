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

#ifndef NTN_DIFFNET_ADAM_HPP
#define NTN_DIFFNET_ADAM_HPP

#include <cstdint>

#include "ntn/diffnet/dense_net.hpp"

namespace ntn::diffnet {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update on a flat parameter block. `step` is the
// 1-based update count.
void adam_update(Eigen::Ref<Eigen::ArrayXd> param, const Eigen::Ref<const Eigen::ArrayXd>& grad,
                 Eigen::Ref<Eigen::ArrayXd> m, Eigen::Ref<Eigen::ArrayXd> v, std::int64_t step,
                 double lr, const AdamConfig& cfg);

// Moment state for one DenseNet. Starts at zero.
class Adam {
public:
  Adam() = default;
  explicit Adam(const DenseNet& net, AdamConfig cfg = {});

  // Throws TrainingError carrying the layer index on a non-finite gradient;
  // the network is left untouched in that case.
  void step(DenseNet& net, const Gradients& grads, double lr);

  std::int64_t steps() const { return t_; }

private:
  Gradients m_;
  Gradients v_;
  std::int64_t t_ = 0;
  AdamConfig cfg_;
};

// Adam for a single free scalar (e.g. a log-normalizer).
class ScalarAdam {
public:
  explicit ScalarAdam(AdamConfig cfg = {}) : cfg_(cfg) {}
  void step(double& param, double grad, double lr);

private:
  double m_ = 0.0;
  double v_ = 0.0;
  std::int64_t t_ = 0;
  AdamConfig cfg_;
};

}  // namespace ntn::diffnet

#endif  // NTN_DIFFNET_ADAM_HPP
