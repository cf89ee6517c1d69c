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

#ifndef NTN_GAI_GAN_HPP
#define NTN_GAI_GAN_HPP

#include <cstddef>
#include <vector>

#include "ntn/common/random.hpp"
#include "ntn/diffnet/adam.hpp"
#include "ntn/diffnet/dense_net.hpp"

namespace ntn::gai {

using diffnet::Matrix;

// Generator G: R^d -> R^n and discriminator D: R^n -> (0, 1).
struct GanPair {
  diffnet::DenseNet generator;
  diffnet::DenseNet discriminator;

  Eigen::Index latent_width() const { return generator.input_width(); }
  Eigen::Index data_width() const { return generator.output_width(); }
};

// Two tanh hidden layers on each side, identity generator head, sigmoid
// discriminator head.
GanPair make_gan_pair(Eigen::Index latent_width, Eigen::Index data_width, Eigen::Index hidden, Rng& rng);

// D outputs are clamped into [kGanClamp, 1 - kGanClamp] before any log.
inline constexpr double kGanClamp = 1e-12;

struct GanValue {
  double value = 0.0;
  std::size_t saturated = 0;  // number of clamped D outputs
};

// mean log D(x) over `real` + mean log(1 - D(G(z))) over `latent`; columns are samples.
GanValue gan_value(const GanPair& pair, const Matrix& real, const Matrix& latent);

struct GanConfig {
  int iterations = 3000;
  int k = 1;   // discriminator steps per generator step
  int m = 64;  // minibatch size
  double d_lr = 2e-3;
  double g_lr = 5e-4;
  // beta1 = 0.5 damps the mean oscillation of the adversarial game
  diffnet::AdamConfig adam{0.5, 0.999, 1e-8};
};

enum class GanUpdate { discriminator, generator };

struct GanLog {
  struct Entry {
    int iteration;
    GanUpdate kind;
  };
  std::vector<Entry> updates;      // in execution order
  std::vector<double> value;       // minibatch V after each outer iteration's D steps
  std::vector<double> d_real;      // mean D on the last real minibatch, per outer iteration
  std::size_t saturated = 0;
};

// k discriminator ascent steps, then one generator descent step on
// mean log(1 - D(G(z))), per outer iteration. `dataset` holds one sample per
// column. Throws TrainingError carrying the iteration on a non-finite value.
GanLog gan_train(const Matrix& dataset, GanPair& pair, const GanConfig& cfg, Rng& rng);

// Draws `count` generator samples.
Matrix gan_generate(const GanPair& pair, Eigen::Index count, Rng& rng);

}  // namespace ntn::gai

#endif  // NTN_GAI_GAN_HPP
