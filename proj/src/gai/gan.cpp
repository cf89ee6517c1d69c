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

#include "ntn/gai/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "ntn/common/errors.hpp"
#include "ntn/diffnet/adam.hpp"

namespace ntn::gai {

using diffnet::Activation;
using diffnet::LayerShape;

namespace {

// Clamps in place and returns how many entries were touched.
std::size_t clamp_probabilities(Matrix& d) {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    double& v = d.data()[i];
    if (v < kGanClamp || v > 1.0 - kGanClamp) {
      v = std::clamp(v, kGanClamp, 1.0 - kGanClamp);
      ++n;
    }
  }
  return n;
}

Matrix minibatch(const Matrix& dataset, std::vector<Eigen::Index>& order, int m, Rng& rng) {
  // partial Fisher-Yates: the first m entries become a uniform subset
  Matrix out(dataset.rows(), m);
  const auto n = static_cast<Eigen::Index>(order.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
    out.col(i) = dataset.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

GanPair make_gan_pair(Eigen::Index latent_width, Eigen::Index data_width, Eigen::Index hidden, Rng& rng) {
  GanPair p;
  p.generator = diffnet::DenseNet({LayerShape{latent_width, hidden, Activation::tanh},
                                   LayerShape{hidden, hidden, Activation::tanh},
                                   LayerShape{hidden, data_width, Activation::identity}},
                                  rng);
  p.discriminator = diffnet::DenseNet({LayerShape{data_width, hidden, Activation::tanh},
                                       LayerShape{hidden, hidden, Activation::tanh},
                                       LayerShape{hidden, 1, Activation::sigmoid}},
                                      rng);
  return p;
}

GanValue gan_value(const GanPair& pair, const Matrix& real, const Matrix& latent) {
  if (real.cols() == 0 || latent.cols() == 0) throw ConfigError("gan batches must be non-empty");
  Matrix d_real = pair.discriminator.forward(real);
  Matrix d_fake = pair.discriminator.forward(pair.generator.forward(latent));
  GanValue v;
  v.saturated = clamp_probabilities(d_real) + clamp_probabilities(d_fake);
  if (v.saturated > 0) spdlog::warn("gan discriminator saturated on {} samples", v.saturated);
  v.value = d_real.array().log().mean() + (1.0 - d_fake.array()).log().mean();
  return v;
}

Matrix gan_generate(const GanPair& pair, Eigen::Index count, Rng& rng) {
  return pair.generator.forward(standard_normal(pair.latent_width(), count, rng));
}

GanLog gan_train(const Matrix& dataset, GanPair& pair, const GanConfig& cfg, Rng& rng) {
  if (dataset.cols() == 0) throw ConfigError("empty gan dataset");
  if (dataset.rows() != pair.data_width()) throw ConfigError("dataset width differs from generator output");
  if (cfg.m < 1 || cfg.m > dataset.cols() || cfg.k < 1 || cfg.iterations < 0)
    throw ConfigError("invalid gan settings");

  diffnet::Adam d_opt(pair.discriminator, cfg.adam);
  diffnet::Adam g_opt(pair.generator, cfg.adam);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dataset.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const double inv_m = 1.0 / cfg.m;
  GanLog log;

  auto fail = [](const char* what, int it) {
    throw TrainingError(std::string(what) + " at iteration " + std::to_string(it), static_cast<std::size_t>(it));
  };

  for (int it = 0; it < cfg.iterations; ++it) {
    double value = 0.0;
    double d_real_mean = 0.0;
    for (int step = 0; step < cfg.k; ++step) {
      const Matrix z = standard_normal(pair.latent_width(), cfg.m, rng);
      const Matrix x = minibatch(dataset, order, cfg.m, rng);
      const Matrix fake = pair.generator.forward(z);

      diffnet::GradientTape real_tape, fake_tape;
      Matrix d_real = pair.discriminator.forward(x, real_tape);
      Matrix d_fake = pair.discriminator.forward(fake, fake_tape);
      log.saturated += clamp_probabilities(d_real) + clamp_probabilities(d_fake);
      value = d_real.array().log().mean() + (1.0 - d_fake.array()).log().mean();
      if (!std::isfinite(value)) fail("non-finite discriminator objective", it);
      d_real_mean = d_real.mean();

      // ascend V == descend -V
      auto grads = pair.discriminator.zero_gradients();
      pair.discriminator.backward(real_tape, (-inv_m / d_real.array()).matrix(), grads);
      pair.discriminator.backward(fake_tape, (inv_m / (1.0 - d_fake.array())).matrix(), grads);
      d_opt.step(pair.discriminator, grads, cfg.d_lr);
      log.updates.push_back({it, GanUpdate::discriminator});
    }
    log.value.push_back(value);
    log.d_real.push_back(d_real_mean);

    const Matrix z = standard_normal(pair.latent_width(), cfg.m, rng);
    diffnet::GradientTape g_tape, d_tape;
    const Matrix fake = pair.generator.forward(z, g_tape);
    Matrix d_fake = pair.discriminator.forward(fake, d_tape);
    log.saturated += clamp_probabilities(d_fake);
    const double g_loss = (1.0 - d_fake.array()).log().mean();
    if (!std::isfinite(g_loss)) fail("non-finite generator objective", it);
    auto scratch = pair.discriminator.zero_gradients();
    const Matrix d_x = pair.discriminator.backward(d_tape, (-inv_m / (1.0 - d_fake.array())).matrix(), scratch);
    auto g_grads = pair.generator.zero_gradients();
    pair.generator.backward(g_tape, d_x, g_grads);
    g_opt.step(pair.generator, g_grads, cfg.g_lr);
    log.updates.push_back({it, GanUpdate::generator});
  }
  if (log.saturated > 0) spdlog::warn("gan training clamped {} discriminator outputs", log.saturated);
  return log;
}

}  // namespace ntn::gai
