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

#include "ntn/diffusion/gadm.hpp"

#include <cmath>
#include <string>

#include "ntn/common/errors.hpp"

namespace ntn::diffusion {

using diffnet::Activation;
using diffnet::LayerShape;

DiffusionSchedule build_schedule(int steps, double beta_lo, double beta_hi) {
  if (steps < 1) throw ConfigError("diffusion step count must be >= 1");
  if (!(beta_lo > 0.0) || !(beta_lo <= beta_hi) || !(beta_hi < 1.0))
    throw ConfigError("beta range must satisfy 0 < lo <= hi < 1");
  DiffusionSchedule s;
  s.steps = steps;
  s.beta.resize(static_cast<std::size_t>(steps));
  s.alpha_bar.resize(s.beta.size());
  s.tilde_beta.resize(s.beta.size());
  double prod = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(steps - 1);
    const double b = steps == 1 ? beta_lo : beta_lo + frac * (beta_hi - beta_lo);
    const double prev = prod;
    prod *= 1.0 - b;
    const auto k = static_cast<std::size_t>(t - 1);
    s.beta[k] = b;
    s.alpha_bar[k] = prod;
    s.tilde_beta[k] = b * (1.0 - prev) / (1.0 - prod);
  }
  return s;
}

double noise_scale(const DiffusionSchedule& sched, int t, NoiseScale mode) {
  const double tb = sched.tilde_beta_at(t);
  return mode == NoiseScale::posterior ? std::sqrt(tb) : (tb / 2.0) * (tb / 2.0);
}

Vector ddpm_forward(const Vector& x0, int t, const Vector& eps, const DiffusionSchedule& sched) {
  if (x0.size() != eps.size()) throw ConfigError("x0 and eps widths differ");
  if (t < 1 || t > sched.steps) throw ConfigError("diffusion step out of range");
  const double ab = sched.alpha_bar_at(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Matrix posterior_mean(const Matrix& x_t, const Matrix& eps, int t, const DiffusionSchedule& sched) {
  const double b = sched.beta_at(t);
  const double coef = b / std::sqrt(1.0 - sched.alpha_bar_at(t));
  return (x_t - coef * eps) / std::sqrt(1.0 - b);
}

Denoiser::Denoiser(Eigen::Index action_count, Eigen::Index obs_width, int steps, Eigen::Index hidden, Rng& rng)
    : action_count_(action_count), obs_width_(obs_width), steps_(steps) {
  if (action_count < 1 || obs_width < 0 || steps < 1 || hidden < 1) throw ConfigError("invalid denoiser shape");
  const Eigen::Index in = action_count + steps + obs_width;
  net_ = diffnet::DenseNet({LayerShape{in, hidden, Activation::tanh}, LayerShape{hidden, hidden, Activation::tanh},
                            LayerShape{hidden, action_count, Activation::identity}},
                           rng);
}

Matrix Denoiser::assemble_input(const Matrix& x, int t, const Matrix& obs) const {
  if (x.rows() != action_count_ || obs.rows() != obs_width_ || x.cols() != obs.cols())
    throw ConfigError("denoiser input widths do not match (x " + std::to_string(x.rows()) + ", obs " +
                      std::to_string(obs.rows()) + ")");
  if (t < 1 || t > steps_) throw ConfigError("diffusion step out of range");
  Matrix in = Matrix::Zero(action_count_ + steps_ + obs_width_, x.cols());
  in.topRows(action_count_) = x;
  in.row(action_count_ + t - 1).setOnes();
  in.bottomRows(obs_width_) = obs;
  return in;
}

Vector reverse_step(const Vector& x_t, int t, const Vector& obs, const Denoiser& denoiser,
                    const DiffusionSchedule& sched, const Vector& noise, NoiseScale mode) {
  if (noise.size() != x_t.size()) throw ConfigError("noise width does not match x_t");
  const Matrix raw = denoiser.net().forward(denoiser.assemble_input(x_t, t, obs));
  if (!raw.allFinite()) throw TrainingError("non-finite denoiser output at step " + std::to_string(t));
  const Matrix eps = diffnet::fast_tanh(raw);
  return posterior_mean(x_t, eps, t, sched).col(0) + noise_scale(sched, t, mode) * noise;
}

ChainNoise draw_chain_noise(Eigen::Index action_count, Eigen::Index batch, int steps, Rng& rng) {
  ChainNoise n;
  n.x_T = standard_normal(action_count, batch, rng);
  n.step.reserve(static_cast<std::size_t>(steps));
  for (int t = 1; t <= steps; ++t) n.step.push_back(standard_normal(action_count, batch, rng));
  return n;
}

ChainNoise zero_chain_noise(Eigen::Index action_count, Eigen::Index batch, int steps) {
  ChainNoise n;
  n.x_T = Matrix::Zero(action_count, batch);
  n.step.assign(static_cast<std::size_t>(steps), Matrix::Zero(action_count, batch));
  return n;
}

Matrix run_chain(const Denoiser& denoiser, const DiffusionSchedule& sched, const Matrix& obs,
                 const ChainNoise& noise, NoiseScale mode, ChainTrace* trace) {
  if (sched.steps != denoiser.steps()) throw ConfigError("schedule and denoiser disagree on step count");
  if (noise.x_T.rows() != denoiser.action_count() || noise.x_T.cols() != obs.cols() ||
      static_cast<int>(noise.step.size()) != sched.steps)
    throw ConfigError("chain noise does not match the batch");
  if (trace) {
    trace->tapes.assign(static_cast<std::size_t>(sched.steps), {});
    trace->squashed_eps.assign(static_cast<std::size_t>(sched.steps), {});
  }
  Matrix x = noise.x_T;
  for (int t = sched.steps; t >= 1; --t) {
    const Matrix in = denoiser.assemble_input(x, t, obs);
    Matrix raw;
    if (trace) {
      raw = denoiser.net().forward(in, trace->tapes[static_cast<std::size_t>(sched.steps - t)]);
    } else {
      raw = denoiser.net().forward(in);
    }
    if (!raw.allFinite()) throw TrainingError("non-finite denoiser output at step " + std::to_string(t));
    Matrix eps = diffnet::fast_tanh(raw);
    x = posterior_mean(x, eps, t, sched) + noise_scale(sched, t, mode) * noise.step[static_cast<std::size_t>(t - 1)];
    if (trace) trace->squashed_eps[static_cast<std::size_t>(sched.steps - t)] = std::move(eps);
  }
  if (!x.allFinite()) throw TrainingError("non-finite chain output");
  return x;
}

Matrix backprop_chain(const Denoiser& denoiser, const DiffusionSchedule& sched, const ChainTrace& trace,
                      const Matrix& d_x0, diffnet::Gradients& grads) {
  if (static_cast<int>(trace.tapes.size()) != sched.steps) throw ConfigError("chain trace has the wrong length");
  const Eigen::Index a = denoiser.action_count();
  Matrix dx = d_x0;  // gradient w.r.t. x_{t-1}
  for (int t = 1; t <= sched.steps; ++t) {
    const auto k = static_cast<std::size_t>(sched.steps - t);
    const double b = sched.beta_at(t);
    const double inv_root = 1.0 / std::sqrt(1.0 - b);
    const double coef = b / std::sqrt(1.0 - sched.alpha_bar_at(t));
    const Matrix& eps = trace.squashed_eps[k];
    const Matrix d_raw = (dx.array() * (-coef * inv_root) * (1.0 - eps.array().square())).matrix();
    const Matrix d_in = denoiser.net().backward(trace.tapes[k], d_raw, grads);
    dx = inv_root * dx + d_in.topRows(a);
  }
  return dx;
}

ActionDistribution to_distribution(const Vector& logits) {
  return ActionDistribution{diffnet::softmax_columns(logits).col(0)};
}

GadmSample gadm_sample(const Vector& obs, const Denoiser& denoiser, const DiffusionSchedule& sched, Rng& rng,
                       NoiseScale mode) {
  return gadm_sample(obs, denoiser, sched, draw_chain_noise(denoiser.action_count(), 1, sched.steps, rng), mode);
}

GadmSample gadm_sample(const Vector& obs, const Denoiser& denoiser, const DiffusionSchedule& sched,
                       const ChainNoise& noise, NoiseScale mode) {
  if (obs.size() != denoiser.obs_width()) throw ConfigError("observation width does not match the denoiser");
  GadmSample out;
  out.noise = noise;
  const Matrix x0 = run_chain(denoiser, sched, obs, out.noise, mode, &out.trace);
  out.logits = x0.col(0);
  out.distribution = to_distribution(out.logits);
  return out;
}

}  // namespace ntn::diffusion
