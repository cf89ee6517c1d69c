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

#ifndef NTN_DIFFUSION_GADM_HPP
#define NTN_DIFFUSION_GADM_HPP

#include <vector>

#include "ntn/common/random.hpp"
#include "ntn/diffnet/dense_net.hpp"

namespace ntn::diffusion {

using diffnet::Matrix;
using diffnet::Vector;

// Linear beta schedule with its cumulative products. All accessors take the
// 1-based step index t in [1, steps].
struct DiffusionSchedule {
  int steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha_bar;
  std::vector<double> tilde_beta;

  double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
  double alpha_bar_at(int t) const { return alpha_bar[static_cast<std::size_t>(t - 1)]; }
  double alpha_bar_before(int t) const { return t == 1 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 2)]; }
  double tilde_beta_at(int t) const { return tilde_beta[static_cast<std::size_t>(t - 1)]; }
};

DiffusionSchedule build_schedule(int steps, double beta_lo, double beta_hi);

// How the injected noise is scaled in a reverse step.
//  posterior:   sqrt(tilde_beta_t), the usual posterior standard deviation.
//  literal_eq8: (tilde_beta_t / 2)^2, as the update rule is printed.
enum class NoiseScale { posterior, literal_eq8 };

double noise_scale(const DiffusionSchedule& sched, int t, NoiseScale mode);

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps
Vector ddpm_forward(const Vector& x0, int t, const Vector& eps, const DiffusionSchedule& sched);

// Posterior mean f(x_t, eps) = (x_t - beta_t / sqrt(1 - alpha_bar_t) * eps) / sqrt(1 - beta_t).
// Works column-wise on batches.
Matrix posterior_mean(const Matrix& x_t, const Matrix& eps, int t, const DiffusionSchedule& sched);

// Noise-prediction network eps_theta(x_t, t, s). Input layout is
// [x_t ; one-hot(t) ; s]; the raw output is unbounded and gets squashed with
// tanh by the sampler.
class Denoiser {
public:
  Denoiser() = default;
  Denoiser(Eigen::Index action_count, Eigen::Index obs_width, int steps, Eigen::Index hidden, Rng& rng);

  Eigen::Index action_count() const { return action_count_; }
  Eigen::Index obs_width() const { return obs_width_; }
  int steps() const { return steps_; }

  Matrix assemble_input(const Matrix& x, int t, const Matrix& obs) const;

  diffnet::DenseNet& net() { return net_; }
  const diffnet::DenseNet& net() const { return net_; }

private:
  Eigen::Index action_count_ = 0;
  Eigen::Index obs_width_ = 0;
  int steps_ = 0;
  diffnet::DenseNet net_;
};

// One step x_t -> x_{t-1} = f(x_t, tanh(eps_theta)) + scale * noise.
Vector reverse_step(const Vector& x_t, int t, const Vector& obs, const Denoiser& denoiser,
                    const DiffusionSchedule& sched, const Vector& noise, NoiseScale mode = NoiseScale::posterior);

// All randomness consumed by one batched reverse chain.
struct ChainNoise {
  Matrix x_T;                // action_count x batch
  std::vector<Matrix> step;  // step[t-1] is injected on the t -> t-1 transition
};

ChainNoise draw_chain_noise(Eigen::Index action_count, Eigen::Index batch, int steps, Rng& rng);
ChainNoise zero_chain_noise(Eigen::Index action_count, Eigen::Index batch, int steps);

// Per-step tapes needed to differentiate a chain. Index k holds step t = steps - k.
struct ChainTrace {
  std::vector<diffnet::GradientTape> tapes;
  std::vector<Matrix> squashed_eps;
};

// Runs t = T..1 on a batch of observations (obs_width x batch) and returns x_0.
// Throws TrainingError on a non-finite denoiser output.
Matrix run_chain(const Denoiser& denoiser, const DiffusionSchedule& sched, const Matrix& obs,
                 const ChainNoise& noise, NoiseScale mode, ChainTrace* trace = nullptr);

// Accumulates d<d_x0, x_0>/d theta into `grads` and returns d/d x_T.
Matrix backprop_chain(const Denoiser& denoiser, const DiffusionSchedule& sched, const ChainTrace& trace,
                      const Matrix& d_x0, diffnet::Gradients& grads);

struct ActionDistribution {
  Vector probabilities;
};

ActionDistribution to_distribution(const Vector& logits);

struct GadmSample {
  ActionDistribution distribution;
  Vector logits;  // x_0
  ChainNoise noise;
  ChainTrace trace;
};

// Algorithm: x_T ~ N(0, I), reverse chain to x_0, softmax.
GadmSample gadm_sample(const Vector& obs, const Denoiser& denoiser, const DiffusionSchedule& sched, Rng& rng,
                       NoiseScale mode = NoiseScale::posterior);

// Same, with every noise draw supplied by the caller.
GadmSample gadm_sample(const Vector& obs, const Denoiser& denoiser, const DiffusionSchedule& sched,
                       const ChainNoise& noise, NoiseScale mode = NoiseScale::posterior);

}  // namespace ntn::diffusion

#endif  // NTN_DIFFUSION_GADM_HPP
