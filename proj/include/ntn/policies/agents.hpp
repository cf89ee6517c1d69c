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

#ifndef NTN_POLICIES_AGENTS_HPP
#define NTN_POLICIES_AGENTS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ntn/diffnet/adam.hpp"
#include "ntn/diffnet/dense_net.hpp"
#include "ntn/diffusion/gadm.hpp"
#include "ntn/policies/action_space.hpp"
#include "ntn/policies/replay.hpp"

namespace ntn::policy {

enum class PolicyKind { ijcalb, dujcalb, djcalb, ujcalb };

std::string_view to_string(PolicyKind k);
PolicyKind parse_policy(std::string_view name);

struct AgentHyper {
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double entropy = 0.05;  // zeta
  double discount = 0.95;
  int batch = 64;
  std::size_t buffer = 100000;
  double tau = 0.005;
  int diffusion_steps = 5;
  double beta_lo = 0.2;
  double beta_hi = 0.8;
  diffusion::NoiseScale noise_scale = diffusion::NoiseScale::posterior;
  Eigen::Index actor_hidden = 32;
  Eigen::Index critic_hidden = 64;
  int update_every = 1;  // environment transitions per gradient update
  double ucb_c = 1.0;
  double guidance = 1.0;  // w_g
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_fraction = 0.5;
  std::int64_t total_steps = 40000;  // horizon of the epsilon schedule

  void validate() const;
};

struct LossRecord {
  std::int64_t update = 0;
  double critic = 0.0;
  double actor = 0.0;
};

class Agent {
public:
  virtual ~Agent() = default;
  virtual PolicyKind kind() const = 0;
  // Samples an action that is feasible for `available`.
  virtual int select(const Vector& obs, Mask available, Rng& rng) = 0;
  // Stores a transition and runs any update that became due.
  virtual void observe(const Transition& t, Rng& rng) = 0;
  // Current action distribution (used by tests and diagnostics).
  virtual Vector distribution(const Vector& obs, Mask available, Rng& rng) = 0;

  const std::vector<LossRecord>& losses() const { return losses_; }

protected:
  std::vector<LossRecord> losses_;
};

// Q(s, a) = MLP([s ; bits(a)]) with one ReLU hidden layer. Evaluating every
// action splits the first layer into its state and action parts.
class BitCritic {
public:
  BitCritic() = default;
  BitCritic(const ActionSpace& space, Eigen::Index obs_width, Eigen::Index hidden, Rng& rng);

  // action_count x batch
  Matrix all(const Matrix& obs) const;
  // 1 x batch
  Matrix at(const Matrix& obs, const std::vector<int>& actions) const;
  Matrix input(const Matrix& obs, const std::vector<int>& actions) const;

  diffnet::DenseNet& net() { return net_; }
  const diffnet::DenseNet& net() const { return net_; }

private:
  const ActionSpace* space_ = nullptr;
  Eigen::Index obs_width_ = 0;
  diffnet::DenseNet net_;
};

// Closed-form actor objective sum_a pi (-q) - zeta H(pi) per column, and its
// gradient with respect to the pre-softmax logits. `q` already holds the
// critic minimum; infeasible actions carry pi = 0.
struct ActorObjective {
  double loss = 0.0;  // batch mean
  Matrix d_logits;    // already divided by the batch size
};
ActorObjective actor_objective(const Matrix& pi, const Matrix& q, double zeta);

// The GADM actor with two critics and their targets.
class DiffusionActorCritic {
public:
  DiffusionActorCritic(const ActionSpace& space, Eigen::Index obs_width, const AgentHyper& h, Rng& rng);

  // Masked policy distribution for one observation (one chain draw).
  Vector policy(const Vector& obs, Mask available, Rng& rng) const;
  // Masked batch policy; columns are samples.
  Matrix policy_batch(const Matrix& obs, const std::vector<Mask>& available, Rng& rng,
                      diffusion::ChainNoise* noise_out = nullptr, diffusion::ChainTrace* trace = nullptr) const;

  void push(const Transition& t) { buffer_.push(t); }
  bool ready() const { return buffer_.size() >= static_cast<std::size_t>(hyper_.batch); }
  LossRecord update(Rng& rng);

  const BitCritic& critic(int k) const { return k == 0 ? q1_ : q2_; }
  const BitCritic& target(int k) const { return k == 0 ? t1_ : t2_; }
  BitCritic& critic(int k) { return k == 0 ? q1_ : q2_; }
  const diffusion::Denoiser& actor() const { return actor_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::int64_t updates() const { return updates_; }

private:
  const ActionSpace* space_;
  AgentHyper hyper_;
  diffusion::DiffusionSchedule schedule_;
  diffusion::Denoiser actor_;
  diffnet::Adam actor_opt_;
  BitCritic q1_, q2_, t1_, t2_;
  diffnet::Adam q1_opt_, q2_opt_;
  ReplayBuffer buffer_;
  std::int64_t updates_ = 0;
};

// Context-free UCB statistics.
class UcbTable {
public:
  explicit UcbTable(int actions, double c) : n_(static_cast<std::size_t>(actions), 0), mean_(static_cast<std::size_t>(actions), 0.0), c_(c) {}
  void record(int a, double reward);
  std::int64_t count(int a) const { return n_[static_cast<std::size_t>(a)]; }
  double mean(int a) const { return mean_[static_cast<std::size_t>(a)]; }
  std::int64_t total() const { return t_; }
  // Bonus-augmented score; +inf for unvisited actions.
  double score(int a) const;

private:
  std::vector<std::int64_t> n_;
  std::vector<double> mean_;
  std::int64_t t_ = 0;
  double c_;
};

// Returns -1 when no action is feasible.
int argmax_feasible(const Vector& score, const Vector& mask);

std::unique_ptr<Agent> make_agent(PolicyKind kind, const ActionSpace& space, Eigen::Index obs_width,
                                  const AgentHyper& hyper, Rng& rng);

// DDQN bootstrap value: r when terminal, r + gamma * target(s', argmax online(s')).
double ddqn_target(double reward, bool terminal, double discount, const Vector& online_next,
                   const Vector& target_next, const Vector& next_mask);

// Linear epsilon decay from start to end over fraction * total steps.
double epsilon_at(const AgentHyper& h, std::int64_t step);

}  // namespace ntn::policy

#endif  // NTN_POLICIES_AGENTS_HPP
