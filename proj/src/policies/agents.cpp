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

#include "ntn/policies/agents.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ntn/common/errors.hpp"

namespace ntn::policy {

using diffnet::Activation;
using diffnet::LayerShape;

namespace {

int sample_categorical(const Vector& p, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    if (p(a) <= 0.0) continue;
    acc += p(a);
    last = static_cast<int>(a);
    if (u < acc) return last;
  }
  return last;  // rounding left u above the final partial sum
}

int uniform_feasible(const ActionSpace& space, Mask available, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, space.size() - 1);
  for (;;) {
    const int a = pick(rng);
    if (space.feasible(a, available)) return a;
  }
}

Matrix stack_obs(const std::vector<const Transition*>& batch, bool next) {
  Matrix out(batch.front()->obs.size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = next ? batch[j]->next_obs : batch[j]->obs;
  return out;
}

}  // namespace

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::ijcalb: return "ijcalb";
    case PolicyKind::dujcalb: return "dujcalb";
    case PolicyKind::djcalb: return "djcalb";
    case PolicyKind::ujcalb: return "ujcalb";
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
  for (auto k : {PolicyKind::ijcalb, PolicyKind::dujcalb, PolicyKind::djcalb, PolicyKind::ujcalb})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

void AgentHyper::validate() const {
  if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw ConfigError("learning rates must be non-negative");
  if (!(entropy >= 0.0)) throw ConfigError("entropy weight must be non-negative");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in [0, 1]");
  if (batch < 1 || buffer < 1) throw ConfigError("batch and buffer must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("soft-update weight must lie in (0, 1]");
  if (diffusion_steps < 1) throw ConfigError("diffusion step count must be >= 1");
  if (actor_hidden < 1 || critic_hidden < 1 || update_every < 1) throw ConfigError("widths and cadence must be positive");
  if (!(ucb_c >= 0.0) || !(guidance >= 0.0)) throw ConfigError("UCB constant and guidance must be non-negative");
  if (!(eps_end >= 0.0 && eps_end <= eps_start && eps_start <= 1.0)) throw ConfigError("bad epsilon schedule");
  if (!(eps_fraction > 0.0) || total_steps < 1) throw ConfigError("bad epsilon horizon");
}

// ---------------------------------------------------------------- critics

BitCritic::BitCritic(const ActionSpace& space, Eigen::Index obs_width, Eigen::Index hidden, Rng& rng)
    : space_(&space), obs_width_(obs_width) {
  net_ = diffnet::DenseNet({LayerShape{obs_width + space.bit_count(), hidden, Activation::relu},
                            LayerShape{hidden, 1, Activation::identity}},
                           rng);
}

Matrix BitCritic::all(const Matrix& obs) const {
  if (obs.rows() != obs_width_) throw ConfigError("critic observation width mismatch");
  const auto& l0 = net_.layers()[0];
  const auto& l1 = net_.layers()[1];
  const Matrix action_part = l0.weights.rightCols(space_->bit_count()) * space_->features();
  const Matrix state_part = (l0.weights.leftCols(obs_width_) * obs).colwise() + l0.bias;
  Matrix out(space_->size(), obs.cols());
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    const Matrix hidden = (action_part.colwise() + state_part.col(j)).cwiseMax(0.0);
    out.col(j) = (l1.weights * hidden).transpose();
    out.col(j).array() += l1.bias(0);
  }
  return out;
}

Matrix BitCritic::input(const Matrix& obs, const std::vector<int>& actions) const {
  if (obs.rows() != obs_width_ || static_cast<std::size_t>(obs.cols()) != actions.size())
    throw ConfigError("critic batch shape mismatch");
  Matrix in(obs_width_ + space_->bit_count(), obs.cols());
  in.topRows(obs_width_) = obs;
  for (Eigen::Index j = 0; j < obs.cols(); ++j)
    in.col(j).tail(space_->bit_count()) = space_->features().col(actions[static_cast<std::size_t>(j)]);
  return in;
}

Matrix BitCritic::at(const Matrix& obs, const std::vector<int>& actions) const {
  return net_.forward(input(obs, actions));
}

ActorObjective actor_objective(const Matrix& pi, const Matrix& q, double zeta) {
  if (pi.rows() != q.rows() || pi.cols() != q.cols()) throw ConfigError("policy and critic shapes differ");
  ActorObjective out;
  out.d_logits = Matrix::Zero(pi.rows(), pi.cols());
  const double inv_b = 1.0 / static_cast<double>(pi.cols());
  for (Eigen::Index j = 0; j < pi.cols(); ++j) {
    Vector g = Vector::Zero(pi.rows());
    for (Eigen::Index a = 0; a < pi.rows(); ++a)
      if (pi(a, j) > 0.0) g(a) = -q(a, j) + zeta * std::log(pi(a, j));
    const double mean_g = pi.col(j).dot(g);
    out.loss += mean_g * inv_b;
    out.d_logits.col(j) = pi.col(j).cwiseProduct((g.array() - mean_g).matrix()) * inv_b;
  }
  return out;
}

// ---------------------------------------------------------------- GADM actor-critic

DiffusionActorCritic::DiffusionActorCritic(const ActionSpace& space, Eigen::Index obs_width, const AgentHyper& h,
                                           Rng& rng)
    : space_(&space),
      hyper_(h),
      schedule_(diffusion::build_schedule(h.diffusion_steps, h.beta_lo, h.beta_hi)),
      actor_(space.size(), obs_width, h.diffusion_steps, h.actor_hidden, rng),
      actor_opt_(actor_.net()),
      q1_(space, obs_width, h.critic_hidden, rng),
      q2_(space, obs_width, h.critic_hidden, rng),
      t1_(q1_),
      t2_(q2_),
      q1_opt_(q1_.net()),
      q2_opt_(q2_.net()),
      buffer_(h.buffer) {
  h.validate();
}

Matrix DiffusionActorCritic::policy_batch(const Matrix& obs, const std::vector<Mask>& available, Rng& rng,
                                          diffusion::ChainNoise* noise_out, diffusion::ChainTrace* trace) const {
  auto noise = diffusion::draw_chain_noise(space_->size(), obs.cols(), schedule_.steps, rng);
  const Matrix x0 = diffusion::run_chain(actor_, schedule_, obs, noise, hyper_.noise_scale, trace);
  Matrix pi(x0.rows(), x0.cols());
  for (Eigen::Index j = 0; j < x0.cols(); ++j)
    pi.col(j) = masked_softmax(x0.col(j), space_->mask(available[static_cast<std::size_t>(j)]));
  if (noise_out) *noise_out = std::move(noise);
  return pi;
}

Vector DiffusionActorCritic::policy(const Vector& obs, Mask available, Rng& rng) const {
  return policy_batch(obs, {available}, rng).col(0);
}

LossRecord DiffusionActorCritic::update(Rng& rng) {
  const auto batch = buffer_.sample(static_cast<std::size_t>(hyper_.batch), rng);
  const Eigen::Index b = hyper_.batch;
  const Matrix s = stack_obs(batch, false);
  const Matrix s_next = stack_obs(batch, true);
  std::vector<int> actions(batch.size());
  std::vector<Mask> avail(batch.size());
  std::vector<Mask> next_avail(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    actions[j] = batch[j]->action;
    avail[j] = batch[j]->available;
    next_avail[j] = batch[j]->next_available;
  }

  // Critic targets with a' drawn from the current actor.
  const Matrix pi_next = policy_batch(s_next, next_avail, rng);
  std::vector<int> next_actions(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j)
    next_actions[j] = sample_categorical(pi_next.col(static_cast<Eigen::Index>(j)), rng);
  const Matrix tq = t1_.at(s_next, next_actions).cwiseMin(t2_.at(s_next, next_actions));
  Matrix y(1, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& tr = *batch[static_cast<std::size_t>(j)];
    y(0, j) = tr.reward + (tr.terminal ? 0.0 : hyper_.discount * tq(0, j));
  }

  LossRecord rec;
  const Matrix in = q1_.input(s, actions);
  for (int k = 0; k < 2; ++k) {
    BitCritic& q = k == 0 ? q1_ : q2_;
    diffnet::GradientTape tape;
    const Matrix pred = q.net().forward(in, tape);
    const Matrix err = pred - y;
    rec.critic += 0.5 * err.squaredNorm() / static_cast<double>(b);
    auto grads = q.net().zero_gradients();
    q.net().backward(tape, 2.0 * err / static_cast<double>(b), grads);
    (k == 0 ? q1_opt_ : q2_opt_).step(q.net(), grads, hyper_.critic_lr);
  }

  // Actor: exact expectation over the enumerated actions.
  diffusion::ChainNoise noise;
  diffusion::ChainTrace trace;
  const Matrix pi = policy_batch(s, avail, rng, &noise, &trace);
  const Matrix q_min = q1_.all(s).cwiseMin(q2_.all(s));
  const ActorObjective obj = actor_objective(pi, q_min, hyper_.entropy);
  auto grads = actor_.net().zero_gradients();
  diffusion::backprop_chain(actor_, schedule_, trace, obj.d_logits, grads);
  actor_opt_.step(actor_.net(), grads, hyper_.actor_lr);
  rec.actor = obj.loss;

  t1_.net().soft_update_from(q1_.net(), hyper_.tau);
  t2_.net().soft_update_from(q2_.net(), hyper_.tau);
  rec.update = ++updates_;
  return rec;
}

// ---------------------------------------------------------------- UCB

void UcbTable::record(int a, double reward) {
  auto k = static_cast<std::size_t>(a);
  ++n_[k];
  ++t_;
  mean_[k] += (reward - mean_[k]) / static_cast<double>(n_[k]);
}

double UcbTable::score(int a) const {
  const auto k = static_cast<std::size_t>(a);
  if (n_[k] == 0) return std::numeric_limits<double>::infinity();
  return mean_[k] + c_ * std::sqrt(2.0 * std::log(static_cast<double>(t_)) / static_cast<double>(n_[k]));
}

int argmax_feasible(const Vector& score, const Vector& mask) {
  int best = -1;
  for (Eigen::Index a = 0; a < score.size(); ++a) {
    if (mask(a) <= 0.0) continue;
    if (best < 0 || score(a) > score(best)) best = static_cast<int>(a);
  }
  return best;
}

double ddqn_target(double reward, bool terminal, double discount, const Vector& online_next,
                   const Vector& target_next, const Vector& next_mask) {
  if (terminal) return reward;
  const int a = argmax_feasible(online_next, next_mask);
  if (a < 0) throw ConfigError("no feasible next action");
  return reward + discount * target_next(a);
}

double epsilon_at(const AgentHyper& h, std::int64_t step) {
  const double horizon = h.eps_fraction * static_cast<double>(h.total_steps);
  const double frac = std::min(1.0, static_cast<double>(step) / horizon);
  return h.eps_start + frac * (h.eps_end - h.eps_start);
}

// ---------------------------------------------------------------- agents

namespace {

class IjcalbAgent final : public Agent {
public:
  IjcalbAgent(const ActionSpace& space, Eigen::Index w, const AgentHyper& h, Rng& rng)
      : ac_(space, w, h, rng), every_(h.update_every) {}
  PolicyKind kind() const override { return PolicyKind::ijcalb; }
  int select(const Vector& obs, Mask available, Rng& rng) override {
    return sample_categorical(ac_.policy(obs, available, rng), rng);
  }
  Vector distribution(const Vector& obs, Mask available, Rng& rng) override {
    return ac_.policy(obs, available, rng);
  }
  void observe(const Transition& t, Rng& rng) override {
    ac_.push(t);
    if (++seen_ % every_ == 0 && ac_.ready()) losses_.push_back(ac_.update(rng));
  }

private:
  DiffusionActorCritic ac_;
  int every_;
  std::int64_t seen_ = 0;
};

class DujcalbAgent final : public Agent {
public:
  DujcalbAgent(const ActionSpace& space, Eigen::Index w, const AgentHyper& h, Rng& rng)
      : space_(space), ac_(space, w, h, rng), ucb_(space.size(), h.ucb_c), guidance_(h.guidance), every_(h.update_every) {}
  PolicyKind kind() const override { return PolicyKind::dujcalb; }
  int select(const Vector& obs, Mask available, Rng& rng) override {
    const Vector pi = ac_.policy(obs, available, rng);
    const Vector& mask = space_.mask(available);
    Vector score(pi.size());
    Vector unvisited = Vector::Zero(pi.size());
    for (Eigen::Index a = 0; a < pi.size(); ++a) {
      if (mask(a) <= 0.0) continue;
      if (ucb_.count(static_cast<int>(a)) == 0) unvisited(a) = 1.0;
      score(a) = pi(a) > 0.0 ? ucb_.score(static_cast<int>(a)) + guidance_ * std::log(pi(a))
                             : -std::numeric_limits<double>::infinity();
    }
    // Unvisited actions first, most probable under the actor among them.
    if (unvisited.sum() > 0.0) return argmax_feasible(pi, unvisited);
    return argmax_feasible(score, mask);
  }
  Vector distribution(const Vector& obs, Mask available, Rng& rng) override {
    return ac_.policy(obs, available, rng);
  }
  void observe(const Transition& t, Rng& rng) override {
    ucb_.record(t.action, t.reward);
    ac_.push(t);
    if (++seen_ % every_ == 0 && ac_.ready()) losses_.push_back(ac_.update(rng));
  }

private:
  const ActionSpace& space_;
  DiffusionActorCritic ac_;
  UcbTable ucb_;
  double guidance_;
  int every_;
  std::int64_t seen_ = 0;
};

class UjcalbAgent final : public Agent {
public:
  UjcalbAgent(const ActionSpace& space, const AgentHyper& h) : space_(space), ucb_(space.size(), h.ucb_c) {}
  PolicyKind kind() const override { return PolicyKind::ujcalb; }
  int select(const Vector&, Mask available, Rng& rng) override {
    const Vector& mask = space_.mask(available);
    std::vector<int> unvisited;
    for (int a = 0; a < space_.size(); ++a)
      if (mask(a) > 0.0 && ucb_.count(a) == 0) unvisited.push_back(a);
    if (!unvisited.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, unvisited.size() - 1);
      return unvisited[pick(rng)];
    }
    Vector score(space_.size());
    for (int a = 0; a < space_.size(); ++a) score(a) = ucb_.score(a);
    return argmax_feasible(score, mask);
  }
  Vector distribution(const Vector& obs, Mask available, Rng& rng) override {
    Vector p = Vector::Zero(space_.size());
    Rng copy = rng;
    p(select(obs, available, copy)) = 1.0;
    return p;
  }
  void observe(const Transition& t, Rng&) override { ucb_.record(t.action, t.reward); }
  const UcbTable& table() const { return ucb_; }

private:
  const ActionSpace& space_;
  UcbTable ucb_;
};

class DjcalbAgent final : public Agent {
public:
  DjcalbAgent(const ActionSpace& space, Eigen::Index w, const AgentHyper& h, Rng& rng)
      : space_(space),
        hyper_(h),
        online_({LayerShape{w, h.critic_hidden, Activation::relu},
                 LayerShape{h.critic_hidden, space.size(), Activation::identity}},
                rng),
        target_(online_),
        opt_(online_),
        buffer_(h.buffer) {
    h.validate();
  }
  PolicyKind kind() const override { return PolicyKind::djcalb; }
  int select(const Vector& obs, Mask available, Rng& rng) override {
    const double eps = epsilon_at(hyper_, selected_++);
    if (uniform01(rng) < eps) return uniform_feasible(space_, available, rng);
    return argmax_feasible(online_.forward(obs), space_.mask(available));
  }
  Vector distribution(const Vector& obs, Mask available, Rng&) override {
    const double eps = epsilon_at(hyper_, selected_);
    const Vector& mask = space_.mask(available);
    Vector p = mask * (eps / mask.sum());
    p(argmax_feasible(online_.forward(obs), mask)) += 1.0 - eps;
    return p;
  }
  void observe(const Transition& t, Rng& rng) override {
    buffer_.push(t);
    if (++seen_ % hyper_.update_every == 0 && buffer_.size() >= static_cast<std::size_t>(hyper_.batch))
      losses_.push_back(update(rng));
  }

private:
  LossRecord update(Rng& rng) {
    const auto batch = buffer_.sample(static_cast<std::size_t>(hyper_.batch), rng);
    const auto b = static_cast<double>(batch.size());
    const Matrix s = stack_obs(batch, false);
    const Matrix s_next = stack_obs(batch, true);
    const Matrix online_next = online_.forward(s_next);
    const Matrix target_next = target_.forward(s_next);
    diffnet::GradientTape tape;
    const Matrix q = online_.forward(s, tape);
    Matrix d = Matrix::Zero(q.rows(), q.cols());
    LossRecord rec;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const auto& tr = *batch[static_cast<std::size_t>(j)];
      const double y = ddqn_target(tr.reward, tr.terminal, hyper_.discount, online_next.col(j), target_next.col(j),
                                   space_.mask(tr.next_available));
      const double err = q(tr.action, j) - y;
      rec.critic += err * err / b;
      d(tr.action, j) = 2.0 * err / b;
    }
    auto grads = online_.zero_gradients();
    online_.backward(tape, d, grads);
    opt_.step(online_, grads, hyper_.critic_lr);
    target_.soft_update_from(online_, hyper_.tau);
    rec.update = ++updates_;
    return rec;
  }

  const ActionSpace& space_;
  AgentHyper hyper_;
  diffnet::DenseNet online_;
  diffnet::DenseNet target_;
  diffnet::Adam opt_;
  ReplayBuffer buffer_;
  std::int64_t selected_ = 0;
  std::int64_t seen_ = 0;
  std::int64_t updates_ = 0;
};

}  // namespace

std::unique_ptr<Agent> make_agent(PolicyKind kind, const ActionSpace& space, Eigen::Index obs_width,
                                  const AgentHyper& hyper, Rng& rng) {
  hyper.validate();
  switch (kind) {
    case PolicyKind::ijcalb: return std::make_unique<IjcalbAgent>(space, obs_width, hyper, rng);
    case PolicyKind::dujcalb: return std::make_unique<DujcalbAgent>(space, obs_width, hyper, rng);
    case PolicyKind::djcalb: return std::make_unique<DjcalbAgent>(space, obs_width, hyper, rng);
    case PolicyKind::ujcalb: return std::make_unique<UjcalbAgent>(space, hyper);
  }
  throw ConfigError("unknown policy");
}

}  // namespace ntn::policy
