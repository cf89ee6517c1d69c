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

#include <doctest.h>

#include <cmath>
#include <map>

#include "ntn/common/errors.hpp"
#include "ntn/policies/agents.hpp"
#include "ntn/policies/bandit.hpp"

using namespace ntn;
using namespace ntn::policy;

namespace {

AgentHyper bandit_hyper(double zeta = 0.05) {
  AgentHyper h;
  h.actor_lr = 1e-3;
  h.actor_hidden = 16;
  h.critic_hidden = 16;
  h.entropy = zeta;
  h.total_steps = 2100;
  return h;
}

}  // namespace

TEST_CASE("action space enumerates SCC and SC masks jointly") {
  ActionSpace s(4, 6);
  CHECK(s.size() == 1024);
  CHECK(s.encode(0b1010, 0b000111) == (0b1010 | (0b000111 << 4)));
  for (int a = 0; a < s.size(); ++a) CHECK(s.encode(s.scc_mask(a), s.sc_mask(a)) == a);
  // SC exclusivity: a mask is feasible iff it only uses available SCs.
  const Mask avail = 0b010011;
  int feasible = 0;
  for (int a = 0; a < s.size(); ++a) {
    const bool subset = (s.sc_mask(a) | avail) == avail;
    CHECK(s.feasible(a, avail) == subset);
    feasible += subset;
    CHECK(s.mask(avail)(a) == (subset ? 1.0 : 0.0));
  }
  CHECK(feasible == 16 * 8);
  CHECK(s.feasible_count(avail) == feasible);
  CHECK(s.feasible_count(0) == 16);
}

TEST_CASE("the PCC is active under every action") {
  ActionSpace s(4, 6);
  for (int pcc = 0; pcc < 5; ++pcc) {
    std::map<int, int> seen;
    for (int k = 0; k < 4; ++k) seen[scc_to_cc(pcc, k)]++;
    CHECK(seen.count(pcc) == 0);
    CHECK(seen.size() == 4);
    for (int a = 0; a < s.size(); ++a) {
      const Mask act = active_set(s, pcc, a);
      CHECK(sim::has_bit(act, pcc));
      CHECK(sim::popcount(act) == 1 + sim::popcount(s.scc_mask(a)));
    }
  }
}

TEST_CASE("round robin PCC assignment") {
  const std::vector<int> ccs{0, 1, 2, 3, 4};
  CHECK(round_robin_pcc(3, ccs) == std::vector<int>{0, 1, 2});
  CHECK(round_robin_pcc(6, ccs).back() == 0);
  CHECK(round_robin_pcc(1, ccs) == std::vector<int>{0});
  CHECK_THROWS_AS(round_robin_pcc(0, ccs), ConfigError);
  CHECK_THROWS_AS(round_robin_pcc(2, {}), ConfigError);
}

TEST_CASE("masked distributions sum to one and vanish on infeasible actions") {
  ActionSpace s(2, 3);
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector logits = 4.0 * standard_normal(s.size(), 1, rng);
    const Mask avail = static_cast<Mask>(trial % 8);
    for (const Vector& p : {masked_softmax(logits, s.mask(avail)),
                            mask_distribution(diffnet::softmax_columns(logits).col(0), s.mask(avail))}) {
      CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
      for (int a = 0; a < s.size(); ++a) {
        if (!s.feasible(a, avail)) CHECK(p(a) == 0.0);
        else CHECK(p(a) > 0.0);
      }
    }
  }
  CHECK_THROWS_AS(masked_softmax(Vector::Zero(4), Vector::Zero(4)), ConfigError);
}

TEST_CASE("replay buffer is FIFO at capacity and samples uniformly") {
  ReplayBuffer buf(5);
  for (int k = 0; k < 7; ++k) {
    Transition t;
    t.action = k;
    buf.push(t);
  }
  CHECK(buf.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(buf.at(i).action == static_cast<int>(i) + 2);
  CHECK_THROWS_AS(buf.at(5), ConfigError);
  CHECK_THROWS_AS(ReplayBuffer(0), ConfigError);

  // Chi-square against the uniform law; 4 degrees of freedom, 99.9% quantile 18.47.
  Rng rng(11);
  std::map<int, int> counts;
  const int n = 50000;
  for (const auto* t : buf.sample(n, rng)) counts[t->action]++;
  double chi2 = 0.0;
  for (int a = 2; a < 7; ++a) chi2 += std::pow(counts[a] - n / 5.0, 2) / (n / 5.0);
  CHECK(chi2 < 18.47);
}

TEST_CASE("actor objective closed forms") {
  const int a = 8;
  const double zeta = 0.05;
  SUBCASE("uniform policy and uniform Q") {
    const Matrix pi = Matrix::Constant(a, 3, 1.0 / a);
    const Matrix q = Matrix::Constant(a, 3, 2.5);
    const auto obj = actor_objective(pi, q, zeta);
    CHECK(obj.loss == doctest::Approx(-2.5 - zeta * std::log(a)).epsilon(1e-12));
    CHECK(obj.d_logits.cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("logit gradient matches central differences") {
    Rng rng(4);
    const Vector z = standard_normal(a, 1, rng);
    const Vector q = standard_normal(a, 1, rng);
    auto loss_at = [&](const Vector& logits) {
      return actor_objective(diffnet::softmax_columns(logits), q, zeta).loss;
    };
    const auto obj = actor_objective(diffnet::softmax_columns(z), q, zeta);
    for (int k = 0; k < a; ++k) {
      Vector hi = z, lo = z;
      hi(k) += 1e-6;
      lo(k) -= 1e-6;
      CHECK(obj.d_logits(k, 0) == doctest::Approx((loss_at(hi) - loss_at(lo)) / 2e-6).epsilon(1e-6));
    }
  }
}

TEST_CASE("critic all-action evaluation agrees with per-action evaluation") {
  ActionSpace s(2, 2);
  Rng rng(6);
  BitCritic c1(s, 3, 8, rng), c2(s, 3, 8, rng);
  const Matrix obs = standard_normal(3, 4, rng);
  const Matrix q1 = c1.all(obs);
  const Matrix q2 = c2.all(obs);
  const Matrix qmin = q1.cwiseMin(q2);
  for (int a = 0; a < s.size(); ++a) {
    const Matrix direct = c1.at(obs, std::vector<int>(4, a));
    for (int j = 0; j < 4; ++j) {
      CHECK(q1(a, j) == doctest::Approx(direct(0, j)).epsilon(1e-12));
      CHECK(qmin(a, j) <= q1(a, j));
      CHECK(qmin(a, j) <= q2(a, j));
    }
  }
}

TEST_CASE("soft updates") {
  Rng rng(8);
  diffnet::DenseNet online({diffnet::LayerShape{3, 4, diffnet::Activation::tanh}}, rng);
  diffnet::DenseNet target({diffnet::LayerShape{3, 4, diffnet::Activation::tanh}}, rng);
  auto gap = [&] {
    return (target.layers()[0].weights - online.layers()[0].weights).norm() +
           (target.layers()[0].bias - online.layers()[0].bias).norm();
  };
  const double tau = 0.005;
  double before = gap();
  for (int k = 0; k < 10; ++k) {
    target.soft_update_from(online, tau);
    const double after = gap();
    CHECK(after == doctest::Approx((1.0 - tau) * before).epsilon(1e-9));
    before = after;
  }
  target.soft_update_from(online, 1.0);
  CHECK(gap() == 0.0);
}

TEST_CASE("UCB rules") {
  UcbTable t(3, 1.0);
  CHECK(std::isinf(t.score(0)));
  t.record(0, 1.0);
  t.record(0, 3.0);
  t.record(1, 0.5);
  CHECK(t.mean(0) == 2.0);
  CHECK(t.count(0) == 2);
  CHECK(t.score(0) == doctest::Approx(2.0 + std::sqrt(2.0 * std::log(3.0) / 2.0)));

  ActionSpace s(2, 0);
  Rng init(1);
  auto ucb = make_agent(PolicyKind::ujcalb, s, 1, AgentHyper{}, init);
  Rng rng(2);
  Transition tr;
  tr.obs = tr.next_obs = Vector::Zero(1);
  // Every action once before any repeat.
  std::map<int, int> first;
  for (int k = 0; k < 4; ++k) {
    tr.action = ucb->select(tr.obs, 0, rng);
    CHECK(first[tr.action]++ == 0);
    tr.reward = 0.0;
    ucb->observe(tr, rng);
  }
}

TEST_CASE("UCB settles on the better arm once the bonus shrinks") {
  ActionSpace s(1, 0);
  Rng init(1);
  auto ucb = make_agent(PolicyKind::ujcalb, s, 1, AgentHyper{}, init);
  Rng rng(3);
  const double means[2] = {0.9, 0.1};
  Transition tr;
  tr.obs = tr.next_obs = Vector::Zero(1);
  int last = -1;
  for (int k = 0; k < 5000; ++k) {
    tr.action = last = ucb->select(tr.obs, 0, rng);
    tr.reward = uniform01(rng) < means[tr.action] ? 1.0 : 0.0;
    ucb->observe(tr, rng);
  }
  CHECK(last == 0);
}

TEST_CASE("double DQN targets") {
  const Vector online = (Vector(3) << 1.0, 5.0, 2.0).finished();
  const Vector target = (Vector(3) << 10.0, 20.0, 30.0).finished();
  const Vector all = Vector::Ones(3);
  CHECK(ddqn_target(1.5, true, 0.95, online, target, all) == 1.5);
  // Online argmax picks action 1, the target net scores it.
  CHECK(ddqn_target(1.5, false, 0.95, online, target, all) == doctest::Approx(1.5 + 0.95 * 20.0));
  const Vector no_one = (Vector(3) << 1.0, 0.0, 1.0).finished();
  CHECK(ddqn_target(1.5, false, 0.95, online, target, no_one) == doctest::Approx(1.5 + 0.95 * 30.0));
}

TEST_CASE("epsilon decays linearly over the first half") {
  AgentHyper h;
  h.total_steps = 1000;
  CHECK(epsilon_at(h, 0) == 1.0);
  CHECK(epsilon_at(h, 250) == doctest::Approx(0.525));
  CHECK(epsilon_at(h, 500) == doctest::Approx(0.05));
  CHECK(epsilon_at(h, 900) == doctest::Approx(0.05));
}

TEST_CASE("every policy only picks feasible actions") {
  ActionSpace s(2, 3);
  AgentHyper h = bandit_hyper();
  h.batch = 4;
  h.actor_hidden = 8;
  h.critic_hidden = 8;
  for (auto kind : {PolicyKind::ijcalb, PolicyKind::dujcalb, PolicyKind::djcalb, PolicyKind::ujcalb}) {
    Rng rng(5);
    auto agent = make_agent(kind, s, 2, h, rng);
    for (int k = 0; k < 60; ++k) {
      Transition tr;
      tr.obs = standard_normal(2, 1, rng);
      tr.available = static_cast<Mask>(k % 8);
      tr.action = agent->select(tr.obs, tr.available, rng);
      CHECK(s.feasible(tr.action, tr.available));
      const Vector p = agent->distribution(tr.obs, tr.available, rng);
      CHECK(p.sum() == doctest::Approx(1.0));
      CHECK(p.cwiseProduct(Vector::Ones(s.size()) - s.mask(tr.available)).sum() == 0.0);
      tr.reward = -static_cast<double>(sim::popcount(s.sc_mask(tr.action)));
      tr.next_obs = standard_normal(2, 1, rng);
      tr.next_available = static_cast<Mask>((k + 1) % 8);
      agent->observe(tr, rng);
    }
  }
}

TEST_CASE("diffusion actor-critic learns the 2-armed bandit") {
  const BanditToy toy{{1.0, 0.0}};
  const ActionSpace s = toy.space();
  Rng rng = make_rng(21);
  auto agent = make_agent(PolicyKind::ijcalb, s, toy.obs_width, bandit_hyper(), rng);
  const auto run = play_bandit(*agent, toy, 2000, 0, rng);
  CHECK(run.updates == 2000);
  CHECK(best_arm_probability(*agent, toy, 2000, rng) > 0.95);
}

TEST_CASE("double DQN learns the 2-armed bandit") {
  const BanditToy toy{{1.0, 0.0}};
  const ActionSpace s = toy.space();
  Rng rng = make_rng(22);
  auto agent = make_agent(PolicyKind::djcalb, s, toy.obs_width, bandit_hyper(), rng);
  play_bandit(*agent, toy, 2000, 0, rng);
  CHECK(best_arm_probability(*agent, toy, 500, rng) > 0.95);
}

TEST_CASE("UCB regret on the 2-armed bandit is sublinear") {
  const BanditToy toy{{1.0, 0.0}};
  const ActionSpace s = toy.space();
  Rng rng = make_rng(23);
  auto agent = make_agent(PolicyKind::ujcalb, s, toy.obs_width, AgentHyper{}, rng);
  const auto run = play_bandit(*agent, toy, 0, 10000, rng);
  CHECK(run.regret < 0.1 * 10000);
  // Deterministic rewards: the bad arm is pulled about 2 ln t times.
  CHECK(run.regret < 4.0 * std::log(10000.0));
}

TEST_CASE("larger entropy weight never lowers the converged entropy") {
  const BanditToy toy{{1.0, 0.0}};
  const ActionSpace s = toy.space();
  double previous = -1.0;
  for (double zeta : {0.0, 0.05, 0.5}) {
    Rng rng = make_rng(24);
    auto agent = make_agent(PolicyKind::ijcalb, s, toy.obs_width, bandit_hyper(zeta), rng);
    play_bandit(*agent, toy, 2000, 0, rng);
    Rng eval = make_rng(99);
    const double h = policy_entropy(*agent, toy, 2000, eval);
    MESSAGE("zeta " << zeta << " entropy " << h);
    CHECK(h >= previous);
    previous = h;
  }
}

TEST_CASE("invalid hyperparameters are rejected") {
  AgentHyper h;
  h.discount = 1.5;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h = AgentHyper{};
  h.tau = 0.0;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h = AgentHyper{};
  h.eps_end = 0.5;
  h.eps_start = 0.1;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  CHECK_THROWS_AS(parse_policy("ppo"), ConfigError);
  CHECK(parse_policy("dujcalb") == PolicyKind::dujcalb);
}
