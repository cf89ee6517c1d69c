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

#include "ntn/policies/bandit.hpp"

#include <algorithm>
#include <cmath>

#include "ntn/common/errors.hpp"

namespace ntn::policy {

ActionSpace BanditToy::space() const {
  const auto n = rewards.size();
  if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("bandit arm count must be a power of two");
  int bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return ActionSpace(bits, 0);
}

int BanditToy::best() const {
  return static_cast<int>(std::max_element(rewards.begin(), rewards.end()) - rewards.begin());
}

Vector BanditToy::context(Rng& rng) const {
  Vector v(obs_width);
  for (auto& x : v) x = 2.0 * uniform01(rng) - 1.0;
  return v;
}

BanditRun play_bandit(Agent& agent, const BanditToy& toy, std::int64_t updates, std::int64_t pulls, Rng& rng) {
  if (updates <= 0 && pulls <= 0) throw ConfigError("bandit run needs an update or pull budget");
  BanditRun run;
  const double top = toy.rewards[static_cast<std::size_t>(toy.best())];
  // Guard against agents that never update.
  const std::int64_t cap = updates > 0 ? 100 * updates + 10000 : pulls;
  for (std::int64_t n = 0; n < cap; ++n) {
    if (updates > 0 && static_cast<std::int64_t>(agent.losses().size()) >= updates) break;
    Transition t;
    t.obs = toy.context(rng);
    t.action = agent.select(t.obs, 0, rng);
    t.reward = toy.rewards[static_cast<std::size_t>(t.action)];
    t.next_obs = toy.context(rng);
    t.terminal = true;
    run.actions.push_back(t.action);
    run.regret += top - t.reward;
    agent.observe(t, rng);
  }
  run.updates = static_cast<std::int64_t>(agent.losses().size());
  return run;
}

double best_arm_probability(Agent& agent, const BanditToy& toy, int draws, Rng& rng) {
  double acc = 0.0;
  for (int k = 0; k < draws; ++k) acc += agent.distribution(toy.context(rng), 0, rng)(toy.best());
  return acc / draws;
}

double policy_entropy(Agent& agent, const BanditToy& toy, int draws, Rng& rng) {
  double acc = 0.0;
  for (int k = 0; k < draws; ++k) {
    const Vector p = agent.distribution(toy.context(rng), 0, rng);
    for (double x : p)
      if (x > 0.0) acc -= x * std::log(x);
  }
  return acc / draws;
}

}  // namespace ntn::policy
