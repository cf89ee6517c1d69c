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

#ifndef NTN_POLICIES_BANDIT_HPP
#define NTN_POLICIES_BANDIT_HPP

#include <cstdint>
#include <vector>

#include "ntn/policies/agents.hpp"

namespace ntn::policy {

// Contextual bandit with deterministic per-arm rewards. The context is a
// uniform draw from [-1, 1] that carries no reward information.
struct BanditToy {
  std::vector<double> rewards;
  Eigen::Index obs_width = 1;

  ActionSpace space() const;
  int best() const;
  Vector context(Rng& rng) const;
};

struct BanditRun {
  std::vector<int> actions;
  double regret = 0.0;  // sum of (best reward - obtained reward)
  std::int64_t updates = 0;
};

// Plays until the agent has logged `updates` gradient updates, or for
// `pulls` pulls when `updates` is 0. Every transition is terminal.
BanditRun play_bandit(Agent& agent, const BanditToy& toy, std::int64_t updates, std::int64_t pulls, Rng& rng);

// Mean probability of the best arm over `draws` fresh contexts.
double best_arm_probability(Agent& agent, const BanditToy& toy, int draws, Rng& rng);

// Mean entropy (nats) of the agent's distribution over `draws` contexts.
double policy_entropy(Agent& agent, const BanditToy& toy, int draws, Rng& rng);

}  // namespace ntn::policy

#endif  // NTN_POLICIES_BANDIT_HPP
