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

#ifndef NTN_GAI_FLOW_HPP
#define NTN_GAI_FLOW_HPP

#include <span>
#include <utility>
#include <vector>

#include "ntn/common/random.hpp"
#include "ntn/diffnet/dense_net.hpp"

namespace ntn::gai {

using diffnet::Matrix;
using diffnet::Vector;

// Enumerable directed acyclic state graph. States without children are
// terminal and must carry a positive reward.
class FlowDag {
public:
  FlowDag() = default;
  // Throws ConfigError on cycles, dangling indices, non-positive terminal
  // rewards or terminals unreachable from the root.
  FlowDag(int state_count, const std::vector<std::pair<int, int>>& edges, const std::vector<double>& reward,
          int root = 0);

  int size() const { return static_cast<int>(children_.size()); }
  int root() const { return root_; }
  bool is_terminal(int s) const { return children_[static_cast<std::size_t>(s)].empty(); }
  const std::vector<int>& children(int s) const { return children_[static_cast<std::size_t>(s)]; }
  const std::vector<int>& parents(int s) const { return parents_[static_cast<std::size_t>(s)]; }
  double reward(int s) const { return reward_[static_cast<std::size_t>(s)]; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::vector<int> terminals() const;

  void check_state(int s) const;

private:
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<double> reward_;
  int root_ = 0;
};

// Root inflow is pinned to 1, so a balanced network has Z = 1 / sum(R).
inline constexpr double kRootInflow = 1.0;

// Inflow minus the state's target: total outflow for inner states, Z * R for
// terminals. `flows(s, s')` holds F(s, s') and is ignored off the edge set.
double flow_mismatch(const FlowDag& dag, const Matrix& flows, double z, int s);

// Mean squared mismatch over the batch (states may repeat).
double flow_loss(const FlowDag& dag, const Matrix& flows, double z, std::span<const int> states);

// pi(s' | s) proportional to F(s, s'), in children(s) order.
// Throws DegenerateStateError when every outgoing flow is zero.
std::vector<double> flow_policy(const FlowDag& dag, const Matrix& flows, int s);

// Learned edge flows F_theta(s, s') = exp(net([onehot(s); onehot(s')])) plus log Z.
class FlowNetwork {
public:
  FlowNetwork(FlowDag dag, Eigen::Index hidden, Rng& rng);

  const FlowDag& dag() const { return dag_; }
  diffnet::DenseNet& net() { return net_; }
  const diffnet::DenseNet& net() const { return net_; }
  double log_z() const { return log_z_; }
  double& log_z() { return log_z_; }
  double z() const;

  // One column per dag edge, in dag().edges() order.
  Matrix edge_inputs() const;
  // Dense state x state matrix of current flows.
  Matrix flows() const;

  std::vector<double> policy(int s) const { return flow_policy(dag_, flows(), s); }

private:
  FlowDag dag_;
  diffnet::DenseNet net_;
  double log_z_ = 0.0;
};

// Follows the flow policy from the root to a terminal; returns every visited
// state including both ends.
std::vector<int> rollout(const FlowDag& dag, const Matrix& flows, Rng& rng);

// Empirical terminal frequencies over `count` rollouts, indexed by state.
std::vector<double> terminal_frequencies(const FlowNetwork& net, int count, Rng& rng);

struct GflowConfig {
  int iterations = 2000;
  int batch = 16;  // trajectories per update
  double lr = 1e-2;
  Eigen::Index hidden = 16;
};

struct GflowResult {
  FlowNetwork network;
  std::vector<double> loss;  // one entry per iteration
};

// On-policy rollouts from the root; every visited state enters the loss.
// Throws TrainingError on a non-finite loss.
GflowResult gflownet_train(const FlowDag& dag, const GflowConfig& cfg, Rng& rng);

}  // namespace ntn::gai

#endif  // NTN_GAI_FLOW_HPP
