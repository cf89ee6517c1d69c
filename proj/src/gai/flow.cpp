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

#include "ntn/gai/flow.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "ntn/common/errors.hpp"
#include "ntn/diffnet/adam.hpp"

namespace ntn::gai {

using diffnet::Activation;
using diffnet::LayerShape;

FlowDag::FlowDag(int state_count, const std::vector<std::pair<int, int>>& edges, const std::vector<double>& reward,
                 int root)
    : children_(static_cast<std::size_t>(std::max(state_count, 0))),
      parents_(children_.size()),
      edges_(edges),
      reward_(reward),
      root_(root) {
  if (state_count < 1) throw ConfigError("flow dag needs at least one state");
  if (static_cast<int>(reward.size()) != state_count) throw ConfigError("reward table size differs from state count");
  check_state(root);
  for (auto [a, b] : edges) {
    check_state(a);
    check_state(b);
    if (a == b) throw ConfigError("self loop at state " + std::to_string(a));
    children_[static_cast<std::size_t>(a)].push_back(b);
    parents_[static_cast<std::size_t>(b)].push_back(a);
  }
  if (!parents(root).empty()) throw ConfigError("root state has parents");

  // Kahn's algorithm doubles as the cycle check.
  std::vector<int> indegree(children_.size());
  for (int s = 0; s < state_count; ++s) indegree[static_cast<std::size_t>(s)] = static_cast<int>(parents(s).size());
  std::deque<int> ready;
  for (int s = 0; s < state_count; ++s)
    if (indegree[static_cast<std::size_t>(s)] == 0) ready.push_back(s);
  int seen = 0;
  while (!ready.empty()) {
    const int s = ready.front();
    ready.pop_front();
    ++seen;
    for (int c : children(s))
      if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
  }
  if (seen != state_count) throw ConfigError("flow graph contains a cycle");

  std::vector<bool> reached(children_.size(), false);
  std::deque<int> queue{root};
  reached[static_cast<std::size_t>(root)] = true;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int c : children(s)) {
      if (!reached[static_cast<std::size_t>(c)]) {
        reached[static_cast<std::size_t>(c)] = true;
        queue.push_back(c);
      }
    }
  }
  for (int s = 0; s < state_count; ++s) {
    if (!reached[static_cast<std::size_t>(s)]) throw ConfigError("state " + std::to_string(s) + " unreachable");
    if (is_terminal(s) && !(reward_[static_cast<std::size_t>(s)] > 0.0))
      throw ConfigError("terminal state " + std::to_string(s) + " needs a positive reward");
  }
  if (is_terminal(root)) throw ConfigError("root state is terminal");
}

void FlowDag::check_state(int s) const {
  if (s < 0 || s >= size()) throw ConfigError("state " + std::to_string(s) + " not in graph");
}

std::vector<int> FlowDag::terminals() const {
  std::vector<int> out;
  for (int s = 0; s < size(); ++s)
    if (is_terminal(s)) out.push_back(s);
  return out;
}

double flow_mismatch(const FlowDag& dag, const Matrix& flows, double z, int s) {
  dag.check_state(s);
  double in = 0.0;
  if (s == dag.root()) {
    in = kRootInflow;
  } else {
    for (int p : dag.parents(s)) in += flows(p, s);
  }
  if (dag.is_terminal(s)) return in - z * dag.reward(s);
  double out = 0.0;
  for (int c : dag.children(s)) out += flows(s, c);
  return in - out;
}

double flow_loss(const FlowDag& dag, const Matrix& flows, double z, std::span<const int> states) {
  if (states.empty()) return 0.0;
  double sum = 0.0;
  for (int s : states) {
    const double m = flow_mismatch(dag, flows, z, s);
    sum += m * m;
  }
  return sum / static_cast<double>(states.size());
}

std::vector<double> flow_policy(const FlowDag& dag, const Matrix& flows, int s) {
  dag.check_state(s);
  if (dag.is_terminal(s)) throw ConfigError("no actions at terminal state " + std::to_string(s));
  std::vector<double> p;
  double total = 0.0;
  for (int c : dag.children(s)) {
    p.push_back(flows(s, c));
    total += flows(s, c);
  }
  if (!(total > 0.0)) throw DegenerateStateError("all outgoing flow is zero at state " + std::to_string(s));
  for (auto& v : p) v /= total;
  return p;
}

FlowNetwork::FlowNetwork(FlowDag dag, Eigen::Index hidden, Rng& rng) : dag_(std::move(dag)) {
  const Eigen::Index n = dag_.size();
  net_ = diffnet::DenseNet(
      {LayerShape{2 * n, hidden, Activation::tanh}, LayerShape{hidden, 1, Activation::exp}}, rng);
}

double FlowNetwork::z() const { return std::exp(log_z_); }

Matrix FlowNetwork::edge_inputs() const {
  const Eigen::Index n = dag_.size();
  Matrix in = Matrix::Zero(2 * n, static_cast<Eigen::Index>(dag_.edges().size()));
  for (std::size_t e = 0; e < dag_.edges().size(); ++e) {
    const auto [a, b] = dag_.edges()[e];
    in(a, static_cast<Eigen::Index>(e)) = 1.0;
    in(n + b, static_cast<Eigen::Index>(e)) = 1.0;
  }
  return in;
}

Matrix FlowNetwork::flows() const {
  const Matrix f = net_.forward(edge_inputs());
  Matrix dense = Matrix::Zero(dag_.size(), dag_.size());
  for (std::size_t e = 0; e < dag_.edges().size(); ++e) {
    const auto [a, b] = dag_.edges()[e];
    dense(a, b) = f(0, static_cast<Eigen::Index>(e));
  }
  return dense;
}

std::vector<int> rollout(const FlowDag& dag, const Matrix& flows, Rng& rng) {
  std::vector<int> path{dag.root()};
  int s = dag.root();
  while (!dag.is_terminal(s)) {
    const auto p = flow_policy(dag, flows, s);
    std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
    s = dag.children(s)[pick(rng)];
    path.push_back(s);
  }
  return path;
}

std::vector<double> terminal_frequencies(const FlowNetwork& net, int count, Rng& rng) {
  std::vector<double> freq(static_cast<std::size_t>(net.dag().size()), 0.0);
  if (count < 1) return freq;
  const Matrix flows = net.flows();
  for (int i = 0; i < count; ++i) freq[static_cast<std::size_t>(rollout(net.dag(), flows, rng).back())] += 1.0;
  for (auto& f : freq) f /= count;
  return freq;
}

GflowResult gflownet_train(const FlowDag& dag, const GflowConfig& cfg, Rng& rng) {
  if (cfg.iterations < 0 || cfg.batch < 1 || !(cfg.lr > 0.0)) throw ConfigError("invalid gflownet settings");
  GflowResult result{FlowNetwork(dag, cfg.hidden, rng), {}};
  FlowNetwork& fn = result.network;
  diffnet::Adam adam(fn.net());
  diffnet::ScalarAdam z_adam;
  const Matrix inputs = fn.edge_inputs();
  const auto& edges = dag.edges();
  // edge index lookup for the gradient scatter
  std::vector<std::vector<Eigen::Index>> edge_id(static_cast<std::size_t>(dag.size()),
                                                 std::vector<Eigen::Index>(static_cast<std::size_t>(dag.size()), -1));
  for (std::size_t e = 0; e < edges.size(); ++e)
    edge_id[static_cast<std::size_t>(edges[e].first)][static_cast<std::size_t>(edges[e].second)] =
        static_cast<Eigen::Index>(e);
  auto id = [&](int a, int b) { return edge_id[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; };

  result.loss.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    diffnet::GradientTape tape;
    const Matrix f = fn.net().forward(inputs, tape);
    Matrix dense = Matrix::Zero(dag.size(), dag.size());
    for (std::size_t e = 0; e < edges.size(); ++e) dense(edges[e].first, edges[e].second) = f(0, static_cast<Eigen::Index>(e));

    std::vector<int> batch;
    for (int b = 0; b < cfg.batch; ++b) {
      const auto path = rollout(dag, dense, rng);
      batch.insert(batch.end(), path.begin(), path.end());
    }
    const double z = fn.z();
    const double loss = flow_loss(dag, dense, z, batch);
    if (!std::isfinite(loss)) throw TrainingError("non-finite flow loss at iteration " + std::to_string(it), static_cast<std::size_t>(it));
    result.loss.push_back(loss);

    const double scale = 2.0 / static_cast<double>(batch.size());
    Matrix d_flow = Matrix::Zero(1, f.cols());
    double d_log_z = 0.0;
    for (int s : batch) {
      const double m = flow_mismatch(dag, dense, z, s);
      if (s != dag.root())
        for (int p : dag.parents(s)) d_flow(0, id(p, s)) += scale * m;
      if (dag.is_terminal(s)) {
        d_log_z -= scale * m * z * dag.reward(s);
      } else {
        for (int c : dag.children(s)) d_flow(0, id(s, c)) -= scale * m;
      }
    }
    auto grads = fn.net().zero_gradients();
    fn.net().backward(tape, d_flow, grads);
    adam.step(fn.net(), grads, cfg.lr);
    z_adam.step(fn.log_z(), d_log_z, cfg.lr);
  }
  return result;
}

}  // namespace ntn::gai
