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

#include "ntn/harness/environment.hpp"

#include <algorithm>
#include <numeric>

#include "ntn/common/errors.hpp"

namespace ntn::harness {

namespace {

double clip(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

double reward(const RewardWeights& w, double rate, int scc_count, int sc_count, bool overload) {
  return w.rate * rate / w.rate_norm - w.energy * static_cast<double>(scc_count + sc_count) / w.energy_norm -
         (overload ? w.infeasible : 0.0);
}

Environment::Environment(sim::SimConfig cfg, EnvOptions opts)
    : cfg_(std::move(cfg)), opts_(opts), space_(cfg_.cc_count - 1, cfg_.sc_count) {
  cfg_.validate();
  if (!(opts_.weights.rate_norm > 0.0) || !(opts_.weights.energy_norm > 0.0))
    throw ConfigError("reward normalizers must be positive");
  reset(1);
}

void Environment::reset(int steps_per_episode) {
  if (steps_per_episode < 1) throw ConfigError("episode needs at least one step");
  steps_ = steps_per_episode;
  step_ = 0;
  state_ = sim::init_scenario(cfg_);
  std::vector<int> ccs(static_cast<std::size_t>(cfg_.cc_count));
  std::iota(ccs.begin(), ccs.end(), 0);
  sim::assign_pcc(state_, policy::round_robin_pcc(cfg_.leos_count, ccs), cfg_);
  std::fill(state_.sc_mask.begin(), state_.sc_mask.end(), Mask{0});
  const auto n = static_cast<std::size_t>(cfg_.leos_count);
  last_served_.assign(n, 0.0);
  last_slack_.assign(n, 0.0);
  refresh_geometry();
}

void Environment::refresh_geometry() {
  gains_ = sim::compute_gains(state_, cfg_);
  const auto cover = sim::coverage(state_, cfg_);
  links_ = sim::associate(state_, cfg_, gains_, cover);
  const auto n = static_cast<std::size_t>(cfg_.leos_count);
  covered_demand_.assign(n, 0.0);
  covered_count_.assign(n, 0);
  for (const auto& l : links_) {
    covered_demand_[static_cast<std::size_t>(l.leos)] += state_.demand[static_cast<std::size_t>(l.ue)];
    ++covered_count_[static_cast<std::size_t>(l.leos)];
  }
  unit_capacity_.assign(n, 0.0);
  for (int i = 0; i < cfg_.leos_count; ++i) {
    double acc = 0.0;
    for (int k = 0; k < cfg_.sc_count; ++k) acc += sim::backhaul_capacity(i, Mask{1} << k, gains_, cfg_);
    unit_capacity_[static_cast<std::size_t>(i)] = acc / cfg_.sc_count;
  }
}

Mask Environment::owned_by_others(int i) const {
  Mask m = 0;
  for (int j = 0; j < cfg_.leos_count; ++j)
    if (j != i) m |= state_.sc_mask[static_cast<std::size_t>(j)];
  return m;
}

Mask Environment::available(int i) const {
  const Mask all = (Mask{1} << cfg_.sc_count) - 1;
  return all & ~owned_by_others(i);
}

int Environment::current_action(int i) const {
  const auto k = static_cast<std::size_t>(i);
  const int pcc = state_.pcc[k];
  Mask scc = 0;
  for (int b = 0; b < space_.scc_bits(); ++b)
    if (sim::has_bit(state_.active_cc[k], policy::scc_to_cc(pcc, b))) scc |= Mask{1} << b;
  return space_.encode(scc, state_.sc_mask[k]);
}

Vector Environment::observe(int i) const {
  const auto k = static_cast<std::size_t>(i);
  const double norm = opts_.weights.rate_norm;
  Vector o = Vector::Zero(obs_width());
  const int n = covered_count_[k];
  o(0) = clip(covered_demand_[k] / norm);
  o(1) = n > 0 ? clip(covered_demand_[k] / n / cfg_.ue_demand_cap()) : 0.0;
  o(2) = clip(n / 16.0);
  o(3) = clip(last_served_[k] / norm);
  o(4) = clip(last_slack_[k] / norm);
  o(5) = clip(unit_capacity_[k] / norm);
  o(6) = steps_ > 1 ? 2.0 * step_ / (steps_ - 1) - 1.0 : 0.0;
  const int a = current_action(i);
  const Mask scc = space_.scc_mask(a);
  const Mask free = ~owned_by_others(i);
  Eigen::Index p = 7;
  for (int b = 0; b < space_.scc_bits(); ++b) o(p++) = sim::has_bit(scc, b);
  for (int b = 0; b < space_.sc_bits(); ++b) o(p++) = sim::has_bit(state_.sc_mask[k], b);
  for (int b = 0; b < space_.sc_bits(); ++b) o(p++) = sim::has_bit(free, b);
  return o;
}

void Environment::apply(int i, int action) {
  if (i < 0 || i >= cfg_.leos_count) throw ConfigError("LEOS index out of range");
  if (action < 0 || action >= space_.size()) throw ConfigError("action index out of range");
  if (!space_.feasible(action, available(i))) throw ConfigError("action takes an SC owned by another LEOS");
  const auto k = static_cast<std::size_t>(i);
  state_.active_cc[k] = policy::active_set(space_, state_.pcc[k], action);
  state_.sc_mask[k] = space_.sc_mask(action);
}

StepOutcome Environment::finish_step() {
  const auto n = static_cast<std::size_t>(cfg_.leos_count);
  StepOutcome out;
  const auto problem = load::build_load_problem(state_, cfg_, gains_, links_, opts_.splitter);
  bool solved = true;
  try {
    out.solution = load::solve_load(problem, opts_.solve);
    solved = out.solution.converged();
  } catch (const InfeasibleLoadError&) {
    solved = false;
    out.solution.rho = sim::Matrix::Zero(cfg_.leos_count, cfg_.cc_count);
    out.solution.status = load::LoadStatus::diverged;
  }
  state_.load = out.solution.rho;
  const auto report = sim::rate_report(state_, cfg_, gains_, load::demand_links(problem), state_.load);

  std::vector<bool> has_demand(n, false);
  for (const auto& e : problem.entries) has_demand[static_cast<std::size_t>(e.leos)] = true;

  out.rewards.resize(n);
  out.overload.resize(n);
  StepMetrics& m = out.metrics;
  for (std::size_t i = 0; i < n; ++i) {
    const Mask act = state_.active_cc[i];
    double load_sum = 0.0;
    bool over = !solved && has_demand[i];
    for (int c = 0; c < cfg_.cc_count; ++c) {
      if (!sim::has_bit(act, c)) continue;
      load_sum += state_.load(static_cast<Eigen::Index>(i), c);
      if (state_.load(static_cast<Eigen::Index>(i), c) > opts_.solve.rho_cap) over = true;
    }
    const int cc = sim::popcount(act);
    const int sc = sim::popcount(state_.sc_mask[i]);
    out.overload[i] = over;
    out.rewards[i] = reward(opts_.weights, report.served[i], cc - 1, sc, over);
    last_served_[i] = report.served[i];
    last_slack_[i] = report.slack[i];
    m.rate += report.served[i];
    m.load += load_sum / cc;
    m.cc += cc;
    m.sc += sc;
    m.reward += out.rewards[i];
    m.feasible += over ? 0.0 : 1.0;
  }
  const double inv = 1.0 / static_cast<double>(n);
  m.rate *= inv;
  m.load *= inv;
  m.cc *= inv;
  m.sc *= inv;
  m.reward *= inv;
  m.feasible *= inv;

  sim::advance(state_, cfg_, cfg_.time_step);
  ++step_;
  refresh_geometry();
  return out;
}

}  // namespace ntn::harness
