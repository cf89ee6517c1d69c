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

#ifndef NTN_HARNESS_ENVIRONMENT_HPP
#define NTN_HARNESS_ENVIRONMENT_HPP

#include <vector>

#include "ntn/load/load_coupling.hpp"
#include "ntn/policies/action_space.hpp"
#include "ntn/sim/config.hpp"
#include "ntn/sim/scenario.hpp"

namespace ntn::harness {

using policy::Mask;
using policy::Vector;

struct RewardWeights {
  double rate = 1.0;
  double energy = 0.2;
  double infeasible = 1.0;
  double rate_norm = 10e6;   // bit/s
  double energy_norm = 1.0;  // resources
};

// w_rate * rate / rate_norm - w_energy * (scc + sc) / energy_norm - w_infeasible * overload
double reward(const RewardWeights& w, double rate, int scc_count, int sc_count, bool overload);

struct EnvOptions {
  RewardWeights weights;
  load::Splitter splitter = load::Splitter::spectral_efficiency;
  load::SolveOptions solve;
};

// Per-step averages over LEOS.
struct StepMetrics {
  double rate = 0.0;      // served bit/s per LEOS
  double load = 0.0;      // mean load over each LEOS's active CCs
  double cc = 0.0;        // active CCs per LEOS, PCC included
  double sc = 0.0;        // owned SCs per LEOS
  double reward = 0.0;    // per agent
  double feasible = 0.0;  // share of LEOS without overload
};

struct StepOutcome {
  std::vector<double> rewards;
  std::vector<bool> overload;  // per LEOS, rho > cap on an active CC or unsolved
  load::LoadSolution solution;
  StepMetrics metrics;
};

// Observation layout, every entry in [-1, 1]:
//   0 covered demand / rate_norm     1 mean UE demand / max UE demand
//   2 covered UE count / 16          3 last served rate / rate_norm
//   4 last backhaul slack / rate_norm 5 mean one-SC capacity / rate_norm
//   6 episode clock mapped to [-1, 1]
//   then SCC bits, owned SC bits, free SC bits (0/1).
class Environment {
public:
  Environment(sim::SimConfig cfg, EnvOptions opts);

  const sim::SimConfig& config() const { return cfg_; }
  const sim::ScenarioState& state() const { return state_; }
  const policy::ActionSpace& space() const { return space_; }
  int leos_count() const { return state_.leos_count(); }
  Eigen::Index obs_width() const { return 7 + space_.scc_bits() + 2 * space_.sc_bits(); }

  // Fresh scenario, round-robin PCCs, nothing but the PCCs active, no SCs owned.
  void reset(int steps_per_episode);

  Vector observe(int i) const;
  // SCs LEOS i may use: its own plus those nobody owns.
  Mask available(int i) const;
  Mask owned_by_others(int i) const;
  // Applies an action of LEOS i right away so later agents see the ownership.
  // Infeasible actions throw ConfigError.
  void apply(int i, int action);
  // Current action index implied by LEOS i's configuration.
  int current_action(int i) const;

  // Solves the load, scores every agent and moves the clock forward.
  StepOutcome finish_step();

private:
  void refresh_geometry();

  sim::SimConfig cfg_;
  EnvOptions opts_;
  policy::ActionSpace space_;
  sim::ScenarioState state_;
  sim::GainTable gains_;
  std::vector<sim::ServingLink> links_;
  std::vector<double> covered_demand_;
  std::vector<int> covered_count_;
  std::vector<double> unit_capacity_;
  std::vector<double> last_served_;
  std::vector<double> last_slack_;
  int step_ = 0;
  int steps_ = 1;
};

}  // namespace ntn::harness

#endif  // NTN_HARNESS_ENVIRONMENT_HPP
