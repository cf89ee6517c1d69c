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

#ifndef NTN_SIM_SCENARIO_HPP
#define NTN_SIM_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ntn/sim/config.hpp"

namespace ntn::sim {

using Matrix = Eigen::MatrixXd;
using Mask = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool has_bit(Mask m, int b) { return (m >> b) & 1U; }
inline int popcount(Mask m) { return __builtin_popcount(m); }

struct ScenarioState {
  std::vector<Point> ue;
  std::vector<double> demand;      // bit/s per UE
  std::vector<Point> track_center;
  std::vector<double> phase;       // rad, kept in [0, 2 pi)
  std::vector<int> pcc;            // CC index per LEOS
  std::vector<Mask> active_cc;     // PCC bit always set
  std::vector<Mask> sc_mask;       // owned backhaul SCs, disjoint across LEOS
  Matrix load;                     // leos x cc
  Matrix shadowing_db;             // leos x ue, zero when disabled
  double clock = 0.0;

  int leos_count() const { return static_cast<int>(phase.size()); }
  int ue_count() const { return static_cast<int>(ue.size()); }
};

// UEs and their demands come from one stream and LEOS tracks from another,
// each LEOS drawing in index order, so a run with fewer LEOS sees a prefix of
// the tracks of a larger run. PCCs start as i mod cc_count.
ScenarioState init_scenario(const SimConfig& cfg);

// Sets the PCC of every LEOS and resets the active sets to {PCC}.
void assign_pcc(ScenarioState& state, const std::vector<int>& pcc, const SimConfig& cfg);

// Moves every LEOS along its ground track. Requires dt > 0.
void advance(ScenarioState& state, const SimConfig& cfg, double dt);

// Current sub-satellite point of LEOS i.
Point leos_position(const ScenarioState& state, const SimConfig& cfg, int i);

// Free-space path gain (c / (4 pi d f))^2.
double path_gain(double distance, double frequency);

struct GainTable {
  std::vector<Matrix> access;  // one leos x ue matrix per CC
  Matrix backhaul;             // leos x sc

  double at(int leos, int ue, int cc) const { return access[static_cast<std::size_t>(cc)](leos, ue); }
};

GainTable compute_gains(const ScenarioState& state, const SimConfig& cfg);

// UE indices within coverage_radius of each LEOS, ascending.
std::vector<std::vector<int>> coverage(const ScenarioState& state, const SimConfig& cfg);

struct ServingLink {
  int ue;
  int leos;
};

// Serving links under cfg.association. Uncovered UEs get no link.
std::vector<ServingLink> associate(const ScenarioState& state, const SimConfig& cfg, const GainTable& gains,
                                   const std::vector<std::vector<int>>& cover);

// Load-weighted co-CC SINR of UE u served by LEOS i on CC c.
double sinr(int u, int i, int c, const Matrix& load, const std::vector<Mask>& active, const GainTable& gains,
            const SimConfig& cfg);

inline double shannon_rate(double bandwidth, double sinr) { return bandwidth * std::log2(1.0 + sinr); }

// Sum of per-SC Shannon rates of the gateway link; 0 for an empty mask.
double backhaul_capacity(int leos, Mask sc_mask, const GainTable& gains, const SimConfig& cfg);

// Demand (bit/s) that UE `ue` places on CC `cc` of LEOS `leos`.
struct DemandLink {
  int ue;
  int leos;
  int cc;
  double demand;
};

struct RateReport {
  std::vector<double> ue_rate;         // bit/s delivered on the access side
  std::vector<double> covered_demand;  // per LEOS
  std::vector<double> access;          // per LEOS, sum of min(demand, achievable)
  std::vector<double> capacity;        // per LEOS backhaul capacity
  std::vector<double> served;          // min(access, capacity)
  std::vector<double> slack;           // capacity - served

  bool backhaul_feasible(int i) const {
    return served[static_cast<std::size_t>(i)] <= capacity[static_cast<std::size_t>(i)];
  }
};

// A link on a CC with load rho delivers demand * min(1, 1 / rho).
RateReport rate_report(const ScenarioState& state, const SimConfig& cfg, const GainTable& gains,
                       const std::vector<DemandLink>& links, const Matrix& load);

// One row per LEOS: t,leos,x,y,pcc,active_ccs,scs,rho_0..rho_{C-1}.
void write_dump_header(std::ostream& out, const SimConfig& cfg);
void append_dump(std::ostream& out, const ScenarioState& state, const SimConfig& cfg);

}  // namespace ntn::sim

#endif  // NTN_SIM_SCENARIO_HPP
