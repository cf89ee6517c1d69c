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

#ifndef NTN_LOAD_LOAD_COUPLING_HPP
#define NTN_LOAD_LOAD_COUPLING_HPP

#include <string>
#include <vector>

#include "ntn/sim/scenario.hpp"

namespace ntn::load {

using sim::Mask;
using sim::Matrix;

// How a UE's demand is spread over the serving LEOS's active CCs.
enum class Splitter {
  spectral_efficiency,  // proportional to interference-free log2(1 + SNR)
  uniform
};

Splitter parse_splitter(const std::string& s);

// Demand of one UE on one (LEOS, CC).
struct LoadEntry {
  int ue = 0;
  int leos = 0;
  int cc = 0;
  double demand = 0.0;             // bit/s
  double signal = 0.0;             // received power from the serving LEOS, W
  std::vector<double> cross;       // received power from every LEOS j on this CC, W
};

struct LoadProblem {
  int leos_count = 0;
  int cc_count = 0;
  std::vector<Mask> active;        // per LEOS
  std::vector<double> bandwidth;   // per CC, Hz
  double noise_w = 0.0;            // per CC
  std::vector<LoadEntry> entries;

  // Throws ConfigError when a demand sits on an inactive CC or shapes disagree.
  void validate() const;
};

LoadProblem build_load_problem(const sim::ScenarioState& state, const sim::SimConfig& cfg,
                               const sim::GainTable& gains, const std::vector<sim::ServingLink>& links,
                               Splitter splitter = Splitter::spectral_efficiency);

std::vector<sim::DemandLink> demand_links(const LoadProblem& problem);

// SINR of an entry with the other LEOS at load `rho`.
double entry_sinr(const LoadProblem& problem, const LoadEntry& e, const Matrix& rho);

// rho'(i, c) = sum over entries on (i, c) of d / (B_c log2(1 + SINR(rho))).
// Throws InfeasibleLoadError on positive demand at zero SINR.
Matrix lb_update(const Matrix& rho, const LoadProblem& problem);

enum class LoadStatus { converged, diverged };

enum class StopRule {
  relative,  // |rho' - rho| <= tol * rho' in every entry
  absolute   // max |rho' - rho| < tol
};

struct SolveOptions {
  double tol = 1e-6;
  StopRule rule = StopRule::relative;
  int max_iter = 500;
  double rho_cap = 1.0;
  double blowup = 1e9;  // iterates above this are declared diverged
};

struct LoadSolution {
  Matrix rho;
  LoadStatus status = LoadStatus::diverged;
  int iterations = 0;      // updates applied before the one that confirmed convergence
  double residual = 0.0;   // last change, measured under the stop rule
  bool overload = false;   // some rho > rho_cap
  double max_load = 0.0;

  bool converged() const { return status == LoadStatus::converged; }
};

// Iterates lb_update from `start` (zero when null). Never throws on
// non-convergence; the status says so instead.
LoadSolution solve_load(const LoadProblem& problem, const SolveOptions& opts = {}, const Matrix* start = nullptr);

// Rate each entry receives when (i, c)'s resources rho are shared in
// proportion to the entries' needs at the SINR implied by rho.
std::vector<double> delivered_rates(const LoadProblem& problem, const Matrix& rho);

// max over entries of |delivered - demand| / demand.
double demand_residual(const LoadProblem& problem, const Matrix& rho);

}  // namespace ntn::load

#endif  // NTN_LOAD_LOAD_COUPLING_HPP
