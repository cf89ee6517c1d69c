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

#ifndef NTN_HARNESS_RUN_HPP
#define NTN_HARNESS_RUN_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntn/harness/environment.hpp"
#include "ntn/policies/agents.hpp"

namespace ntn::harness {

using policy::PolicyKind;

struct RunConfig {
  sim::SimConfig scenario;
  std::vector<PolicyKind> policies{PolicyKind::ijcalb};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<int> sweep{3, 9, 15};
  int episodes = 60;
  int steps = 60;
  policy::AgentHyper hyper;
  EnvOptions env;
  int workers = 1;
  bool record_losses = false;

  void validate() const;
};

// Small-desk defaults: 100 UEs, I in {3, 9, 15}, 60 x 60, five seeds, and
// network sizes and update cadence scaled down to fit the runtime budget.
RunConfig desk_profile();
// 200 x 200 episodes, I in {3, ..., 27}, table hyperparameters.
RunConfig full_paper_profile();

struct MetricsRow {
  PolicyKind policy = PolicyKind::ijcalb;
  int leos = 0;
  std::uint64_t seed = 0;
  int episode = 0;
  StepMetrics metrics;  // episode means
  bool failed = false;
};

struct LossRow {
  PolicyKind policy = PolicyKind::ijcalb;
  int leos = 0;
  std::uint64_t seed = 0;
  int agent = 0;
  policy::LossRecord loss;
};

struct CellResult {
  std::vector<MetricsRow> rows;
  std::vector<LossRow> losses;
  std::string error;  // empty when the cell completed
};

// One (policy, I, seed) training run. Single-threaded and deterministic.
CellResult run_cell(const RunConfig& cfg, PolicyKind kind, int leos, std::uint64_t seed);

struct RunResult {
  std::vector<MetricsRow> rows;  // sorted by (policy, leos, seed, episode)
  std::vector<LossRow> losses;
  int cells = 0;
  int failed_cells = 0;
};

// Runs every cell on cfg.workers threads; output order does not depend on
// scheduling.
RunResult run(const RunConfig& cfg);

struct SummaryRow {
  PolicyKind policy = PolicyKind::ijcalb;
  int leos = 0;
  int seeds = 0;
  StepMetrics metrics;
};

// Mean over seeds of each seed's mean over its last ceil(tail * episodes)
// episodes. Failed rows are skipped.
std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows, double tail = 0.1);

enum class Figure { rate, load, cc, sc };
double metric_of(const StepMetrics& m, Figure f);

void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);
// One row per I, one column per policy.
void write_figure(std::ostream& out, const std::vector<SummaryRow>& rows, Figure f);
void write_losses(std::ostream& out, const std::vector<LossRow>& rows);

// Writes metrics.csv, summary.csv, fig_*.csv and, when recorded, losses.csv.
void write_outputs(const std::string& dir, const RunResult& result);

// NTN_WORKERS, or 1 when unset.
int workers_from_env();

}  // namespace ntn::harness

#endif  // NTN_HARNESS_RUN_HPP
