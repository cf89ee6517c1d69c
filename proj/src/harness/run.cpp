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

#include "ntn/harness/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <thread>
#include <tuple>

#include "ntn/common/errors.hpp"

namespace ntn::harness {

namespace {

constexpr std::uint64_t kAgentInitTag = 0xA6E7;
constexpr std::uint64_t kAgentActTag = 0xAC75;

auto row_key(const MetricsRow& r) { return std::make_tuple(static_cast<int>(r.policy), r.leos, r.seed, r.episode); }

void add(StepMetrics& acc, const StepMetrics& m, double w) {
  acc.rate += w * m.rate;
  acc.load += w * m.load;
  acc.cc += w * m.cc;
  acc.sc += w * m.sc;
  acc.reward += w * m.reward;
  acc.feasible += w * m.feasible;
}

std::ostream& num(std::ostream& out, double x) {
  if (!std::isfinite(x)) return out << "nan";
  return out << std::setprecision(9) << x;
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  hyper.validate();
  if (policies.empty()) throw ConfigError("run needs at least one policy");
  if (seeds.empty()) throw ConfigError("run needs at least one seed");
  if (sweep.empty()) throw ConfigError("run needs at least one LEOS count");
  for (int i : sweep)
    if (i < 1) throw ConfigError("LEOS counts must be positive");
  if (episodes < 1 || steps < 1) throw ConfigError("episodes and steps must be positive");
  if (workers < 1) throw ConfigError("worker count must be positive");
}

RunConfig desk_profile() {
  RunConfig c;
  c.scenario.ue_count = 100;
  c.scenario.association = sim::Association::all_covering;
  c.policies = {PolicyKind::ijcalb, PolicyKind::dujcalb, PolicyKind::djcalb, PolicyKind::ujcalb};
  c.hyper.actor_lr = 3e-3;
  c.hyper.batch = 16;
  c.hyper.actor_hidden = 16;
  c.hyper.critic_hidden = 32;
  c.hyper.update_every = 4;
  return c;
}

RunConfig full_paper_profile() {
  RunConfig c;
  c.policies = {PolicyKind::ijcalb, PolicyKind::dujcalb, PolicyKind::djcalb, PolicyKind::ujcalb};
  c.scenario.association = sim::Association::all_covering;
  c.sweep = {3, 9, 15, 21, 27};
  c.episodes = 200;
  c.steps = 200;
  return c;
}

CellResult run_cell(const RunConfig& cfg, PolicyKind kind, int leos, std::uint64_t seed) {
  sim::SimConfig sc = cfg.scenario;
  sc.leos_count = leos;
  sc.seed = seed;
  Environment env(sc, cfg.env);
  policy::AgentHyper hyper = cfg.hyper;
  hyper.total_steps = static_cast<std::int64_t>(cfg.episodes) * cfg.steps;

  const auto tag = static_cast<std::uint64_t>(kind);
  std::vector<std::unique_ptr<policy::Agent>> agents;
  std::vector<Rng> rngs;
  for (int i = 0; i < leos; ++i) {
    Rng init = make_rng(seed, {kAgentInitTag, tag, static_cast<std::uint64_t>(i)});
    agents.push_back(policy::make_agent(kind, env.space(), env.obs_width(), hyper, init));
    rngs.push_back(make_rng(seed, {kAgentActTag, tag, static_cast<std::uint64_t>(i)}));
  }

  CellResult out;
  const auto n = static_cast<std::size_t>(leos);
  std::vector<Vector> obs(n);
  std::vector<Mask> avail(n);
  std::vector<int> action(n);
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    MetricsRow row{kind, leos, seed, ep, {}, false};
    try {
      env.reset(cfg.steps);
      for (int t = 0; t < cfg.steps; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
          const int li = static_cast<int>(i);
          obs[i] = env.observe(li);
          avail[i] = env.available(li);
          action[i] = agents[i]->select(obs[i], avail[i], rngs[i]);
          env.apply(li, action[i]);
        }
        const StepOutcome step = env.finish_step();
        add(row.metrics, step.metrics, 1.0 / cfg.steps);
        for (std::size_t i = 0; i < n; ++i) {
          policy::Transition tr;
          tr.obs = obs[i];
          tr.action = action[i];
          tr.reward = step.rewards[i];
          tr.next_obs = env.observe(static_cast<int>(i));
          tr.terminal = t + 1 == cfg.steps;
          tr.available = avail[i];
          tr.next_available = env.available(static_cast<int>(i));
          agents[i]->observe(tr, rngs[i]);
        }
      }
    } catch (const TrainingError& e) {
      row.failed = true;
      row.metrics = {NAN, NAN, NAN, NAN, NAN, NAN};
      out.rows.push_back(row);
      out.error = e.what();
      break;
    }
    out.rows.push_back(row);
  }
  if (cfg.record_losses) {
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& l : agents[i]->losses()) out.losses.push_back({kind, leos, seed, static_cast<int>(i), l});
  }
  return out;
}

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  struct Cell {
    PolicyKind kind;
    int leos;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto k : cfg.policies)
    for (int i : cfg.sweep)
      for (auto s : cfg.seeds) cells.push_back({k, i, s});
  // Big cells first so the tail of the schedule is short.
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.leos > b.leos; });

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      try {
        results[k] = run_cell(cfg, cells[k].kind, cells[k].leos, cells[k].seed);
      } catch (const std::exception& e) {
        results[k].error = e.what();
      }
    }
  };
  const int n_threads = std::min<int>(cfg.workers, static_cast<int>(cells.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RunResult out;
  out.cells = static_cast<int>(cells.size());
  for (auto& r : results) {
    if (!r.error.empty()) ++out.failed_cells;
    out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    out.losses.insert(out.losses.end(), r.losses.begin(), r.losses.end());
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const MetricsRow& a, const MetricsRow& b) { return row_key(a) < row_key(b); });
  std::sort(out.losses.begin(), out.losses.end(), [](const LossRow& a, const LossRow& b) {
    return std::make_tuple(static_cast<int>(a.policy), a.leos, a.seed, a.agent, a.loss.update) <
           std::make_tuple(static_cast<int>(b.policy), b.leos, b.seed, b.agent, b.loss.update);
  });
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows, double tail) {
  if (!(tail > 0.0 && tail <= 1.0)) throw ConfigError("summary tail must lie in (0, 1]");
  using Key = std::tuple<int, int, std::uint64_t>;
  std::map<Key, int> last_episode;
  for (const auto& r : rows) {
    auto& e = last_episode.try_emplace({static_cast<int>(r.policy), r.leos, r.seed}, r.episode).first->second;
    e = std::max(e, r.episode);
  }
  // Per-seed tail means.
  std::map<Key, std::pair<StepMetrics, int>> per_seed;
  for (const auto& r : rows) {
    if (r.failed) continue;
    const Key k{static_cast<int>(r.policy), r.leos, r.seed};
    const int episodes = last_episode[k] + 1;
    const int keep = static_cast<int>(std::ceil(tail * episodes - 1e-9));
    if (r.episode < episodes - keep) continue;
    auto& acc = per_seed[k];
    add(acc.first, r.metrics, 1.0);
    ++acc.second;
  }
  std::map<std::pair<int, int>, std::pair<StepMetrics, int>> per_cell;
  for (const auto& [k, v] : per_seed) {
    auto& acc = per_cell[{std::get<0>(k), std::get<1>(k)}];
    add(acc.first, v.first, 1.0 / v.second);
    ++acc.second;
  }
  std::vector<SummaryRow> out;
  for (const auto& [k, v] : per_cell) {
    SummaryRow s;
    s.policy = static_cast<PolicyKind>(k.first);
    s.leos = k.second;
    s.seeds = v.second;
    add(s.metrics, v.first, 1.0 / v.second);
    out.push_back(s);
  }
  return out;
}

double metric_of(const StepMetrics& m, Figure f) {
  switch (f) {
    case Figure::rate: return m.rate;
    case Figure::load: return m.load;
    case Figure::cc: return m.cc;
    case Figure::sc: return m.sc;
  }
  return NAN;
}

namespace {

void write_values(std::ostream& out, const StepMetrics& m) {
  num(out, m.rate / 1e6) << ',';
  num(out, m.load) << ',';
  num(out, m.cc) << ',';
  num(out, m.sc) << ',';
  num(out, m.reward) << ',';
  num(out, m.feasible);
}

constexpr const char* kValueHeader = "rate_mbps,load,active_cc,assigned_sc,reward,feasibility";

}  // namespace

void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "policy,leos,seed,episode,status," << kValueHeader << '\n';
  for (const auto& r : rows) {
    out << policy::to_string(r.policy) << ',' << r.leos << ',' << r.seed << ',' << r.episode << ','
        << (r.failed ? "failed" : "ok") << ',';
    write_values(out, r.metrics);
    out << '\n';
  }
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "policy,leos,seeds," << kValueHeader << '\n';
  for (const auto& r : rows) {
    out << policy::to_string(r.policy) << ',' << r.leos << ',' << r.seeds << ',';
    write_values(out, r.metrics);
    out << '\n';
  }
}

void write_figure(std::ostream& out, const std::vector<SummaryRow>& rows, Figure f) {
  std::vector<PolicyKind> policies;
  std::vector<int> leos;
  for (const auto& r : rows) {
    if (std::find(policies.begin(), policies.end(), r.policy) == policies.end()) policies.push_back(r.policy);
    if (std::find(leos.begin(), leos.end(), r.leos) == leos.end()) leos.push_back(r.leos);
  }
  std::sort(policies.begin(), policies.end());
  std::sort(leos.begin(), leos.end());
  out << "leos";
  for (auto p : policies) out << ',' << policy::to_string(p);
  out << '\n';
  for (int i : leos) {
    out << i;
    for (auto p : policies) {
      out << ',';
      auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& r) { return r.policy == p && r.leos == i; });
      if (it != rows.end()) num(out, f == Figure::rate ? metric_of(it->metrics, f) / 1e6 : metric_of(it->metrics, f));
    }
    out << '\n';
  }
}

void write_losses(std::ostream& out, const std::vector<LossRow>& rows) {
  out << "policy,leos,seed,agent,update,critic_loss,actor_loss\n";
  for (const auto& r : rows) {
    out << policy::to_string(r.policy) << ',' << r.leos << ',' << r.seed << ',' << r.agent << ',' << r.loss.update
        << ',';
    num(out, r.loss.critic) << ',';
    num(out, r.loss.actor) << '\n';
  }
}

void write_outputs(const std::string& dir, const RunResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw ConfigError(std::string("cannot write ") + name + " in " + dir);
    return f;
  };
  const auto summary = summarize(result.rows);
  {
    auto f = open("metrics.csv");
    write_metrics(f, result.rows);
  }
  {
    auto f = open("summary.csv");
    write_summary(f, summary);
  }
  const std::pair<const char*, Figure> figs[] = {
      {"fig_rate.csv", Figure::rate}, {"fig_load.csv", Figure::load}, {"fig_cc.csv", Figure::cc}, {"fig_sc.csv", Figure::sc}};
  for (const auto& [name, fig] : figs) {
    auto f = open(name);
    write_figure(f, summary, fig);
  }
  if (!result.losses.empty()) {
    auto f = open("losses.csv");
    write_losses(f, result.losses);
  }
}

int workers_from_env() {
  const char* v = std::getenv("NTN_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("NTN_WORKERS must be a positive integer");
  return static_cast<int>(n);
}

}  // namespace ntn::harness
