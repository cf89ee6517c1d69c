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

#include <malloc.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ntn/common/errors.hpp"
#include "ntn/gai/flow.hpp"
#include "ntn/gai/gan.hpp"
#include "ntn/harness/run.hpp"
#include "ntn/sim/scenario.hpp"

namespace {

using namespace ntn;

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw ConfigError("bad integer '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<policy::PolicyKind> parse_policies(const std::string& s) {
  if (s == "all")
    return {policy::PolicyKind::ijcalb, policy::PolicyKind::dujcalb, policy::PolicyKind::djcalb,
            policy::PolicyKind::ujcalb};
  std::vector<policy::PolicyKind> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(policy::parse_policy(item));
  return out;
}

struct RunArgs {
  std::string config;
  std::string policy = "all";
  std::string sweep;
  int seeds = 0;
  std::string out = "results";
  bool full_paper = false;
  bool literal_scale = false;
  bool losses = false;
  int episodes = 0;
  int steps = 0;
  double actor_lr = -1.0;
  double critic_lr = -1.0;
  int batch = 0;
  int update_every = 0;
};

int do_run(const RunArgs& a) {
  harness::RunConfig cfg = a.full_paper ? harness::full_paper_profile() : harness::desk_profile();
  if (!a.config.empty()) cfg.scenario = sim::load_config(a.config);
  cfg.policies = parse_policies(a.policy);
  if (!a.sweep.empty()) cfg.sweep = parse_int_list(a.sweep);
  if (a.seeds > 0) {
    cfg.seeds.clear();
    for (int s = 1; s <= a.seeds; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (a.episodes > 0) cfg.episodes = a.episodes;
  if (a.steps > 0) cfg.steps = a.steps;
  if (a.actor_lr >= 0.0) cfg.hyper.actor_lr = a.actor_lr;
  if (a.critic_lr >= 0.0) cfg.hyper.critic_lr = a.critic_lr;
  if (a.batch > 0) cfg.hyper.batch = a.batch;
  if (a.update_every > 0) cfg.hyper.update_every = a.update_every;
  if (a.literal_scale) cfg.hyper.noise_scale = diffusion::NoiseScale::literal_eq8;
  cfg.record_losses = a.losses;
  cfg.workers = harness::workers_from_env();

  const auto result = harness::run(cfg);
  harness::write_outputs(a.out, result);
  spdlog::info("{} cells, {} failed, {} metric rows written to {}", result.cells, result.failed_cells,
               result.rows.size(), a.out);
  return result.cells > 0 && result.failed_cells == result.cells ? 1 : 0;
}

int do_gflownet(const std::string& out, std::uint64_t seed, int samples) {
  // Diamond: 0 -> {1, 2} -> {3, 4}, rewards (1, 3) on the terminals.
  gai::FlowDag dag(5, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}}, {0, 0, 0, 1, 3});
  Rng rng = make_rng(seed);
  auto res = gai::gflownet_train(dag, {}, rng);
  const auto freq = gai::terminal_frequencies(res.network, samples, rng);
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write " + out);
  f << "state,reward,target,frequency\n";
  double total = 0.0;
  for (int s : dag.terminals()) total += dag.reward(s);
  for (int s : dag.terminals())
    f << s << ',' << dag.reward(s) << ',' << dag.reward(s) / total << ',' << freq[static_cast<std::size_t>(s)] << '\n';
  spdlog::info("final loss {:.3g}, Z = {:.4f}", res.loss.back(), res.network.z());
  return 0;
}

int do_gan(const std::string& out, std::uint64_t seed, int samples) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> target(3.0, 1.0);
  gai::Matrix data(1, 4096);
  for (auto& x : data.reshaped()) x = target(rng);
  auto pair = gai::make_gan_pair(1, 1, 16, rng);
  const auto log = gai::gan_train(data, pair, {}, rng);
  const gai::Matrix g = gai::gan_generate(pair, samples, rng);
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write " + out);
  f << "iteration,value,d_real\n";
  for (std::size_t k = 0; k < log.value.size(); ++k) f << k << ',' << log.value[k] << ',' << log.d_real[k] << '\n';
  const double mean = g.mean();
  const double sd = std::sqrt((g.array() - mean).square().mean());
  spdlog::info("generator mean {:.3f}, sd {:.3f}", mean, sd);
  return 0;
}

int do_dump(const std::string& config, int leos, int steps, const std::string& out) {
  sim::SimConfig cfg = config.empty() ? sim::SimConfig{} : sim::load_config(config);
  if (leos > 0) cfg.leos_count = leos;
  auto state = sim::init_scenario(cfg);
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write " + out);
  sim::write_dump_header(f, cfg);
  for (int t = 0; t < steps; ++t) {
    sim::append_dump(f, state, cfg);
    sim::advance(state, cfg, cfg.time_step);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Keep the large per-update Eigen temporaries on the heap instead of
  // mapping and unmapping them on every allocation.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);

  CLI::App app{"LEO NTN carrier and backhaul allocation experiments"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "train policies over a LEOS sweep and write CSV tables");
  run->add_option("--config", ra.config, "scenario INI file (defaults to the profile scenario)");
  run->add_option("--policy", ra.policy, "ijcalb, dujcalb, djcalb, ujcalb, a comma list or 'all'");
  run->add_option("--sweep", ra.sweep, "LEOS counts, e.g. 3,9,15");
  run->add_option("--seeds", ra.seeds, "number of seeds (1..N)");
  run->add_option("--out", ra.out, "output directory");
  run->add_flag("--full-paper-profile", ra.full_paper, "200x200 episodes, I up to 27, table hyperparameters");
  run->add_flag("--literal-eq8-scale", ra.literal_scale, "scale reverse-step noise by (tilde beta / 2)^2");
  run->add_flag("--losses", ra.losses, "also write per-update losses.csv");
  run->add_option("--episodes", ra.episodes, "episodes per run");
  run->add_option("--steps", ra.steps, "steps per episode");
  run->add_option("--actor-lr", ra.actor_lr);
  run->add_option("--critic-lr", ra.critic_lr);
  run->add_option("--batch", ra.batch);
  run->add_option("--update-every", ra.update_every, "environment steps per gradient update");

  std::string gf_out = "gflownet.csv";
  std::uint64_t seed = 1;
  int samples = 20000;
  auto* gf = app.add_subcommand("gflownet", "train flow matching on the diamond DAG");
  gf->add_option("--out", gf_out);
  gf->add_option("--seed", seed);
  gf->add_option("--samples", samples);

  std::string gan_out = "gan.csv";
  auto* gan = app.add_subcommand("gan", "fit a 1-D GAN to N(3, 1)");
  gan->add_option("--out", gan_out);
  gan->add_option("--seed", seed);
  gan->add_option("--samples", samples);

  std::string dump_cfg, dump_out = "scenario.csv";
  int dump_leos = 0, dump_steps = 10;
  auto* dump = app.add_subcommand("dump", "write LEOS positions and configuration per step");
  dump->add_option("--config", dump_cfg);
  dump->add_option("--leos", dump_leos);
  dump->add_option("--steps", dump_steps);
  dump->add_option("--out", dump_out);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return do_run(ra);
    if (*gf) return do_gflownet(gf_out, seed, samples);
    if (*gan) return do_gan(gan_out, seed, samples);
    if (*dump) return do_dump(dump_cfg, dump_leos, dump_steps, dump_out);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
