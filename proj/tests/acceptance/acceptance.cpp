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

// Acceptance run: one PASS/FAIL line per criterion.

#include <malloc.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ntn/diffusion/gadm.hpp"
#include "ntn/gai/flow.hpp"
#include "ntn/gai/gan.hpp"
#include "ntn/harness/run.hpp"
#include "ntn/load/load_coupling.hpp"
#include "ntn/policies/bandit.hpp"

using namespace ntn;
using diffnet::Activation;
using diffnet::LayerShape;
using diffnet::Matrix;
using diffnet::Vector;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Norm-wise relative error between two gradient vectors.
double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

std::vector<double*> parameters(diffnet::DenseNet& net) {
  std::vector<double*> p;
  for (auto& l : net.layers()) {
    for (Eigen::Index k = 0; k < l.weights.size(); ++k) p.push_back(l.weights.data() + k);
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) p.push_back(l.bias.data() + k);
  }
  return p;
}

std::vector<double> flatten(const diffnet::Gradients& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    out.insert(out.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
    out.insert(out.end(), g.bias[l].data(), g.bias[l].data() + g.bias[l].size());
  }
  return out;
}

std::vector<double> central_differences(diffnet::DenseNet& net, const std::function<double()>& loss, double h) {
  std::vector<double> out;
  for (double* p : parameters(net)) {
    const double keep = *p;
    *p = keep + h;
    const double up = loss();
    *p = keep - h;
    const double down = loss();
    *p = keep;
    out.push_back((up - down) / (2.0 * h));
  }
  return out;
}

// ------------------------------------------------------------------ 1

Verdict gradient_integrity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(101);
  const Activation hidden_acts[] = {Activation::tanh, Activation::sigmoid, Activation::identity, Activation::exp};
  const Activation heads[] = {Activation::identity, Activation::softmax, Activation::tanh, Activation::sigmoid};
  std::uniform_int_distribution<int> width(2, 6), pick(0, 3), depth(1, 3);
  double worst_net = 0.0;
  const int toys = 25;
  for (int toy = 0; toy < toys; ++toy) {
    std::vector<LayerShape> shapes;
    Eigen::Index in = width(rng);
    const int d = depth(rng);
    for (int l = 0; l < d; ++l) {
      const Eigen::Index out = width(rng);
      shapes.push_back({in, out, l + 1 == d ? heads[pick(rng)] : hidden_acts[pick(rng)]});
      in = out;
    }
    diffnet::DenseNet net(shapes, rng);
    const Matrix x = 0.5 * standard_normal(shapes.front().inputs, 3, rng);
    const Matrix w = standard_normal(shapes.back().outputs, 3, rng);
    auto loss = [&] { return net.forward(x).cwiseProduct(w).sum(); };
    diffnet::GradientTape tape;
    net.forward(x, tape);
    auto grads = net.zero_gradients();
    net.backward(tape, w, grads);
    worst_net = std::max(worst_net, rel_err(flatten(grads), central_differences(net, loss, 1e-6)));
  }

  double worst_chain = 0.0;
  std::uniform_int_distribution<int> actions(2, 4), obs_w(1, 3), hid(3, 6);
  const auto sched = diffusion::build_schedule(5, 0.2, 0.8);
  for (int toy = 0; toy < toys; ++toy) {
    const int a = actions(rng);
    diffusion::Denoiser den(a, obs_w(rng), 5, hid(rng), rng);
    const Vector s = standard_normal(den.obs_width(), 1, rng);
    const auto noise = diffusion::draw_chain_noise(a, 1, 5, rng);
    // A random linear read-out of x0 keeps the objective well scaled; -log pi
    // of a near-certain action is too flat for central differences.
    const Vector w = standard_normal(a, 1, rng);
    auto loss = [&] { return w.dot(diffusion::gadm_sample(s, den, sched, noise).logits); };
    const auto sample = diffusion::gadm_sample(s, den, sched, noise);
    const Matrix d = w;
    auto grads = den.net().zero_gradients();
    diffusion::backprop_chain(den, sched, sample.trace, d, grads);
    worst_chain = std::max(worst_chain, rel_err(flatten(grads), central_differences(den.net(), loss, 1e-6)));
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = worst_net < 1e-4 && worst_chain < 1e-3 && secs < 60.0;
  v.detail = std::to_string(toys) + fmt(" toys each; worst relative error dense %.2e (< 1e-4), 5-step chain %.2e "
                                        "(< 1e-3); %.1f s",
                                        worst_net, worst_chain, secs);
  return v;
}

// ------------------------------------------------------------------ 2

Verdict gflownet_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  gai::FlowDag dag(5, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}}, {0, 0, 0, 1, 3});
  // Enumerated target: R / sum(R) over the terminals.
  double total = 0.0;
  for (int s : dag.terminals()) total += dag.reward(s);
  Rng rng = make_rng(202);
  const auto res = gai::gflownet_train(dag, {}, rng);
  const auto freq = gai::terminal_frequencies(res.network, 20000, rng);
  double tv = 0.0;
  for (int s : dag.terminals()) tv += 0.5 * std::abs(freq[static_cast<std::size_t>(s)] - dag.reward(s) / total);
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = tv < 0.05 && secs < 120.0;
  v.detail = fmt("frequencies (%.3f, %.3f) vs (0.25, 0.75), TV %.4f (< 0.05); %.1f s", freq[3], freq[4], tv, secs);
  return v;
}

// ------------------------------------------------------------------ 3

Verdict gan_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(303);
  const Matrix data = (standard_normal(1, 10000, rng).array() + 3.0).matrix();
  auto pair = gai::make_gan_pair(1, 1, 16, rng);
  gai::GanConfig cfg;
  cfg.k = 1;
  const auto log = gai::gan_train(data, pair, cfg, rng);
  const double mean = gai::gan_generate(pair, 20000, rng).mean();
  // Middle fifth of training.
  const std::size_t n = log.d_real.size();
  double lo = 1.0, hi = 0.0;
  for (std::size_t k = 2 * n / 5; k < 3 * n / 5; ++k) {
    lo = std::min(lo, log.d_real[k]);
    hi = std::max(hi, log.d_real[k]);
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = std::abs(mean - 3.0) < 0.3 && lo > 0.05 && hi < 0.95 && secs < 180.0;
  v.detail = fmt("generator mean %.3f (3 +- 0.3); mid-training D(real) in [%.3f, %.3f]; %.1f s", mean, lo, hi, secs);
  return v;
}

// ------------------------------------------------------------------ 4

load::LoadEntry entry(int leos, int cc, double demand, double signal, std::vector<double> cross) {
  load::LoadEntry e;
  e.leos = leos;
  e.cc = cc;
  e.demand = demand;
  e.signal = signal;
  e.cross = std::move(cross);
  return e;
}

Verdict load_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Single LEOS: no interference, so rho = sum d / (B log2(1 + S / N)).
  double worst_closed = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    load::LoadProblem p;
    p.leos_count = 1;
    p.cc_count = 2;
    p.active = {0b11};
    p.bandwidth = {400e6, 200e6};
    p.noise_w = 1e-12;
    Matrix closed = Matrix::Zero(1, 2);
    for (int k = 0; k < 6; ++k) {
      const int c = k % 2;
      const double d = 1e6 + 5e6 * u(rng);
      const double s = 1e-12 * (1.0 + 1e4 * u(rng));
      p.entries.push_back(entry(0, c, d, s, {s}));
      closed(0, c) += d / (p.bandwidth[static_cast<std::size_t>(c)] * std::log2(1.0 + s / p.noise_w));
    }
    const auto sol = load::solve_load(p);
    worst_closed = std::max(worst_closed, (sol.rho - closed).cwiseAbs().maxCoeff());
  }

  // Random coupled 3-LEOS instances in normalized units.
  double worst_residual = 0.0, worst_gap = 0.0;
  bool all_converged = true, monotone = true;
  for (int trial = 0; trial < 30; ++trial) {
    load::LoadProblem p;
    p.leos_count = 3;
    p.cc_count = 2;
    p.active = {0b11, 0b11, 0b11};
    p.bandwidth = {1.0, 1.0};
    p.noise_w = 1.0;
    for (int k = 0; k < 12; ++k) {
      std::vector<double> cross(3);
      for (auto& x : cross) x = 0.5 + 9.5 * u(rng);
      const int i = k % 3;
      cross[static_cast<std::size_t>(i)] = 5.0 + 45.0 * u(rng);
      p.entries.push_back(entry(i, (k / 3) % 2, 0.05 + 0.25 * u(rng), cross[static_cast<std::size_t>(i)], cross));
    }
    const auto a = load::solve_load(p);
    const Matrix cap = Matrix::Ones(3, 2);
    const auto b = load::solve_load(p, {}, &cap);
    all_converged = all_converged && a.converged() && b.converged();
    worst_residual = std::max(worst_residual, load::demand_residual(p, a.rho));
    worst_gap = std::max(worst_gap, (a.rho - b.rho).cwiseAbs().maxCoeff());
    Matrix rho = Matrix::Zero(3, 2);
    for (int it = 0; it < 60; ++it) {
      const Matrix next = load::lb_update(rho, p);
      if ((next.array() < rho.array()).any()) monotone = false;
      rho = next;
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = worst_closed < 1e-9 && all_converged && worst_residual < 1e-6 && worst_gap < 1e-5 && monotone && secs < 60.0;
  v.detail = fmt("closed-form error %.1e (< 1e-9); 3-LEOS residual %.1e (< 1e-6), start gap %.1e (< 1e-5); ",
                 worst_closed, worst_residual, worst_gap) +
             (all_converged ? "all converged" : "NOT all converged") +
             (monotone ? ", iterates monotone" : ", iterates NOT monotone") + fmt("; %.1f s", secs);
  return v;
}

// ------------------------------------------------------------------ 5

Verdict policy_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const policy::BanditToy toy{{1.0, 0.0}};
  const auto space = toy.space();
  policy::AgentHyper h;
  h.actor_lr = 1e-3;
  h.actor_hidden = 16;
  h.critic_hidden = 16;
  h.total_steps = 2100;

  Rng r1 = make_rng(505);
  auto ij = policy::make_agent(policy::PolicyKind::ijcalb, space, toy.obs_width, h, r1);
  const auto run_ij = policy::play_bandit(*ij, toy, 2000, 0, r1);
  const double p_ij = policy::best_arm_probability(*ij, toy, 4000, r1);

  Rng r2 = make_rng(506);
  auto dq = policy::make_agent(policy::PolicyKind::djcalb, space, toy.obs_width, h, r2);
  const auto run_dq = policy::play_bandit(*dq, toy, 2000, 0, r2);
  const double p_dq = policy::best_arm_probability(*dq, toy, 4000, r2);

  Rng r3 = make_rng(507);
  auto ucb = policy::make_agent(policy::PolicyKind::ujcalb, space, toy.obs_width, h, r3);
  const auto run_ucb = policy::play_bandit(*ucb, toy, 0, 10000, r3);

  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = run_ij.updates <= 2000 && run_dq.updates <= 2000 && p_ij > 0.95 && p_dq > 0.95 &&
           run_ucb.regret < 0.1 * 10000 && secs < 300.0;
  v.detail = fmt("IJCALB pi(best) %.4f, DJCALB pi(best) %.4f after 2000 updates (> 0.95); UCB regret %.0f at t=10000 "
                 "(< 1000); %.1f s",
                 p_ij, p_dq, run_ucb.regret, secs);
  return v;
}

// ------------------------------------------------------------------ 6

const harness::SummaryRow* find(const std::vector<harness::SummaryRow>& s, policy::PolicyKind k, int leos) {
  for (const auto& r : s)
    if (r.policy == k && r.leos == leos) return &r;
  return nullptr;
}

Verdict trends(const std::string& out_dir, harness::RunResult* keep) {
  const auto t0 = std::chrono::steady_clock::now();
  harness::RunConfig cfg = harness::desk_profile();
  cfg.workers = harness::workers_from_env();
  const auto result = harness::run(cfg);
  harness::write_outputs(out_dir, result);
  const auto summary = harness::summarize(result.rows);
  *keep = result;
  const double secs = seconds_since(t0);

  std::ostringstream why;
  bool a_ok = true, b_ok = true, c_ok = true, d_ok = true;
  const double slack = 0.05;
  for (auto k : cfg.policies) {
    for (std::size_t n = 1; n < cfg.sweep.size(); ++n) {
      const auto* lo = find(summary, k, cfg.sweep[n - 1]);
      const auto* hi = find(summary, k, cfg.sweep[n]);
      if (!lo || !hi) {
        a_ok = b_ok = false;
        continue;
      }
      if (hi->metrics.load < lo->metrics.load) {
        a_ok = false;
        why << " (a) " << policy::to_string(k) << " load " << lo->metrics.load << " -> " << hi->metrics.load << ";";
      }
      if (hi->metrics.rate > lo->metrics.rate) {
        b_ok = false;
        why << " (b) " << policy::to_string(k) << " rate " << lo->metrics.rate << " -> " << hi->metrics.rate << ";";
      }
    }
  }
  // Seed-averaged counts and rewards, compared at every I.
  using policy::PolicyKind;
  for (int i : cfg.sweep) {
    const auto* ij = find(summary, PolicyKind::ijcalb, i);
    const auto* du = find(summary, PolicyKind::dujcalb, i);
    if (!ij || !du) {
      c_ok = d_ok = false;
      continue;
    }
    for (auto other : {PolicyKind::djcalb, PolicyKind::ujcalb}) {
      const auto* o = find(summary, other, i);
      if (!o) {
        c_ok = false;
        continue;
      }
      if (ij->metrics.cc > (1.0 + slack) * o->metrics.cc) {
        c_ok = false;
        why << " (c) I=" << i << " CC ijcalb " << ij->metrics.cc << " > " << policy::to_string(other) << ' '
            << o->metrics.cc << ";";
      }
      if (ij->metrics.sc > (1.0 + slack) * o->metrics.sc) {
        c_ok = false;
        why << " (c) I=" << i << " SC ijcalb " << ij->metrics.sc << " > " << policy::to_string(other) << ' '
            << o->metrics.sc << ";";
      }
    }
    // Rewards can be negative; the slack is taken on the magnitude.
    if (ij->metrics.reward < du->metrics.reward - slack * std::abs(du->metrics.reward)) {
      d_ok = false;
      why << " (d) I=" << i << " reward ijcalb " << ij->metrics.reward << " < dujcalb " << du->metrics.reward << ";";
    }
  }
  Verdict v;
  v.pass = a_ok && b_ok && c_ok && d_ok && result.failed_cells == 0 && secs < 1800.0;
  std::ostringstream d;
  d << "(a) " << (a_ok ? "ok" : "FAIL") << ", (b) " << (b_ok ? "ok" : "FAIL") << ", (c) " << (c_ok ? "ok" : "FAIL")
    << ", (d) " << (d_ok ? "ok" : "FAIL") << "; " << result.failed_cells << " failed cells; " << static_cast<int>(secs) << " s";
  if (!why.str().empty()) d << ";" << why.str();
  v.detail = d.str();
  return v;
}

// ------------------------------------------------------------------ 7

std::string metrics_bytes(const std::vector<harness::MetricsRow>& rows) {
  std::ostringstream out;
  harness::write_metrics(out, rows);
  return out.str();
}

Verdict determinism(const harness::RunResult* desk) {
  const auto t0 = std::chrono::steady_clock::now();
  harness::RunConfig cfg = harness::desk_profile();
  cfg.sweep = {3, 9};
  cfg.seeds = {1, 2};
  cfg.episodes = 3;
  cfg.steps = 20;
  const std::string first = metrics_bytes(harness::run(cfg).rows);
  const bool same_repeat = first == metrics_bytes(harness::run(cfg).rows);
  cfg.workers = 2;
  const bool same_threads = first == metrics_bytes(harness::run(cfg).rows);

  // One full-size cell of the trend run, replayed on its own.
  bool same_cell = true;
  if (desk) {
    const auto full = harness::desk_profile();
    const auto cell = harness::run_cell(full, policy::PolicyKind::ijcalb, 3, 1);
    std::vector<harness::MetricsRow> from_run;
    for (const auto& r : desk->rows)
      if (r.policy == policy::PolicyKind::ijcalb && r.leos == 3 && r.seed == 1) from_run.push_back(r);
    same_cell = metrics_bytes(cell.rows) == metrics_bytes(from_run);
  }
  Verdict v;
  v.pass = same_repeat && same_threads && same_cell;
  v.detail = std::string("repeat ") + (same_repeat ? "identical" : "DIFFERENT") + ", 1 vs 2 workers " +
             (same_threads ? "identical" : "DIFFERENT") +
             (desk ? std::string(", desk cell replay ") + (same_cell ? "identical" : "DIFFERENT") : "") +
             fmt("; %.1f s", seconds_since(t0));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);

  CLI::App app{"acceptance criteria"};
  std::string out_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--out", out_dir, "where the desk-profile tables go");
  app.add_option("--only", only, "run just these criteria");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());
  auto want = [&](int c) { return selected.empty() || selected.count(c) > 0; };

  bool all = true;
  auto report = [&](int n, const char* name, const Verdict& v) {
    std::printf("CRITERION %d %-22s %s  %s\n", n, name, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  };
  harness::RunResult desk;
  bool have_desk = false;
  if (want(1)) report(1, "gradient-integrity", gradient_integrity());
  if (want(2)) report(2, "gflownet-oracle", gflownet_oracle());
  if (want(3)) report(3, "gan-sanity", gan_sanity());
  if (want(4)) report(4, "load-coupling", load_correctness());
  if (want(5)) report(5, "policy-learning", policy_sanity());
  if (want(6)) {
    report(6, "trend-reproduction", trends(out_dir, &desk));
    have_desk = true;
  }
  if (want(7)) report(7, "determinism", determinism(have_desk ? &desk : nullptr));
  return all ? 0 : 1;
}
