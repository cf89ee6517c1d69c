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

#include "ntn/load/load_coupling.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ntn/common/errors.hpp"

namespace ntn::load {

using sim::has_bit;

Splitter parse_splitter(const std::string& s) {
  if (s == "spectral_efficiency") return Splitter::spectral_efficiency;
  if (s == "uniform") return Splitter::uniform;
  throw ConfigError("unknown demand splitter '" + s + "'");
}

void LoadProblem::validate() const {
  if (leos_count < 1 || cc_count < 1) throw ConfigError("load problem needs LEOS and CCs");
  if (static_cast<int>(active.size()) != leos_count) throw ConfigError("one active mask per LEOS required");
  if (static_cast<int>(bandwidth.size()) != cc_count) throw ConfigError("one bandwidth per CC required");
  if (!(noise_w >= 0.0)) throw ConfigError("noise must be non-negative");
  for (const auto& e : entries) {
    if (e.leos < 0 || e.leos >= leos_count || e.cc < 0 || e.cc >= cc_count)
      throw ConfigError("load entry outside the problem");
    if (!has_bit(active[static_cast<std::size_t>(e.leos)], e.cc))
      throw ConfigError("demand on inactive CC " + std::to_string(e.cc) + " of LEOS " + std::to_string(e.leos));
    if (!(e.demand >= 0.0)) throw ConfigError("negative demand");
    if (static_cast<int>(e.cross.size()) != leos_count) throw ConfigError("cross gains need one entry per LEOS");
  }
}

LoadProblem build_load_problem(const sim::ScenarioState& state, const sim::SimConfig& cfg,
                               const sim::GainTable& gains, const std::vector<sim::ServingLink>& links,
                               Splitter splitter) {
  LoadProblem p;
  p.leos_count = state.leos_count();
  p.cc_count = cfg.cc_count;
  p.active = state.active_cc;
  p.bandwidth.assign(static_cast<std::size_t>(cfg.cc_count), cfg.cc_bandwidth);
  p.noise_w = cfg.access_noise_w();
  const double power = cfg.access_power_w();
  for (const auto& link : links) {
    const Mask act = state.active_cc[static_cast<std::size_t>(link.leos)];
    std::vector<double> weight(static_cast<std::size_t>(cfg.cc_count), 0.0);
    double total = 0.0;
    for (int c = 0; c < cfg.cc_count; ++c) {
      if (!has_bit(act, c)) continue;
      const double w = splitter == Splitter::uniform
                           ? 1.0
                           : std::log2(1.0 + power * gains.at(link.leos, link.ue, c) / p.noise_w);
      weight[static_cast<std::size_t>(c)] = w;
      total += w;
    }
    if (!(total > 0.0)) continue;  // no usable CC; the UE goes unserved
    for (int c = 0; c < cfg.cc_count; ++c) {
      if (!has_bit(act, c)) continue;
      LoadEntry e;
      e.ue = link.ue;
      e.leos = link.leos;
      e.cc = c;
      e.demand = state.demand[static_cast<std::size_t>(link.ue)] * weight[static_cast<std::size_t>(c)] / total;
      e.signal = power * gains.at(link.leos, link.ue, c);
      e.cross.resize(static_cast<std::size_t>(p.leos_count));
      for (int j = 0; j < p.leos_count; ++j) e.cross[static_cast<std::size_t>(j)] = power * gains.at(j, link.ue, c);
      p.entries.push_back(std::move(e));
    }
  }
  return p;
}

std::vector<sim::DemandLink> demand_links(const LoadProblem& problem) {
  std::vector<sim::DemandLink> out;
  out.reserve(problem.entries.size());
  for (const auto& e : problem.entries) out.push_back({e.ue, e.leos, e.cc, e.demand});
  return out;
}

double entry_sinr(const LoadProblem& problem, const LoadEntry& e, const Matrix& rho) {
  double interference = 0.0;
  for (int j = 0; j < problem.leos_count; ++j) {
    if (j == e.leos || !has_bit(problem.active[static_cast<std::size_t>(j)], e.cc)) continue;
    interference += rho(j, e.cc) * e.cross[static_cast<std::size_t>(j)];
  }
  const double denom = interference + problem.noise_w;
  return denom > 0.0 ? e.signal / denom : (e.signal > 0.0 ? INFINITY : 0.0);
}

namespace {

double entry_rate(const LoadProblem& problem, const LoadEntry& e, const Matrix& rho) {
  return sim::shannon_rate(problem.bandwidth[static_cast<std::size_t>(e.cc)], entry_sinr(problem, e, rho));
}

}  // namespace

Matrix lb_update(const Matrix& rho, const LoadProblem& problem) {
  if (rho.rows() != problem.leos_count || rho.cols() != problem.cc_count)
    throw ConfigError("load matrix shape does not match the problem");
  if ((rho.array() < 0.0).any()) throw ConfigError("loads must be non-negative");
  Matrix next = Matrix::Zero(problem.leos_count, problem.cc_count);
  for (const auto& e : problem.entries) {
    if (e.demand == 0.0) continue;
    const double r = entry_rate(problem, e, rho);
    if (!(r > 0.0))
      throw InfeasibleLoadError("zero SINR for UE " + std::to_string(e.ue) + " on CC " + std::to_string(e.cc) +
                                " of LEOS " + std::to_string(e.leos));
    next(e.leos, e.cc) += e.demand / r;
  }
  return next;
}

LoadSolution solve_load(const LoadProblem& problem, const SolveOptions& opts, const Matrix* start) {
  if (!(opts.tol > 0.0) || opts.max_iter < 1) throw ConfigError("solver needs tol > 0 and max_iter >= 1");
  problem.validate();
  LoadSolution sol;
  sol.rho = start ? *start : Matrix::Zero(problem.leos_count, problem.cc_count);
  for (int it = 0; it < opts.max_iter; ++it) {
    Matrix next = lb_update(sol.rho, problem);
    const auto change = (next - sol.rho).cwiseAbs().array();
    if (opts.rule == StopRule::absolute) {
      sol.residual = change.maxCoeff();
    } else {
      // entries without demand stay at exactly zero and never block
      sol.residual = (change / next.array().max(std::numeric_limits<double>::min())).maxCoeff();
    }
    sol.rho = std::move(next);
    if (!sol.rho.allFinite() || sol.rho.maxCoeff() > opts.blowup) {
      sol.iterations = it + 1;
      break;
    }
    if (sol.residual < opts.tol) {
      sol.status = LoadStatus::converged;
      sol.iterations = it;
      break;
    }
    sol.iterations = it + 1;
  }
  sol.max_load = sol.rho.size() ? sol.rho.maxCoeff() : 0.0;
  sol.overload = !(sol.max_load <= opts.rho_cap);
  return sol;
}

std::vector<double> delivered_rates(const LoadProblem& problem, const Matrix& rho) {
  const Matrix need = lb_update(rho, problem);
  std::vector<double> out;
  out.reserve(problem.entries.size());
  for (const auto& e : problem.entries) {
    const double n = need(e.leos, e.cc);
    out.push_back(n > 0.0 ? e.demand * rho(e.leos, e.cc) / n : 0.0);
  }
  return out;
}

double demand_residual(const LoadProblem& problem, const Matrix& rho) {
  const auto rates = delivered_rates(problem, rho);
  double worst = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const double d = problem.entries[k].demand;
    if (d > 0.0) worst = std::max(worst, std::abs(rates[k] - d) / d);
  }
  return worst;
}

}  // namespace ntn::load
