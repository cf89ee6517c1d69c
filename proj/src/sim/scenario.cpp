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

#include "ntn/sim/scenario.hpp"

#include <numbers>
#include <ostream>
#include <string>

#include "ntn/common/errors.hpp"
#include "ntn/common/random.hpp"

namespace ntn::sim {

namespace {

constexpr double kLightSpeed = 299'792'458.0;
constexpr std::uint64_t kUeStream = 0x55E;
constexpr std::uint64_t kLeosStream = 0x1E05;
constexpr std::uint64_t kShadowStream = 0x5AD0;

double wrap_phase(double phi) {
  const double two_pi = 2.0 * std::numbers::pi;
  phi = std::fmod(phi, two_pi);
  return phi < 0.0 ? phi + two_pi : phi;
}

double ground_distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

ScenarioState init_scenario(const SimConfig& cfg) {
  cfg.validate();
  ScenarioState s;
  Rng ue_rng = make_rng(cfg.seed, {kUeStream});
  std::uniform_real_distribution<double> side(0.0, cfg.area_side);
  std::uniform_real_distribution<double> share(0.5, 1.0);
  s.ue.resize(static_cast<std::size_t>(cfg.ue_count));
  s.demand.resize(s.ue.size());
  for (std::size_t u = 0; u < s.ue.size(); ++u) {
    s.ue[u].x = side(ue_rng);
    s.ue[u].y = side(ue_rng);
    s.demand[u] = cfg.ue_demand_cap() * share(ue_rng);
  }

  Rng leos_rng = make_rng(cfg.seed, {kLeosStream});
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < cfg.leos_count; ++i) {
    const double x = side(leos_rng);
    const double y = side(leos_rng);
    s.track_center.push_back({x, y});
    s.phase.push_back(angle(leos_rng));
  }

  s.shadowing_db = Matrix::Zero(cfg.leos_count, cfg.ue_count);
  if (cfg.shadowing_db > 0.0) {
    Rng sh_rng = make_rng(cfg.seed, {kShadowStream});
    std::normal_distribution<double> n(0.0, cfg.shadowing_db);
    for (int i = 0; i < cfg.leos_count; ++i)
      for (int u = 0; u < cfg.ue_count; ++u) s.shadowing_db(i, u) = n(sh_rng);
  }

  std::vector<int> pcc(static_cast<std::size_t>(cfg.leos_count));
  for (int i = 0; i < cfg.leos_count; ++i) pcc[static_cast<std::size_t>(i)] = i % cfg.cc_count;
  assign_pcc(s, pcc, cfg);
  s.sc_mask.assign(pcc.size(), 0);
  s.load = Matrix::Zero(cfg.leos_count, cfg.cc_count);
  return s;
}

void assign_pcc(ScenarioState& state, const std::vector<int>& pcc, const SimConfig& cfg) {
  if (static_cast<int>(pcc.size()) != state.leos_count()) throw ConfigError("one PCC per LEOS required");
  state.pcc = pcc;
  state.active_cc.resize(pcc.size());
  for (std::size_t i = 0; i < pcc.size(); ++i) {
    if (pcc[i] < 0 || pcc[i] >= cfg.cc_count) throw ConfigError("PCC index out of range");
    state.active_cc[i] = Mask{1} << pcc[i];
  }
}

void advance(ScenarioState& state, const SimConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const double dphi = cfg.speed * dt / cfg.track_radius;
  for (auto& phi : state.phase) phi = wrap_phase(phi + dphi);
  state.clock += dt;
}

Point leos_position(const ScenarioState& state, const SimConfig& cfg, int i) {
  const auto k = static_cast<std::size_t>(i);
  return {state.track_center[k].x + cfg.track_radius * std::cos(state.phase[k]),
          state.track_center[k].y + cfg.track_radius * std::sin(state.phase[k])};
}

double path_gain(double distance, double frequency) {
  const double r = kLightSpeed / (4.0 * std::numbers::pi * distance * frequency);
  return r * r;
}

GainTable compute_gains(const ScenarioState& state, const SimConfig& cfg) {
  const int n_leos = state.leos_count();
  const int n_ue = state.ue_count();
  GainTable g;
  g.access.assign(static_cast<std::size_t>(cfg.cc_count), Matrix(n_leos, n_ue));
  g.backhaul.resize(n_leos, cfg.sc_count);
  const double h2 = cfg.altitude * cfg.altitude;
  const Point gw{cfg.gateway_x, cfg.gateway_y};
  for (int i = 0; i < n_leos; ++i) {
    const Point p = leos_position(state, cfg, i);
    for (int u = 0; u < n_ue; ++u) {
      const double gd = ground_distance(p, state.ue[static_cast<std::size_t>(u)]);
      const double d = std::sqrt(gd * gd + h2);
      const double shadow = std::pow(10.0, -state.shadowing_db(i, u) / 10.0);
      for (int c = 0; c < cfg.cc_count; ++c)
        g.access[static_cast<std::size_t>(c)](i, u) = std::min(1.0, path_gain(d, cfg.cc_frequency(c)) * shadow);
    }
    const double gd = ground_distance(p, gw);
    const double d = std::sqrt(gd * gd + h2);
    for (int k = 0; k < cfg.sc_count; ++k) g.backhaul(i, k) = path_gain(d, cfg.sc_frequency(k));
  }
  return g;
}

std::vector<std::vector<int>> coverage(const ScenarioState& state, const SimConfig& cfg) {
  std::vector<std::vector<int>> cover(static_cast<std::size_t>(state.leos_count()));
  for (int i = 0; i < state.leos_count(); ++i) {
    const Point p = leos_position(state, cfg, i);
    for (int u = 0; u < state.ue_count(); ++u)
      if (ground_distance(p, state.ue[static_cast<std::size_t>(u)]) <= cfg.coverage_radius)
        cover[static_cast<std::size_t>(i)].push_back(u);
  }
  return cover;
}

std::vector<ServingLink> associate(const ScenarioState& state, const SimConfig& cfg, const GainTable& gains,
                                   const std::vector<std::vector<int>>& cover) {
  std::vector<ServingLink> links;
  if (cfg.association == Association::all_covering) {
    for (int i = 0; i < static_cast<int>(cover.size()); ++i)
      for (int u : cover[static_cast<std::size_t>(i)]) links.push_back({u, i});
    return links;
  }
  std::vector<int> best(static_cast<std::size_t>(state.ue_count()), -1);
  for (int i = 0; i < static_cast<int>(cover.size()); ++i) {
    const int c = state.pcc[static_cast<std::size_t>(i)];
    for (int u : cover[static_cast<std::size_t>(i)]) {
      int& b = best[static_cast<std::size_t>(u)];
      if (b < 0 || gains.at(i, u, c) > gains.at(b, u, state.pcc[static_cast<std::size_t>(b)])) b = i;
    }
  }
  for (int u = 0; u < state.ue_count(); ++u)
    if (best[static_cast<std::size_t>(u)] >= 0) links.push_back({u, best[static_cast<std::size_t>(u)]});
  return links;
}

double sinr(int u, int i, int c, const Matrix& load, const std::vector<Mask>& active, const GainTable& gains,
            const SimConfig& cfg) {
  const double p = cfg.access_power_w();
  double interference = 0.0;
  for (int j = 0; j < static_cast<int>(active.size()); ++j) {
    if (j == i || !has_bit(active[static_cast<std::size_t>(j)], c)) continue;
    interference += load(j, c) * p * gains.at(j, u, c);
  }
  return p * gains.at(i, u, c) / (interference + cfg.access_noise_w());
}

double backhaul_capacity(int leos, Mask sc_mask, const GainTable& gains, const SimConfig& cfg) {
  double cap = 0.0;
  const double p = cfg.backhaul_eirp_w();
  const double n = cfg.backhaul_noise_w();
  for (int k = 0; k < cfg.sc_count; ++k)
    if (has_bit(sc_mask, k)) cap += shannon_rate(cfg.sc_bandwidth, p * gains.backhaul(leos, k) / n);
  return cap;
}

RateReport rate_report(const ScenarioState& state, const SimConfig& cfg, const GainTable& gains,
                       const std::vector<DemandLink>& links, const Matrix& load) {
  const auto n_leos = static_cast<std::size_t>(state.leos_count());
  RateReport r;
  r.ue_rate.assign(static_cast<std::size_t>(state.ue_count()), 0.0);
  r.covered_demand.assign(n_leos, 0.0);
  r.access.assign(n_leos, 0.0);
  for (const auto& l : links) {
    const double rho = load(l.leos, l.cc);
    const double delivered = rho > 1.0 ? l.demand / rho : l.demand;
    r.ue_rate[static_cast<std::size_t>(l.ue)] += delivered;
    r.covered_demand[static_cast<std::size_t>(l.leos)] += l.demand;
    r.access[static_cast<std::size_t>(l.leos)] += delivered;
  }
  r.capacity.resize(n_leos);
  r.served.resize(n_leos);
  r.slack.resize(n_leos);
  for (std::size_t i = 0; i < n_leos; ++i) {
    r.capacity[i] = backhaul_capacity(static_cast<int>(i), state.sc_mask[i], gains, cfg);
    r.served[i] = std::min(r.access[i], r.capacity[i]);
    r.slack[i] = r.capacity[i] - r.served[i];
  }
  return r;
}

namespace {

std::string mask_list(Mask m, int width) {
  std::string s;
  for (int b = 0; b < width; ++b) {
    if (!has_bit(m, b)) continue;
    if (!s.empty()) s += ' ';
    s += std::to_string(b);
  }
  return s;
}

}  // namespace

void write_dump_header(std::ostream& out, const SimConfig& cfg) {
  out << "t,leos,x,y,pcc,active_ccs,scs";
  for (int c = 0; c < cfg.cc_count; ++c) out << ",rho_" << c;
  out << '\n';
}

void append_dump(std::ostream& out, const ScenarioState& state, const SimConfig& cfg) {
  for (int i = 0; i < state.leos_count(); ++i) {
    const Point p = leos_position(state, cfg, i);
    const auto k = static_cast<std::size_t>(i);
    out << state.clock << ',' << i << ',' << p.x << ',' << p.y << ',' << state.pcc[k] << ','
        << mask_list(state.active_cc[k], cfg.cc_count) << ',' << mask_list(state.sc_mask[k], cfg.sc_count);
    for (int c = 0; c < cfg.cc_count; ++c) out << ',' << state.load(i, c);
    out << '\n';
  }
}

}  // namespace ntn::sim
