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

#ifndef NTN_SIM_CONFIG_HPP
#define NTN_SIM_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

namespace ntn::sim {

// Which LEOS serve a UE that several satellites cover.
enum class Association {
  strongest,    // the one with the highest PCC path gain
  all_covering  // every covering LEOS carries the UE's full demand
};

struct SimConfig {
  // [area]
  double area_side = 60'000.0;        // m
  int ue_count = 400;
  double ue_max_demand_hz = 1.5e6;    // demanded spectrum per UE
  double spectral_efficiency = 1.0;   // bit/s/Hz, turns the demand into a rate
  double time_step = 1.0;             // s per decision epoch

  // [leos]
  int leos_count = 3;
  double track_radius = 8'000.0;      // m, ground track
  double speed = 2'230.0;             // m/s
  double altitude = 500'000.0;        // m
  double coverage_radius = 10'000.0;  // m
  double tx_power_w = 10.0;           // per CC
  double antenna_gain_db = 85.0;      // tx + rx, access link
  Association association = Association::strongest;

  // [carriers]
  int cc_count = 5;
  double cc_bandwidth = 400e6;        // Hz
  double cc_center_frequency = 26e9;  // Hz, centre of the CC block
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 7.0;
  double shadowing_db = 0.0;          // log-normal sigma, 0 disables

  // [backhaul]
  int sc_count = 6;
  double sc_bandwidth = 1e6;          // Hz
  double backhaul_frequency = 20e9;   // Hz, first SC
  double backhaul_power_w = 10.0;
  double backhaul_antenna_gain_db = 36.0;
  double backhaul_noise_figure_db = 3.0;
  double gateway_x = 30'000.0;
  double gateway_y = 30'000.0;

  // [rng]
  std::uint64_t seed = 1;

  // Throws ConfigError naming the first offending field.
  void validate() const;

  double cc_frequency(int c) const;
  double sc_frequency(int k) const { return backhaul_frequency + k * sc_bandwidth; }
  double access_power_w() const;   // tx power times antenna gain
  double access_noise_w() const;   // over one CC
  double backhaul_eirp_w() const;
  double backhaul_noise_w() const; // over one SC
  double ue_demand_cap() const { return ue_max_demand_hz * spectral_efficiency; }
};

// INI-style file with sections [area] [leos] [carriers] [backhaul] [rng].
// Missing keys keep their defaults; unknown keys are rejected.
SimConfig load_config(const std::string& path);
SimConfig parse_config(std::istream& in);
void write_config(std::ostream& out, const SimConfig& cfg);

std::string to_string(Association a);
Association parse_association(const std::string& s);

}  // namespace ntn::sim

#endif  // NTN_SIM_CONFIG_HPP
