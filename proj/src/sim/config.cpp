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

#include "ntn/sim/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ntn/common/errors.hpp"

namespace ntn::sim {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double noise_w(double psd_dbm_hz, double nf_db, double bandwidth) {
  return std::pow(10.0, (psd_dbm_hz + nf_db) / 10.0) * 1e-3 * bandwidth;
}

void require(bool ok, const char* field) {
  if (!ok) throw ConfigError(std::string("invalid value for ") + field);
}

using Setter = std::function<void(SimConfig&, const std::string&)>;

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("cannot parse '" + text + "' for " + key);
  return v;
}

template <typename T>
Setter field(T SimConfig::*member, const std::string& key) {
  return [member, key](SimConfig& c, const std::string& text) { c.*member = parse_value<T>(key, text); };
}

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s{
      {"area",
       {{"side", field(&SimConfig::area_side, "area.side")},
        {"ue_count", field(&SimConfig::ue_count, "area.ue_count")},
        {"ue_max_demand_hz", field(&SimConfig::ue_max_demand_hz, "area.ue_max_demand_hz")},
        {"spectral_efficiency", field(&SimConfig::spectral_efficiency, "area.spectral_efficiency")},
        {"time_step", field(&SimConfig::time_step, "area.time_step")}}},
      {"leos",
       {{"count", field(&SimConfig::leos_count, "leos.count")},
        {"track_radius", field(&SimConfig::track_radius, "leos.track_radius")},
        {"speed", field(&SimConfig::speed, "leos.speed")},
        {"altitude", field(&SimConfig::altitude, "leos.altitude")},
        {"coverage_radius", field(&SimConfig::coverage_radius, "leos.coverage_radius")},
        {"tx_power_w", field(&SimConfig::tx_power_w, "leos.tx_power_w")},
        {"antenna_gain_db", field(&SimConfig::antenna_gain_db, "leos.antenna_gain_db")},
        {"association",
         [](SimConfig& c, const std::string& t) { c.association = parse_association(t); }}}},
      {"carriers",
       {{"count", field(&SimConfig::cc_count, "carriers.count")},
        {"bandwidth", field(&SimConfig::cc_bandwidth, "carriers.bandwidth")},
        {"center_frequency", field(&SimConfig::cc_center_frequency, "carriers.center_frequency")},
        {"noise_psd_dbm_hz", field(&SimConfig::noise_psd_dbm_hz, "carriers.noise_psd_dbm_hz")},
        {"noise_figure_db", field(&SimConfig::noise_figure_db, "carriers.noise_figure_db")},
        {"shadowing_db", field(&SimConfig::shadowing_db, "carriers.shadowing_db")}}},
      {"backhaul",
       {{"sc_count", field(&SimConfig::sc_count, "backhaul.sc_count")},
        {"sc_bandwidth", field(&SimConfig::sc_bandwidth, "backhaul.sc_bandwidth")},
        {"frequency", field(&SimConfig::backhaul_frequency, "backhaul.frequency")},
        {"power_w", field(&SimConfig::backhaul_power_w, "backhaul.power_w")},
        {"antenna_gain_db", field(&SimConfig::backhaul_antenna_gain_db, "backhaul.antenna_gain_db")},
        {"noise_figure_db", field(&SimConfig::backhaul_noise_figure_db, "backhaul.noise_figure_db")},
        {"gateway_x", field(&SimConfig::gateway_x, "backhaul.gateway_x")},
        {"gateway_y", field(&SimConfig::gateway_y, "backhaul.gateway_y")}}},
      {"rng", {{"seed", field(&SimConfig::seed, "rng.seed")}}},
  };
  return s;
}

}  // namespace

void SimConfig::validate() const {
  require(area_side > 0, "area.side");
  require(ue_count >= 0, "area.ue_count");
  require(ue_max_demand_hz > 0, "area.ue_max_demand_hz");
  require(spectral_efficiency > 0, "area.spectral_efficiency");
  require(time_step > 0, "area.time_step");
  require(leos_count >= 1, "leos.count");
  require(track_radius > 0, "leos.track_radius");
  require(speed > 0, "leos.speed");
  require(altitude > 0, "leos.altitude");
  require(coverage_radius >= 0, "leos.coverage_radius");
  require(tx_power_w > 0, "leos.tx_power_w");
  require(std::isfinite(antenna_gain_db), "leos.antenna_gain_db");
  require(cc_count >= 1 && cc_count <= 8, "carriers.count");
  require(cc_bandwidth > 0, "carriers.bandwidth");
  require(cc_center_frequency > 0 && cc_frequency(0) > 0, "carriers.center_frequency");
  require(std::isfinite(noise_psd_dbm_hz), "carriers.noise_psd_dbm_hz");
  require(noise_figure_db >= 0, "carriers.noise_figure_db");
  require(shadowing_db >= 0, "carriers.shadowing_db");
  require(sc_count >= 0 && sc_count <= 16, "backhaul.sc_count");
  require(sc_bandwidth > 0, "backhaul.sc_bandwidth");
  require(backhaul_frequency > 0, "backhaul.frequency");
  require(backhaul_power_w > 0, "backhaul.power_w");
  require(std::isfinite(backhaul_antenna_gain_db), "backhaul.antenna_gain_db");
  require(backhaul_noise_figure_db >= 0, "backhaul.noise_figure_db");
  require(std::isfinite(gateway_x) && std::isfinite(gateway_y), "backhaul.gateway");
}

double SimConfig::cc_frequency(int c) const {
  return cc_center_frequency + (c - 0.5 * (cc_count - 1)) * cc_bandwidth;
}

double SimConfig::access_power_w() const { return tx_power_w * db_to_linear(antenna_gain_db); }

double SimConfig::access_noise_w() const { return noise_w(noise_psd_dbm_hz, noise_figure_db, cc_bandwidth); }

double SimConfig::backhaul_eirp_w() const { return backhaul_power_w * db_to_linear(backhaul_antenna_gain_db); }

double SimConfig::backhaul_noise_w() const {
  return noise_w(noise_psd_dbm_hz, backhaul_noise_figure_db, sc_bandwidth);
}

SimConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed scenario file: ") + e.what());
  }
  SimConfig cfg;
  const auto& known = schema();
  for (const auto& [section, body] : tree) {
    auto sec = known.find(section);
    if (sec == known.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ConfigError("unknown key " + section + "." + key);
      setter->second(cfg, value.get_value<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  return parse_config(in);
}

void write_config(std::ostream& out, const SimConfig& c) {
  out.precision(17);
  out << "[area]\nside = " << c.area_side << "\nue_count = " << c.ue_count
      << "\nue_max_demand_hz = " << c.ue_max_demand_hz << "\nspectral_efficiency = " << c.spectral_efficiency
      << "\ntime_step = " << c.time_step << "\n\n[leos]\ncount = " << c.leos_count
      << "\ntrack_radius = " << c.track_radius << "\nspeed = " << c.speed << "\naltitude = " << c.altitude
      << "\ncoverage_radius = " << c.coverage_radius << "\ntx_power_w = " << c.tx_power_w
      << "\nantenna_gain_db = " << c.antenna_gain_db << "\nassociation = " << to_string(c.association)
      << "\n\n[carriers]\ncount = " << c.cc_count << "\nbandwidth = " << c.cc_bandwidth
      << "\ncenter_frequency = " << c.cc_center_frequency << "\nnoise_psd_dbm_hz = " << c.noise_psd_dbm_hz
      << "\nnoise_figure_db = " << c.noise_figure_db << "\nshadowing_db = " << c.shadowing_db
      << "\n\n[backhaul]\nsc_count = " << c.sc_count << "\nsc_bandwidth = " << c.sc_bandwidth
      << "\nfrequency = " << c.backhaul_frequency << "\npower_w = " << c.backhaul_power_w
      << "\nantenna_gain_db = " << c.backhaul_antenna_gain_db
      << "\nnoise_figure_db = " << c.backhaul_noise_figure_db << "\ngateway_x = " << c.gateway_x
      << "\ngateway_y = " << c.gateway_y << "\n\n[rng]\nseed = " << c.seed << "\n";
}

std::string to_string(Association a) { return a == Association::strongest ? "strongest" : "all_covering"; }

Association parse_association(const std::string& s) {
  if (s == "strongest") return Association::strongest;
  if (s == "all_covering") return Association::all_covering;
  throw ConfigError("unknown association '" + s + "'");
}

}  // namespace ntn::sim
