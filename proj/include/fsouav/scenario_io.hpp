// Copyright 2026 The fsouav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario files.
//
// A scenario is a YAML document with the sections link, aircraft, jitter,
// mission, optimizer and analysis, plus a top-level seed. Every physical
// quantity is a string "<number> <unit>", e.g. "1.5 mrad" or "600 m"; a bare
// number is accepted only for dimensionless fields. Unknown keys are errors.
// Missing fields keep their defaults, so an empty document is the default
// moving mission.
//
//   seed: 7
//   jitter:
//     sigma: [0.1 mrad, 1 mrad, 0.1 mrad]   # roll, pitch, yaw
//   mission:
//     preset: hover
//     slots: 400

#ifndef FSOUAV_SCENARIO_IO_HPP_
#define FSOUAV_SCENARIO_IO_HPP_

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsouav/errors.hpp"
#include "fsouav/linalg3.hpp"
#include "fsouav/sca.hpp"

namespace fsouav::io {

using kinematics::Posture;
using sca::Scenario;

// Geometry and sweeps for the pointing, capacity and power subcommands.
struct AnalysisConfig {
  Vec3 position = Vec3(50.0, 550.0, 600.0);
  Posture posture{0.0, -10.0 * std::numbers::pi / 180.0, 0.0};
  double theta_max = 4e-3;  // rad, histogram range
  int bins = 80;
  double grid_min = -600.0;  // m, square grid in x and y
  double grid_max = 600.0;
  int grid_points = 25;
  double speed_min = 3.0;  // m/s
  double speed_max = 100.0;
  int speed_points = 50;
  std::vector<double> accelerations = {0.0, 2.5, 5.0};  // m/s^2, lateral
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Scenario scenario;
  sca::OptimizerConfig optimizer;
  AnalysisConfig analysis;
};

// ---------------------------------------------------------------------------
// Units

enum class Dim {
  kNone,
  kLength,
  kTime,
  kAngle,
  kPower,
  kEnergy,
  kSpeed,
  kAccel,
  kCurrent,
  kResponsivity,
  kMass,
  kMassPerLength,
  kRotorConstant,  // kg m^3 / s^4
  kDecibel,
};

struct UnitEntry {
  std::string_view name;
  double factor;
};

inline std::vector<UnitEntry> units_of(Dim d) {
  switch (d) {
    case Dim::kNone:
      return {};
    case Dim::kLength:
      return {{"m", 1.0}, {"km", 1e3}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
    case Dim::kTime:
      return {{"s", 1.0}, {"ms", 1e-3}, {"min", 60.0}};
    case Dim::kAngle:
      return {{"rad", 1.0}, {"mrad", 1e-3}, {"urad", 1e-6}, {"deg", std::numbers::pi / 180.0}};
    case Dim::kPower:
      return {{"W", 1.0}, {"mW", 1e-3}, {"kW", 1e3}};
    case Dim::kEnergy:
      return {{"J", 1.0}, {"kJ", 1e3}, {"MJ", 1e6}};
    case Dim::kSpeed:
      return {{"m/s", 1.0}, {"km/h", 1.0 / 3.6}};
    case Dim::kAccel:
      return {{"m/s^2", 1.0}};
    case Dim::kCurrent:
      return {{"A", 1.0}, {"mA", 1e-3}, {"uA", 1e-6}, {"nA", 1e-9}};
    case Dim::kResponsivity:
      return {{"A/W", 1.0}};
    case Dim::kMass:
      return {{"kg", 1.0}, {"g", 1e-3}};
    case Dim::kMassPerLength:
      return {{"kg/m", 1.0}};
    case Dim::kRotorConstant:
      return {{"kg*m^3/s^4", 1.0}};
    case Dim::kDecibel:
      return {{"dB", 1.0}};
  }
  return {};
}

// Unit written by the echo: the SI base unit of the dimension.
inline std::string_view base_unit(Dim d) {
  const auto u = units_of(d);
  return u.empty() ? std::string_view{} : u.front().name;
}

inline std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

inline double parse_number(std::string_view text, const std::string& path) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError(path, "'" + std::string(text) + "' is not a number");
  if (!std::isfinite(v)) throw ParseError(path, "value must be finite");
  return v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// "<number> <unit>" in SI units. Dimensionless fields take a bare number.
inline double parse_quantity(std::string_view text, Dim dim, const std::string& path) {
  text = trim(text);
  const auto space = text.find_first_of(" \t");
  const std::string_view number = text.substr(0, space);
  const std::string_view unit =
      space == std::string_view::npos ? std::string_view{} : trim(text.substr(space));
  const double v = parse_number(number, path);
  const auto table = units_of(dim);
  if (table.empty()) {
    if (!unit.empty()) throw ParseError(path, "dimensionless value takes no unit");
    return v;
  }
  std::string expected;
  for (const auto& e : table) {
    if (e.name == unit) return v * e.factor;
    expected += (expected.empty() ? "" : ", ") + std::string(e.name);
  }
  if (unit.empty()) throw ParseError(path, "missing unit (one of " + expected + ")");
  throw ParseError(path, "unit '" + std::string(unit) + "' not allowed (one of " + expected + ")");
}

inline std::string format_quantity(double si, Dim dim) {
  const auto unit = base_unit(dim);
  return unit.empty() ? fmt::format("{}", si) : fmt::format("{} {}", si, unit);
}

// ---------------------------------------------------------------------------
// Document reader

// A YAML mapping whose keys are checked against the fields that were read.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_.IsNull()) return;
    if (!node_.IsMap()) throw ParseError(path_.empty() ? "<root>" : path_, "expected a mapping");
  }

  bool has(const std::string& key) {
    known_.insert(key);
    const YAML::Node n = lookup(key);
    return n && !n.IsNull();
  }

  std::string path(const std::string& key) const { return join_path(path_, key); }

  YAML::Node raw(const std::string& key) {
    known_.insert(key);
    return lookup(key);
  }

  std::string scalar(const std::string& key) {
    const YAML::Node n = raw(key);
    if (!n.IsScalar()) throw ParseError(path(key), "expected a scalar");
    return n.Scalar();
  }

  void quantity(const std::string& key, Dim dim, double& out) {
    if (has(key)) out = parse_quantity(scalar(key), dim, path(key));
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const double v = parse_quantity(scalar(key), Dim::kNone, path(key));
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ParseError(path(key), "expected an integer");
    out = static_cast<int>(v);
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const std::string s(trim(scalar(key)));
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ParseError(path(key), "expected a non-negative integer");
    out = v;
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const std::string s = scalar(key);
    if (s == "true")
      out = true;
    else if (s == "false")
      out = false;
    else
      throw ParseError(path(key), "expected true or false");
  }

  // List given either as a YAML sequence or as one comma-separated string.
  std::vector<double> list(const std::string& key, Dim dim) {
    const YAML::Node n = raw(key);
    std::vector<std::string> items;
    if (n.IsSequence()) {
      for (const auto& e : n) {
        if (!e.IsScalar()) throw ParseError(path(key), "list entries must be scalars");
        items.push_back(e.Scalar());
      }
    } else if (n.IsScalar()) {
      std::string_view s = n.Scalar();
      while (true) {
        const auto comma = s.find(',');
        items.emplace_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
      }
    } else {
      throw ParseError(path(key), "expected a list");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < items.size(); ++i)
      out.push_back(parse_quantity(items[i], dim, path(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<double> fixed_list(const std::string& key, Dim dim, std::size_t lo, std::size_t hi) {
    auto v = list(key, dim);
    if (v.size() < lo || v.size() > hi)
      throw ParseError(path(key), lo == hi ? "expected " + std::to_string(lo) + " entries"
                                           : "expected " + std::to_string(lo) + " to " +
                                                 std::to_string(hi) + " entries");
    return v;
  }

  Section child(const std::string& key) { return Section(raw(key), path(key)); }

  void reject_unknown() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!known_.count(key)) throw ParseError(path(key), "unknown key");
    }
  }

 private:
  // Const access, so that missing keys are not inserted into the document.
  YAML::Node lookup(const std::string& key) const {
    const YAML::Node& n = node_;
    if (!n.IsMap()) return YAML::Node();
    const YAML::Node v = n[key];
    return v.IsDefined() ? v : YAML::Node();
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> known_;
};

inline void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ParseError(path, message);
}

// Positions may omit z, which then defaults to the flight altitude.
inline bool read_position(Section& sec, const std::string& key, double altitude, Vec3& out) {
  if (!sec.has(key)) return false;
  const auto v = sec.fixed_list(key, Dim::kLength, 2, 3);
  out = Vec3(v[0], v[1], v.size() == 3 ? v[2] : altitude);
  return true;
}

inline void read_link(Section s, channel::LinkParams& link) {
  s.quantity("transmit_power", Dim::kPower, link.transmit_power);
  require(link.transmit_power > 0.0, s.path("transmit_power"), "must be positive");
  const bool ratio = s.has("transmit_to_noise");
  const bool noise = s.has("noise_std");
  require(!(ratio && noise), s.path("noise_std"), "give either noise_std or transmit_to_noise");
  if (ratio) {
    const double db = parse_quantity(s.scalar("transmit_to_noise"), Dim::kDecibel,
                                     s.path("transmit_to_noise"));
    link.noise_std = link.transmit_power / std::pow(10.0, db / 10.0);
  } else if (noise) {
    s.quantity("noise_std", Dim::kCurrent, link.noise_std);
    require(link.noise_std > 0.0, s.path("noise_std"), "must be positive");
  } else {
    // Default P_T / sigma of 30 dB follows P_T.
    link.noise_std = link.transmit_power / 1000.0;
  }
  s.quantity("responsivity", Dim::kResponsivity, link.responsivity);
  require(link.responsivity > 0.0, s.path("responsivity"), "must be positive");
  s.quantity("aperture", Dim::kLength, link.aperture);
  require(link.aperture > 0.0, s.path("aperture"), "must be positive");
  s.quantity("sigma_div", Dim::kAngle, link.sigma_div);
  require(link.sigma_div > 0.0, s.path("sigma_div"), "must be positive");
  s.quantity("sigma_i", Dim::kNone, link.sigma_i);
  require(link.sigma_i >= 0.0, s.path("sigma_i"), "must be non-negative");
  s.quantity("visibility", Dim::kLength, link.visibility);
  require(link.visibility > 0.0, s.path("visibility"), "must be positive");
  s.quantity("wavelength", Dim::kLength, link.wavelength);
  require(link.wavelength > 0.0, s.path("wavelength"), "must be positive");
  s.reject_unknown();
}

inline void read_aircraft(Section s, kinematics::AircraftParams& ac) {
  s.quantity("c1", Dim::kMassPerLength, ac.c1);
  require(ac.c1 > 0.0, s.path("c1"), "must be positive");
  s.quantity("c2", Dim::kRotorConstant, ac.c2);
  require(ac.c2 > 0.0, s.path("c2"), "must be positive");
  s.quantity("g", Dim::kAccel, ac.g);
  require(ac.g > 0.0, s.path("g"), "must be positive");
  s.quantity("mass", Dim::kMass, ac.mass);
  require(ac.mass > 0.0, s.path("mass"), "must be positive");
  s.quantity("v_min", Dim::kSpeed, ac.v_min);
  require(ac.v_min > 0.0, s.path("v_min"), "must be positive");
  s.quantity("v_max", Dim::kSpeed, ac.v_max);
  require(ac.v_max > ac.v_min, s.path("v_max"), "must exceed v_min");
  s.quantity("a_max", Dim::kAccel, ac.a_max);
  require(ac.a_max > 0.0, s.path("a_max"), "must be positive");
  s.reject_unknown();
}

inline void read_jitter(Section s, jitter::JitterCovariance& cov) {
  if (s.has("sigma")) {
    const auto v = s.fixed_list("sigma", Dim::kAngle, 3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      require(v[i] >= 0.0, s.path("sigma") + "[" + std::to_string(i) + "]",
              "must be non-negative");
    cov.sigma_roll = v[0];
    cov.sigma_pitch = v[1];
    cov.sigma_yaw = v[2];
  }
  if (s.has("correlation")) {
    const auto r = s.fixed_list("correlation", Dim::kNone, 3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      require(std::abs(r[i]) <= 1.0, s.path("correlation") + "[" + std::to_string(i) + "]",
              "must lie in [-1, 1]");
    cov.rho_roll_pitch = r[0];
    cov.rho_pitch_yaw = r[1];
    cov.rho_yaw_roll = r[2];
  }
  try {
    cov.validate();
  } catch (const Error& e) {
    throw ParseError(s.path("correlation"), e.what());
  }
  s.reject_unknown();
}

inline void read_mission(Section s, Scenario& sc) {
  if (s.has("preset")) {
    const std::string p = s.scalar("preset");
    Scenario base;
    if (p == "moving")
      base = Scenario::moving_mission();
    else if (p == "hover")
      base = Scenario::hover_mission();
    else
      throw ParseError(s.path("preset"), "expected moving or hover");
    base.link = sc.link;
    base.aircraft = sc.aircraft;
    base.jitter = sc.jitter;
    sc = base;
  }
  const double default_altitude = sc.altitude;
  s.quantity("altitude", Dim::kLength, sc.altitude);
  require(sc.altitude > 0.0, s.path("altitude"), "must be positive");
  // Defaults that sit at the old altitude move with it.
  if (sc.origin.z() == default_altitude) sc.origin.z() = sc.altitude;
  if (sc.destination.z() == default_altitude) sc.destination.z() = sc.altitude;
  if (sc.circle.center.z() == default_altitude) sc.circle.center.z() = sc.altitude;
  read_position(s, "origin", sc.altitude, sc.origin);
  require(sc.origin.z() == sc.altitude, s.path("origin"), "z must equal the altitude");
  read_position(s, "destination", sc.altitude, sc.destination);
  require(sc.destination.z() == sc.altitude, s.path("destination"),
          "z must equal the altitude");

  const bool has_slots = s.has("slots");
  const bool has_length = s.has("slot_length");
  s.integer("slots", sc.slots);
  require(sc.slots >= 2, s.path("slots"), "need at least 2 slots");
  s.quantity("slot_length", Dim::kTime, sc.slot_length);
  require(sc.slot_length > 0.0, s.path("slot_length"), "must be positive");
  if (s.has("duration")) {
    const double d = parse_quantity(s.scalar("duration"), Dim::kTime, s.path("duration"));
    require(d > 0.0, s.path("duration"), "must be positive");
    if (has_slots && has_length) {
      require(std::abs(sc.slots * sc.slot_length - d) <= 1e-9 * d, s.path("duration"),
              "must equal slots * slot_length");
    } else if (has_slots) {
      sc.slot_length = d / sc.slots;
    } else {
      const double n = std::round(d / sc.slot_length);
      require(n >= 2 && std::abs(n * sc.slot_length - d) <= 1e-9 * d, s.path("duration"),
              "must be a whole number of slots");
      sc.slots = static_cast<int>(n);
    }
  }
  s.quantity("launch_cost", Dim::kEnergy, sc.launch_cost);
  require(sc.launch_cost >= 0.0, s.path("launch_cost"), "must be non-negative");
  s.quantity("min_elevation", Dim::kAngle, sc.min_elevation);
  require(sc.min_elevation >= std::numbers::pi / 4 - 1e-12 && sc.min_elevation < std::numbers::pi / 2,
          s.path("min_elevation"), "must lie in [45 deg, 90 deg)");
  if (s.has("init")) {
    const std::string i = s.scalar("init");
    if (i == "linear")
      sc.init = sca::InitKind::kLinear;
    else if (i == "circular")
      sc.init = sca::InitKind::kCircular;
    else
      throw ParseError(s.path("init"), "expected linear or circular");
  }
  if (s.has("circle")) {
    Section c = s.child("circle");
    read_position(c, "center", sc.altitude, sc.circle.center);
    require(sc.circle.center.z() == sc.altitude, c.path("center"), "z must equal the altitude");
    c.quantity("radius", Dim::kLength, sc.circle.radius);
    require(sc.circle.radius > 0.0, c.path("radius"), "must be positive");
    if (c.has("direction")) {
      const std::string d = c.scalar("direction");
      if (d == "clockwise")
        sc.circle.clockwise = true;
      else if (d == "counterclockwise")
        sc.circle.clockwise = false;
      else
        throw ParseError(c.path("direction"), "expected clockwise or counterclockwise");
    }
    c.reject_unknown();
  }
  s.reject_unknown();
}

inline void read_optimizer(Section s, sca::OptimizerConfig& o) {
  s.quantity("tau_v", Dim::kNone, o.tau_v);
  require(o.tau_v > 0.0, s.path("tau_v"), "must be positive");
  s.quantity("tau_f", Dim::kNone, o.tau_f);
  require(o.tau_f >= 0.0, s.path("tau_f"), "must be non-negative");
  s.quantity("tau_f_relative", Dim::kNone, o.tau_f_relative);
  require(o.tau_f_relative > 0.0, s.path("tau_f_relative"), "must be positive");
  s.quantity("lambda_min", Dim::kNone, o.lambda_min);
  require(o.lambda_min >= 0.0, s.path("lambda_min"), "must be non-negative");
  s.quantity("lambda_max", Dim::kNone, o.lambda_max);
  require(o.lambda_max == 0.0 || o.lambda_max > o.lambda_min, s.path("lambda_max"),
          "must exceed lambda_min (0 selects the default)");
  s.integer("max_outer", o.max_outer);
  require(o.max_outer >= 1, s.path("max_outer"), "must be positive");
  s.integer("max_inner", o.max_inner);
  require(o.max_inner >= 1, s.path("max_inner"), "must be positive");
  s.integer("max_bracket_doublings", o.max_bracket_doublings);
  require(o.max_bracket_doublings >= 0, s.path("max_bracket_doublings"), "must be non-negative");
  s.boolean("linearized_power_cone", o.linearized_power_cone);
  s.quantity("solver_tol", Dim::kNone, o.solver_tol);
  require(o.solver_tol > 0.0, s.path("solver_tol"), "must be positive");
  s.integer("solver_max_iterations", o.solver_max_iterations);
  require(o.solver_max_iterations >= 1, s.path("solver_max_iterations"), "must be positive");
  s.reject_unknown();
}

inline void read_analysis(Section s, AnalysisConfig& a, double altitude) {
  read_position(s, "position", altitude, a.position);
  require(a.position.norm() > 0.0, s.path("position"), "must differ from the ground station");
  if (s.has("posture")) {
    const auto p = s.fixed_list("posture", Dim::kAngle, 3, 3);
    a.posture = Posture{p[0], p[1], p[2]};
  }
  s.quantity("theta_max", Dim::kAngle, a.theta_max);
  require(a.theta_max > 0.0, s.path("theta_max"), "must be positive");
  s.integer("bins", a.bins);
  require(a.bins >= 1, s.path("bins"), "must be positive");
  if (s.has("grid")) {
    const auto g = s.fixed_list("grid", Dim::kLength, 2, 2);
    require(g[0] < g[1], s.path("grid"), "need min < max");
    a.grid_min = g[0];
    a.grid_max = g[1];
  }
  s.integer("grid_points", a.grid_points);
  require(a.grid_points >= 2, s.path("grid_points"), "need at least 2 points");
  if (s.has("speed_range")) {
    const auto v = s.fixed_list("speed_range", Dim::kSpeed, 2, 2);
    require(0.0 < v[0] && v[0] < v[1], s.path("speed_range"), "need 0 < min < max");
    a.speed_min = v[0];
    a.speed_max = v[1];
  }
  s.integer("speed_points", a.speed_points);
  require(a.speed_points >= 2, s.path("speed_points"), "need at least 2 points");
  if (s.has("accelerations")) {
    a.accelerations = s.list("accelerations", Dim::kAccel);
    require(!a.accelerations.empty(), s.path("accelerations"), "must not be empty");
  }
  s.reject_unknown();
}

// Parses a scenario document. `source` only labels YAML syntax errors.
inline ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(source.empty() ? "<document>" : source, e.what());
  }
  ScenarioConfig cfg;
  Section top(root, "");
  top.unsigned64("seed", cfg.seed);
  // Physical sections first: a mission preset keeps them.
  read_link(top.child("link"), cfg.scenario.link);
  read_aircraft(top.child("aircraft"), cfg.scenario.aircraft);
  read_jitter(top.child("jitter"), cfg.scenario.jitter);
  read_mission(top.child("mission"), cfg.scenario);
  read_optimizer(top.child("optimizer"), cfg.optimizer);
  cfg.analysis.position.z() = cfg.scenario.altitude;
  read_analysis(top.child("analysis"), cfg.analysis, cfg.scenario.altitude);
  top.reject_unknown();
  try {
    cfg.scenario.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError("mission", e.what());
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Echo

// Canonical document of `cfg`: every field in SI base units, numbers in
// shortest round-trip form, so parse_scenario(echo(cfg)) == cfg.
inline std::string echo_scenario(const ScenarioConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  YAML::Emitter out;
  auto q = [](double v, Dim d) { return format_quantity(v, d); };
  auto vec = [&](const Vec3& v) {
    out << YAML::Flow << YAML::BeginSeq << q(v.x(), Dim::kLength) << q(v.y(), Dim::kLength)
        << q(v.z(), Dim::kLength) << YAML::EndSeq;
  };
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << std::to_string(cfg.seed);

  const auto& l = sc.link;
  out << YAML::Key << "link" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "transmit_power" << YAML::Value << q(l.transmit_power, Dim::kPower);
  out << YAML::Key << "noise_std" << YAML::Value << q(l.noise_std, Dim::kCurrent);
  out << YAML::Key << "responsivity" << YAML::Value << q(l.responsivity, Dim::kResponsivity);
  out << YAML::Key << "aperture" << YAML::Value << q(l.aperture, Dim::kLength);
  out << YAML::Key << "sigma_div" << YAML::Value << q(l.sigma_div, Dim::kAngle);
  out << YAML::Key << "sigma_i" << YAML::Value << q(l.sigma_i, Dim::kNone);
  out << YAML::Key << "visibility" << YAML::Value << q(l.visibility, Dim::kLength);
  out << YAML::Key << "wavelength" << YAML::Value << q(l.wavelength, Dim::kLength);
  out << YAML::EndMap;

  const auto& a = sc.aircraft;
  out << YAML::Key << "aircraft" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "c1" << YAML::Value << q(a.c1, Dim::kMassPerLength);
  out << YAML::Key << "c2" << YAML::Value << q(a.c2, Dim::kRotorConstant);
  out << YAML::Key << "g" << YAML::Value << q(a.g, Dim::kAccel);
  out << YAML::Key << "mass" << YAML::Value << q(a.mass, Dim::kMass);
  out << YAML::Key << "v_min" << YAML::Value << q(a.v_min, Dim::kSpeed);
  out << YAML::Key << "v_max" << YAML::Value << q(a.v_max, Dim::kSpeed);
  out << YAML::Key << "a_max" << YAML::Value << q(a.a_max, Dim::kAccel);
  out << YAML::EndMap;

  const auto& j = sc.jitter;
  out << YAML::Key << "jitter" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sigma" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << q(j.sigma_roll, Dim::kAngle) << q(j.sigma_pitch, Dim::kAngle)
      << q(j.sigma_yaw, Dim::kAngle) << YAML::EndSeq;
  out << YAML::Key << "correlation" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << q(j.rho_roll_pitch, Dim::kNone) << q(j.rho_pitch_yaw, Dim::kNone)
      << q(j.rho_yaw_roll, Dim::kNone) << YAML::EndSeq;
  out << YAML::EndMap;

  out << YAML::Key << "mission" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "altitude" << YAML::Value << q(sc.altitude, Dim::kLength);
  out << YAML::Key << "origin" << YAML::Value;
  vec(sc.origin);
  out << YAML::Key << "destination" << YAML::Value;
  vec(sc.destination);
  out << YAML::Key << "slots" << YAML::Value << std::to_string(sc.slots);
  out << YAML::Key << "slot_length" << YAML::Value << q(sc.slot_length, Dim::kTime);
  out << YAML::Key << "launch_cost" << YAML::Value << q(sc.launch_cost, Dim::kEnergy);
  out << YAML::Key << "min_elevation" << YAML::Value << q(sc.min_elevation, Dim::kAngle);
  out << YAML::Key << "init" << YAML::Value
      << (sc.init == sca::InitKind::kLinear ? "linear" : "circular");
  out << YAML::Key << "circle" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "center" << YAML::Value;
  vec(sc.circle.center);
  out << YAML::Key << "radius" << YAML::Value << q(sc.circle.radius, Dim::kLength);
  out << YAML::Key << "direction" << YAML::Value
      << (sc.circle.clockwise ? "clockwise" : "counterclockwise");
  out << YAML::EndMap;
  out << YAML::EndMap;

  const auto& o = cfg.optimizer;
  out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tau_v" << YAML::Value << q(o.tau_v, Dim::kNone);
  out << YAML::Key << "tau_f" << YAML::Value << q(o.tau_f, Dim::kNone);
  out << YAML::Key << "tau_f_relative" << YAML::Value << q(o.tau_f_relative, Dim::kNone);
  out << YAML::Key << "lambda_min" << YAML::Value << q(o.lambda_min, Dim::kNone);
  out << YAML::Key << "lambda_max" << YAML::Value << q(o.lambda_max, Dim::kNone);
  out << YAML::Key << "max_outer" << YAML::Value << std::to_string(o.max_outer);
  out << YAML::Key << "max_inner" << YAML::Value << std::to_string(o.max_inner);
  out << YAML::Key << "max_bracket_doublings" << YAML::Value
      << std::to_string(o.max_bracket_doublings);
  out << YAML::Key << "linearized_power_cone" << YAML::Value
      << (o.linearized_power_cone ? "true" : "false");
  out << YAML::Key << "solver_tol" << YAML::Value << q(o.solver_tol, Dim::kNone);
  out << YAML::Key << "solver_max_iterations" << YAML::Value
      << std::to_string(o.solver_max_iterations);
  out << YAML::EndMap;

  const auto& an = cfg.analysis;
  out << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "position" << YAML::Value;
  vec(an.position);
  out << YAML::Key << "posture" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << q(an.posture.roll, Dim::kAngle) << q(an.posture.pitch, Dim::kAngle)
      << q(an.posture.yaw, Dim::kAngle) << YAML::EndSeq;
  out << YAML::Key << "theta_max" << YAML::Value << q(an.theta_max, Dim::kAngle);
  out << YAML::Key << "bins" << YAML::Value << std::to_string(an.bins);
  out << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << q(an.grid_min, Dim::kLength) << q(an.grid_max, Dim::kLength) << YAML::EndSeq;
  out << YAML::Key << "grid_points" << YAML::Value << std::to_string(an.grid_points);
  out << YAML::Key << "speed_range" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << q(an.speed_min, Dim::kSpeed) << q(an.speed_max, Dim::kSpeed) << YAML::EndSeq;
  out << YAML::Key << "speed_points" << YAML::Value << std::to_string(an.speed_points);
  out << YAML::Key << "accelerations" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double acc : an.accelerations) out << q(acc, Dim::kAccel);
  out << YAML::EndSeq;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace fsouav::io

#endif  // FSOUAV_SCENARIO_IO_HPP_
