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

// Optimization run reports and their file set.

#ifndef FSOUAV_REPORT_HPP_
#define FSOUAV_REPORT_HPP_

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fsouav/channel.hpp"
#include "fsouav/errors.hpp"
#include "fsouav/kinematics.hpp"
#include "fsouav/sca.hpp"
#include "fsouav/scenario_io.hpp"

namespace fsouav::io {

struct SlotRecord {
  double t = 0.0;
  Vec3 s, v, a;
  double roll = 0.0, yaw = 0.0;
  double spectral_efficiency = 0.0;  // closed-form C_E, bits per channel use
  double power = 0.0;                // flight power, W
};

struct SlotValidation {
  int slot = 0;
  double range = 0.0;
  double omega = 0.0;  // E[theta_p^2], rad^2
  double closed_form = 0.0;
  double monte_carlo = 0.0;
  double standard_error = 0.0;
};

struct RunReport {
  ScenarioConfig config;
  std::vector<SlotRecord> slots;
  std::vector<sca::HistoryRecord> history;
  bool converged = false;
  double efficiency_closed_form = 0.0;
  double efficiency_monte_carlo = 0.0;
  std::size_t samples = 0;
  std::vector<SlotValidation> validation;
  double optimize_seconds = 0.0;
  double validation_seconds = 0.0;
};

inline std::vector<SlotRecord> slot_records(const std::vector<Vec3>& s, const sca::Scenario& sc) {
  const kinematics::TrajectoryPlan plan(s, sc.slot_length, sc.altitude);
  const auto d = kinematics::differentiate_trajectory(plan);
  const auto eff = sca::efficiency_breakdown(s, sc);
  std::vector<SlotRecord> out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    SlotRecord r;
    r.t = static_cast<double>(k) * sc.slot_length;
    r.s = s[k];
    r.v = d.velocities[k];
    r.a = kinematics::acceleration_at(d, k);
    const auto p = kinematics::slot_posture(r.v, r.a, sc.aircraft.g);
    r.roll = p.roll;
    r.yaw = p.yaw;
    r.spectral_efficiency = eff.capacity[k];
    // The last slot reuses the previous acceleration; its power is not part
    // of the efficiency denominator.
    r.power = k < eff.power.size() ? eff.power[k]
                                   : kinematics::flight_power(r.v, r.a, sc.aircraft);
    out.push_back(r);
  }
  return out;
}

// Closed-form vs Monte Carlo C_E for every slot; slot k uses seed + k.
inline std::vector<SlotValidation> validate_slots(const std::vector<Vec3>& s,
                                                  const sca::Scenario& sc, std::size_t samples,
                                                  std::uint64_t seed) {
  const kinematics::TrajectoryPlan plan(s, sc.slot_length, sc.altitude);
  const auto d = kinematics::differentiate_trajectory(plan);
  std::vector<SlotValidation> out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Vec3 u = sca::slot_pointing(s[k], d.velocities[k], kinematics::acceleration_at(d, k),
                                      sc.aircraft.g);
    SlotValidation v;
    v.slot = static_cast<int>(k);
    v.range = s[k].norm();
    const auto h = jitter::hoyt_params(sc.jitter, u);
    v.omega = h.omega;
    v.closed_form = channel::anchored_capacity(channel::expected_log_gamma(sc.link, v.range, h));
    const auto mc = channel::mc_ergodic_capacity(sc.link, v.range, sc.jitter, u, samples, seed + k);
    v.monte_carlo = mc.mean;
    v.standard_error = mc.standard_error;
    out.push_back(v);
  }
  return out;
}

inline RunReport make_run_report(const ScenarioConfig& cfg, const sca::OptimizeResult& res,
                                 std::size_t samples, double optimize_seconds) {
  RunReport r;
  r.config = cfg;
  const auto& sc = cfg.scenario;
  r.slots = slot_records(res.iterate.s, sc);
  r.history = res.history;
  r.converged = res.converged;
  r.efficiency_closed_form = sca::energy_efficiency(res.iterate.s, sc);
  r.samples = samples;
  r.optimize_seconds = optimize_seconds;
  const auto t0 = std::chrono::steady_clock::now();
  r.validation = validate_slots(res.iterate.s, sc, samples, cfg.seed);
  double cap = 0.0;
  for (const auto& v : r.validation) cap += v.monte_carlo;
  r.efficiency_monte_carlo = cap / sca::efficiency_breakdown(res.iterate.s, sc).total_power;
  r.validation_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kTrajectoryHeader = "t,x,y,z,vx,vy,ax,ay,roll,yaw,se,power";
inline constexpr const char* kTraceHeader =
    "iteration,lambda,c_tot,p_tot,efficiency,max_violation,change,evaluations";
inline constexpr const char* kValidationHeader =
    "slot,range,omega,closed_form,monte_carlo,standard_error";

inline std::string trajectory_csv(const std::vector<SlotRecord>& rows) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.t, r.s.x(), r.s.y(), r.s.z(),
                       r.v.x(), r.v.y(), r.a.x(), r.a.y(), r.roll, r.yaw, r.spectral_efficiency,
                       r.power);
  return out;
}

inline std::string trace_csv(const std::vector<sca::HistoryRecord>& h) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (const auto& r : h)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.iteration, r.lambda, r.c_tot, r.p_tot,
                       r.efficiency, r.max_violation, r.change, r.evaluations);
  return out;
}

inline std::string validation_csv(const std::vector<SlotValidation>& v) {
  std::string out = std::string(kValidationHeader) + "\n";
  for (const auto& r : v)
    out += fmt::format("{},{},{},{},{},{}\n", r.slot, r.range, r.omega, r.closed_form,
                       r.monte_carlo, r.standard_error);
  return out;
}

inline std::vector<std::vector<double>> read_csv(const std::string& path,
                                                 const std::string& header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ParseError(path, "expected header '" + header + "'");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(parse_number(trim(cell), path + ":" + std::to_string(lineno)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Positions from a trajectory.csv file.
inline std::vector<Vec3> read_trajectory_csv(const std::string& path) {
  std::vector<Vec3> s;
  for (const auto& row : read_csv(path, kTrajectoryHeader)) {
    if (row.size() != 12) throw ParseError(path, "expected 12 columns");
    s.emplace_back(row[1], row[2], row[3]);
  }
  return s;
}

inline std::string report_text(const RunReport& r) {
  const auto& sc = r.config.scenario;
  std::string out;
  out += "fsouav optimization report\n\n";
  out += fmt::format("slots               {}\n", sc.slots);
  out += fmt::format("slot length         {} s\n", sc.slot_length);
  out += fmt::format("launch cost         {} J\n", sc.launch_cost);
  out += fmt::format("jitter sigma        {} / {} / {} mrad\n", sc.jitter.sigma_roll * 1e3,
                     sc.jitter.sigma_pitch * 1e3, sc.jitter.sigma_yaw * 1e3);
  out += fmt::format("outer iterations    {}\n", r.history.empty() ? 0 : r.history.size() - 1);
  out += fmt::format("converged           {}\n", r.converged ? "yes" : "no (iteration cap)");
  if (!r.history.empty()) {
    out += fmt::format("initial efficiency  {:.6e}\n", r.history.front().efficiency);
    out += fmt::format("final efficiency    {:.6e}\n", r.history.back().efficiency);
    double worst = 0.0;
    for (const auto& h : r.history) worst = std::max(worst, h.max_violation);
    out += fmt::format("worst violation     {:.3e}\n", worst);
  }
  out += fmt::format("efficiency (closed form)  {:.9e}\n", r.efficiency_closed_form);
  out += fmt::format("efficiency (Monte Carlo)  {:.9e}  ({} samples per slot)\n",
                     r.efficiency_monte_carlo, r.samples);
  out += fmt::format("optimization time   {:.2f} s\n", r.optimize_seconds);
  out += fmt::format("validation time     {:.2f} s\n", r.validation_seconds);
  return out;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

// Writes the report's file set into `dir` and returns the file names.
inline std::vector<std::string> write_outputs(const RunReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory '" + dir + "'");
  const std::vector<std::pair<std::string, std::string>> files = {
      {"scenario.echo", echo_scenario(r.config)},
      {"trajectory.csv", trajectory_csv(r.slots)},
      {"efficiency_trace.csv", trace_csv(r.history)},
      {"validation.csv", validation_csv(r.validation)},
      {"report", report_text(r)},
  };
  std::vector<std::string> manifest;
  for (const auto& [name, content] : files) {
    write_file(fs::path(dir) / name, content);
    manifest.push_back(name);
  }
  return manifest;
}

}  // namespace fsouav::io

#endif  // FSOUAV_REPORT_HPP_
