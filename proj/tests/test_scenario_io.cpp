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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "fsouav/report.hpp"
#include "fsouav/scenario_io.hpp"

namespace fsouav::io {
namespace {

namespace fs = std::filesystem;

std::string expect_parse_error(const std::string& doc) {
  try {
    parse_scenario(doc);
  } catch (const ParseError& e) {
    return e.path();
  }
  ADD_FAILURE() << "no ParseError for:\n" << doc;
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fsouav_io_" + name);
  fs::remove_all(p);
  return p;
}

TEST(LoadScenario, EmptyDocumentGivesDefaults) {
  for (const char* doc : {"", "# nothing\n", "{}"}) {
    const ScenarioConfig c = parse_scenario(doc);
    const auto& sc = c.scenario;
    EXPECT_EQ(sc.altitude, 600.0);
    EXPECT_EQ(sc.link.transmit_power, 0.01);
    EXPECT_DOUBLE_EQ(sc.link.transmit_power / sc.link.noise_std, 1000.0);
    EXPECT_EQ(sc.link.responsivity, 0.5);
    EXPECT_EQ(sc.link.aperture, 0.2);
    EXPECT_EQ(sc.link.sigma_i, 0.3);
    EXPECT_EQ(sc.link.visibility, 3000.0);
    EXPECT_EQ(sc.slot_length, 0.2);
    EXPECT_EQ(sc.aircraft.v_min, 3.0);
    EXPECT_EQ(sc.aircraft.v_max, 100.0);
    EXPECT_EQ(sc.aircraft.a_max, 5.0);
    EXPECT_EQ(sc.aircraft.g, 9.8);
    EXPECT_EQ(sc.origin, Vec3(54, 200, 600));
    EXPECT_EQ(sc.slots, 100);
    EXPECT_EQ(c.seed, 1u);
    EXPECT_EQ(echo_scenario(c), echo_scenario(ScenarioConfig{}));
  }
}

TEST(LoadScenario, JitterListInMilliradians) {
  for (const char* doc : {"jitter:\n  sigma: \"1 mrad, 0.1 mrad, 0.1 mrad\"\n",
                          "jitter:\n  sigma: [1 mrad, 0.1 mrad, 100 urad]\n"}) {
    const auto m = parse_scenario(doc).scenario.jitter.matrix();
    EXPECT_NEAR(m(0, 0), 1e-6, 1e-21);
    EXPECT_NEAR(m(1, 1), 1e-8, 1e-23);
    EXPECT_NEAR(m(2, 2), 1e-8, 1e-23);
    EXPECT_EQ(m(0, 1), 0.0);
  }
  const auto c = parse_scenario("jitter:\n  sigma: [1 mrad, 1 mrad, 1 mrad]\n  correlation: [0.5, 0.5, 0.5]\n");
  EXPECT_FALSE(c.scenario.jitter.is_diagonal());
  EXPECT_EQ(expect_parse_error("jitter:\n  sigma: [1 mrad, 1 mrad]\n"), "jitter.sigma");
  EXPECT_EQ(expect_parse_error("jitter:\n  sigma: [1 mrad, -1 mrad, 1 mrad]\n"), "jitter.sigma[1]");
  EXPECT_EQ(expect_parse_error("jitter:\n  correlation: [0, 2, 0]\n"), "jitter.correlation[1]");
}

TEST(LoadScenario, UnitConversions) {
  const auto c = parse_scenario(
      "link:\n  transmit_power: 20 mW\n  visibility: 5 km\n  wavelength: 1.55 um\n"
      "  aperture: 10 cm\n  sigma_div: 0.086 deg\n"
      "mission:\n  min_elevation: 60 deg\n  launch_cost: 100 kJ\n  slot_length: 200 ms\n"
      "aircraft:\n  v_max: 180 km/h\n");
  const auto& sc = c.scenario;
  EXPECT_DOUBLE_EQ(sc.link.transmit_power, 0.02);
  EXPECT_DOUBLE_EQ(sc.link.noise_std, 2e-5);
  EXPECT_DOUBLE_EQ(sc.link.visibility, 5000.0);
  EXPECT_DOUBLE_EQ(sc.link.wavelength, 1.55e-6);
  EXPECT_DOUBLE_EQ(sc.link.aperture, 0.1);
  EXPECT_NEAR(sc.link.sigma_div, 0.086 * std::numbers::pi / 180, 1e-18);
  EXPECT_NEAR(sc.min_elevation, std::numbers::pi / 3, 1e-15);
  EXPECT_DOUBLE_EQ(sc.launch_cost, 1e5);
  EXPECT_DOUBLE_EQ(sc.slot_length, 0.2);
  EXPECT_DOUBLE_EQ(sc.aircraft.v_max, 50.0);
}

TEST(LoadScenario, NoiseFromTransmitRatio) {
  const auto c = parse_scenario("link:\n  transmit_to_noise: 20 dB\n");
  EXPECT_DOUBLE_EQ(c.scenario.link.noise_std, 1e-4);
  const auto d = parse_scenario("link:\n  noise_std: 2 uA\n");
  EXPECT_DOUBLE_EQ(d.scenario.link.noise_std, 2e-6);
  EXPECT_EQ(expect_parse_error("link:\n  noise_std: 1 uA\n  transmit_to_noise: 30 dB\n"),
            "link.noise_std");
}

TEST(LoadScenario, RejectsBadFieldsWithTheirPath) {
  EXPECT_EQ(expect_parse_error("link:\n  sigma_div: -1 mrad\n"), "link.sigma_div");
  EXPECT_EQ(expect_parse_error("link:\n  sigma_div: 1.5\n"), "link.sigma_div");
  EXPECT_EQ(expect_parse_error("link:\n  sigma_div: 1.5 m\n"), "link.sigma_div");
  EXPECT_EQ(expect_parse_error("link:\n  sigma_i: 0.3 rad\n"), "link.sigma_i");
  EXPECT_EQ(expect_parse_error("link:\n  sigma_div: fast\n"), "link.sigma_div");
  EXPECT_EQ(expect_parse_error("link:\n  colour: red\n"), "link.colour");
  EXPECT_EQ(expect_parse_error("extras: 1\n"), "extras");
  EXPECT_EQ(expect_parse_error("mission:\n  circle:\n    radius: 60 m\n    spin: 1\n"),
            "mission.circle.spin");
  EXPECT_EQ(expect_parse_error("mission:\n  slots: 10.5\n"), "mission.slots");
  EXPECT_EQ(expect_parse_error("mission:\n  slots: 1\n"), "mission.slots");
  EXPECT_EQ(expect_parse_error("aircraft:\n  v_max: 2 m/s\n"), "aircraft.v_max");
  EXPECT_EQ(expect_parse_error("aircraft:\n  a_max: 5 m/s\n"), "aircraft.a_max");
  EXPECT_EQ(expect_parse_error("mission:\n  min_elevation: 30 deg\n"), "mission.min_elevation");
  EXPECT_EQ(expect_parse_error("mission:\n  launch_cost: -1 J\n"), "mission.launch_cost");
  EXPECT_EQ(expect_parse_error("mission:\n  origin: [0 m, 0 m, 500 m]\n"), "mission.origin");
  EXPECT_EQ(expect_parse_error("mission:\n  init: spiral\n"), "mission.init");
  EXPECT_EQ(expect_parse_error("optimizer:\n  tau_v: 0\n"), "optimizer.tau_v");
  EXPECT_EQ(expect_parse_error("optimizer:\n  linearized_power_cone: maybe\n"),
            "optimizer.linearized_power_cone");
  EXPECT_EQ(expect_parse_error("seed: -3\n"), "seed");
  EXPECT_EQ(expect_parse_error("link: 5\n"), "link");
  EXPECT_EQ(expect_parse_error("link: [1, 2\n"), "<document>");
}

TEST(LoadScenario, PresetsAndAltitude) {
  const auto h = parse_scenario("mission:\n  preset: hover\n").scenario;
  EXPECT_EQ(h.slots, 400);
  EXPECT_EQ(h.launch_cost, 4e5);
  EXPECT_EQ(h.init, sca::InitKind::kCircular);
  EXPECT_EQ(h.origin, Vec3(0, 0, 600));
  const auto keep = parse_scenario("jitter:\n  sigma: [0.1 mrad, 1 mrad, 0.1 mrad]\n"
                                   "mission:\n  preset: hover\n  slots: 200\n")
                        .scenario;
  EXPECT_EQ(keep.slots, 200);
  EXPECT_EQ(keep.jitter.sigma_pitch, 1e-3);
  const auto low = parse_scenario("mission:\n  altitude: 500 m\n  origin: [10 m, 20 m]\n");
  EXPECT_EQ(low.scenario.origin, Vec3(10, 20, 500));
  EXPECT_EQ(low.scenario.destination.z(), 500.0);
  EXPECT_EQ(low.analysis.position.z(), 500.0);
}

TEST(LoadScenario, DurationMustMatchSlots) {
  const auto a = parse_scenario("mission:\n  slots: 400\n  duration: 80 s\n").scenario;
  EXPECT_DOUBLE_EQ(a.slot_length, 0.2);
  const auto b = parse_scenario("mission:\n  duration: 1 min\n").scenario;
  EXPECT_EQ(b.slots, 300);
  EXPECT_EQ(expect_parse_error("mission:\n  slots: 100\n  slot_length: 0.2 s\n  duration: 30 s\n"),
            "mission.duration");
}

ScenarioConfig unusual_config() {
  return parse_scenario(
      "seed: 18446744073709551615\n"
      "link:\n  transmit_power: 7.3 mW\n  noise_std: 3.3 uA\n  sigma_div: 1.234567 mrad\n"
      "  sigma_i: 0.17\n  visibility: 4.4 km\n  wavelength: 1310 nm\n"
      "aircraft:\n  c1: 0.001 kg/m\n  c2: 2000 kg*m^3/s^4\n  mass: 12 kg\n"
      "jitter:\n  sigma: [0.3 mrad, 0.7 mrad, 0.11 mrad]\n  correlation: [0.1, -0.2, 0.3]\n"
      "mission:\n  preset: hover\n  slots: 123\n  slot_length: 0.3 s\n"
      "  circle:\n    center: [0 m, -45 m]\n    radius: 45 m\n    direction: counterclockwise\n"
      "optimizer:\n  tau_v: 0.02\n  max_outer: 7\n  linearized_power_cone: true\n"
      "analysis:\n  posture: [1 deg, -10 deg, 90 deg]\n  accelerations: [0 m/s^2, 1 m/s^2]\n");
}

TEST(Echo, RoundTripIsExact) {
  const ScenarioConfig c = unusual_config();
  const std::string e1 = echo_scenario(c);
  const ScenarioConfig back = parse_scenario(e1);
  EXPECT_EQ(echo_scenario(back), e1);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.scenario.link.sigma_div, c.scenario.link.sigma_div);
  EXPECT_EQ(back.scenario.link.noise_std, c.scenario.link.noise_std);
  EXPECT_EQ(back.scenario.jitter.rho_pitch_yaw, c.scenario.jitter.rho_pitch_yaw);
  EXPECT_EQ(back.scenario.circle.center, c.scenario.circle.center);
  EXPECT_FALSE(back.scenario.circle.clockwise);
  EXPECT_EQ(back.scenario.slot_length, 0.3);
  EXPECT_EQ(back.optimizer.max_outer, 7);
  EXPECT_TRUE(back.optimizer.linearized_power_cone);
  EXPECT_EQ(back.analysis.posture.yaw, c.analysis.posture.yaw);
  EXPECT_EQ(back.analysis.accelerations, c.analysis.accelerations);
}

TEST(Echo, ShippedScenariosLoad) {
  int count = 0;
  for (const auto& e : fs::directory_iterator(fs::path(FSOUAV_SOURCE_DIR) / "scenarios")) {
    if (e.path().extension() != ".yaml") continue;
    const ScenarioConfig c = load_scenario(e.path().string());
    EXPECT_EQ(echo_scenario(parse_scenario(echo_scenario(c))), echo_scenario(c)) << e.path();
    ++count;
  }
  EXPECT_GE(count, 3);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.yaml"), Error);
}

RunReport small_report(std::uint64_t seed) {
  ScenarioConfig c = parse_scenario("mission:\n  slots: 20\n  slot_length: 1 s\noptimizer:\n  max_outer: 2\n");
  c.seed = seed;
  const auto res = sca::optimize(c.scenario, c.optimizer);
  return make_run_report(c, res, 500, 0.0);
}

TEST(WriteOutputs, DeterministicFileSet) {
  const fs::path a = scratch("a"), b = scratch("b");
  const RunReport ra = small_report(4), rb = small_report(4);
  const auto files = write_outputs(ra, a.string());
  write_outputs(rb, b.string());
  EXPECT_GE(files.size(), 4u);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(a / f)) << f;
  for (const char* csv : {"trajectory.csv", "efficiency_trace.csv", "validation.csv"}) {
    const std::string text = slurp(a / csv);
    EXPECT_EQ(text, slurp(b / csv)) << csv;
    EXPECT_EQ(text.back(), '\n');
    EXPECT_EQ(text.find(';'), std::string::npos);
  }
  EXPECT_EQ(slurp(a / "scenario.echo"), slurp(b / "scenario.echo"));
  const std::string traj = slurp(a / "trajectory.csv");
  EXPECT_EQ(traj.substr(0, traj.find('\n')), "t,x,y,z,vx,vy,ax,ay,roll,yaw,se,power");
  EXPECT_EQ(std::count(traj.begin(), traj.end(), '\n'), 20 + 1);
  EXPECT_EQ(read_trajectory_csv((a / "trajectory.csv").string()).size(), 20u);
}

TEST(WriteOutputs, EchoAndTrajectoryReproduceTheReport) {
  const fs::path dir = scratch("rerun");
  const RunReport r = small_report(2);
  write_outputs(r, dir.string());
  const ScenarioConfig again = load_scenario((dir / "scenario.echo").string());
  EXPECT_EQ(echo_scenario(again), echo_scenario(r.config));
  const auto s = read_trajectory_csv((dir / "trajectory.csv").string());
  const auto trace = read_csv((dir / "efficiency_trace.csv").string(), kTraceHeader);
  ASSERT_FALSE(trace.empty());
  EXPECT_NEAR(sca::energy_efficiency(s, again.scenario), trace.back()[4], 1e-9);
  EXPECT_NEAR(r.efficiency_closed_form, trace.back()[4], 1e-15);
}

TEST(WriteOutputs, UnwritableDirectory) {
  const fs::path file = scratch("blocker");
  std::ofstream(file) << "x";
  EXPECT_THROW(write_outputs(small_report(1), (file / "sub").string()), Error);
}

TEST(ReadCsv, RejectsWrongHeader) {
  const fs::path file = scratch("bad.csv");
  std::ofstream(file) << "a,b\n1,2\n";
  EXPECT_THROW(read_trajectory_csv(file.string()), ParseError);
}

}  // namespace
}  // namespace fsouav::io
