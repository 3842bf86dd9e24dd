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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fsouav/cli.hpp"

namespace fsouav::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fsouav");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fsouav_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_yaml(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "scenario.yaml";
  std::ofstream(p) << text;
  return p.string();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

constexpr const char* kSmallMoving =
    "seed: 3\nmission:\n  slots: 20\n  slot_length: 1 s\noptimizer:\n  max_outer: 3\n";

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"teleport"}).code, kUsage);
  EXPECT_EQ(invoke({"power", "--samples", "0"}).code, kUsage);
  EXPECT_EQ(invoke({"power", "--mode", "guess"}).code, kUsage);
  EXPECT_EQ(invoke({"power", "--scenario", "/nonexistent.yaml"}).code, kUsage);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST(Cli, BadScenarioIsValidationFailure) {
  const auto dir = scratch("bad");
  const auto r = invoke({"power", "--scenario", write_yaml(dir, "link:\n  sigma_div: -1 mrad\n"),
                         "--out", dir.string()});
  EXPECT_EQ(r.code, kValidation);
  EXPECT_NE(r.err.find("link.sigma_div"), std::string::npos) << r.err;
}

TEST(Cli, InfeasibleMission) {
  const auto dir = scratch("infeasible");
  const auto r = invoke({"optimize", "--scenario",
                         write_yaml(dir, "mission:\n  preset: hover\naircraft:\n  v_max: 4 m/s\n"),
                         "--out", dir.string()});
  EXPECT_EQ(r.code, kInfeasible);
  EXPECT_NE(r.err.find("max_speed"), std::string::npos) << r.err;
}

TEST(Cli, PointingWritesHistogram) {
  const auto dir = scratch("pointing");
  const auto r = invoke({"pointing", "--out", dir.string(), "--samples", "100000"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto lines = lines_of(dir / "pointing.csv");
  ASSERT_EQ(lines.size(), 81u);
  EXPECT_EQ(lines[0], "theta_p,hoyt_pdf,empirical_density");
  EXPECT_NE(r.out.find("omega"), std::string::npos);
}

TEST(Cli, CapacityAndPowerGrids) {
  const auto dir = scratch("grids");
  ASSERT_EQ(invoke({"capacity", "--out", dir.string()}).code, kOk);
  auto lines = lines_of(dir / "capacity.csv");
  EXPECT_EQ(lines[0], "x,y,z,capacity");
  EXPECT_EQ(lines.size(), 25u * 25u + 1);
  ASSERT_EQ(invoke({"power", "--out", dir.string()}).code, kOk);
  lines = lines_of(dir / "power.csv");
  EXPECT_EQ(lines[0], "speed,accel,power");
  EXPECT_EQ(lines.size(), 3u * 50u + 1);
}

TEST(Cli, OptimizeThenValidate) {
  const auto dir = scratch("optimize");
  const std::string yaml = write_yaml(dir, kSmallMoving);
  const auto r = invoke({"optimize", "--scenario", yaml, "--out", dir.string(), "--samples", "500"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto traj = lines_of(dir / "trajectory.csv");
  ASSERT_EQ(traj.size(), 21u);
  EXPECT_EQ(traj[0], io::kTrajectoryHeader);
  for (const char* f : {"scenario.echo", "efficiency_trace.csv", "validation.csv", "report"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  const auto v = invoke({"validate", "--run", dir.string(), "--out", dir.string(), "--samples",
                         "200000"});
  EXPECT_NE(v.out.find("run_efficiency"), std::string::npos) << v.out;
  const auto checks = lines_of(dir / "oracle_checks.csv");
  ASSERT_GE(checks.size(), 6u);
  EXPECT_EQ(checks[0], "check,value,reference,tolerance,pass");
  bool found = false;
  for (const auto& l : checks)
    if (l.rfind("run_efficiency,", 0) == 0) {
      found = true;
      EXPECT_EQ(l.back(), '1') << l;
    }
  EXPECT_TRUE(found);
}

TEST(Cli, ValidateDetectsTamperedRun) {
  const auto dir = scratch("tamper");
  ASSERT_EQ(invoke({"optimize", "--scenario", write_yaml(dir, kSmallMoving), "--out",
                    dir.string(), "--samples", "200"})
                .code,
            kOk);
  auto lines = lines_of(dir / "trajectory.csv");
  // Shift one interior waypoint by 1 m.
  std::vector<std::string> cells;
  std::stringstream ss(lines[5]);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  cells[2] = fmt::format("{}", std::stod(cells[2]) + 1.0);
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) row += (i ? "," : "") + cells[i];
  lines[5] = row;
  std::ofstream out(dir / "trajectory.csv");
  for (const auto& l : lines) out << l << "\n";
  out.close();
  const auto v = invoke({"validate", "--run", dir.string(), "--out", dir.string(), "--samples",
                         "200000"});
  EXPECT_EQ(v.code, kValidation);
  EXPECT_NE(v.out.find("FAIL"), std::string::npos) << v.out;
}

TEST(Cli, SameSeedSameFiles) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  for (const auto& d : {a, b})
    ASSERT_EQ(invoke({"optimize", "--scenario", write_yaml(d, kSmallMoving), "--out", d.string(),
                      "--seed", "11", "--samples", "300"})
                  .code,
              kOk);
  for (const char* f : {"trajectory.csv", "efficiency_trace.csv", "validation.csv", "scenario.echo"})
    EXPECT_EQ(lines_of(a / f), lines_of(b / f)) << f;
  EXPECT_NE(lines_of(a / "scenario.echo")[0].find("11"), std::string::npos);
}

TEST(Cli, CompareDofOnSmallHover) {
  const auto dir = scratch("dof");
  const std::string yaml = write_yaml(
      dir,
      "mission:\n  preset: hover\n  slots: 40\n  slot_length: 1 s\n  launch_cost: 200 kJ\n"
      "jitter:\n  sigma: [0.1 mrad, 1 mrad, 0.1 mrad]\noptimizer:\n  max_outer: 2\n");
  const auto r = invoke({"compare-dof", "--scenario", yaml, "--out", dir.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto lines = lines_of(dir / "dof_comparison.csv");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "dof,efficiency,relative_percent");
  EXPECT_EQ(lines[1].substr(0, 2), "3,");
  EXPECT_EQ(lines[1].substr(lines[1].rfind(',') + 1), "100");
  for (int dof : {1, 2, 3})
    EXPECT_EQ(lines_of(dir / fmt::format("trajectory_dof{}.csv", dof)).size(), 41u);
  const auto bad = invoke({"compare-dof", "--scenario",
                           write_yaml(dir, "jitter:\n  correlation: [0.5, 0.5, 0.5]\n"), "--out",
                           dir.string()});
  EXPECT_EQ(bad.code, kUsage);
}

TEST(Cli, InstalledBinaryExitCodes) {
  const std::string exe = FSOUAV_CLI_PATH;
  const auto dir = scratch("binary");
  const std::string bad = write_yaml(dir, "extras: 1\n");
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(exe + " power --out " + dir.string()), 0);
  EXPECT_EQ(status(exe + " power --scenario " + bad), 2);
  EXPECT_EQ(status(exe), 1);
}

}  // namespace
}  // namespace fsouav::cli
