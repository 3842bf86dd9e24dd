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

// Command-line front end.
//
//   fsouav <pointing|capacity|power|optimize|validate|compare-dof>
//          [--scenario FILE] [--out DIR] [--seed N] [--samples N]
//          [--mode closed_form|monte_carlo]
//
// Exit codes: 0 ok, 1 usage or I/O error, 2 validation failure (bad scenario
// file or a failed oracle check), 3 infeasible scenario, 4 solver failure.

#ifndef FSOUAV_CLI_HPP_
#define FSOUAV_CLI_HPP_

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fsouav/channel.hpp"
#include "fsouav/errors.hpp"
#include "fsouav/jitter.hpp"
#include "fsouav/kinematics.hpp"
#include "fsouav/report.hpp"
#include "fsouav/sca.hpp"
#include "fsouav/scenario_io.hpp"
#include "fsouav/stats.hpp"

namespace fsouav::cli {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kInfeasible = 3, kSolver = 4 };

struct Options {
  std::string scenario;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::string mode = "closed_form";
  std::string run;  // validate: directory of a previous optimize run
};

struct Context {
  Options opt;
  io::ScenarioConfig cfg;
  std::ostream& out;

  std::uint64_t seed() const { return opt.seed.value_or(cfg.seed); }
  std::size_t samples(std::size_t fallback) const { return opt.samples.value_or(fallback); }
  bool monte_carlo() const { return opt.mode == "monte_carlo"; }

  std::filesystem::path out_dir() const {
    std::error_code ec;
    std::filesystem::create_directories(opt.out, ec);
    if (!std::filesystem::is_directory(opt.out))
      throw Error("cannot create output directory '" + opt.out + "'");
    return opt.out;
  }
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// theta_p histogram against the Hoyt pdf at the analysis geometry.
inline int cmd_pointing(Context& c) {
  const auto& an = c.cfg.analysis;
  const auto& cov = c.cfg.scenario.jitter;
  const Vec3 u = kinematics::pointing_vector(an.position, an.posture);
  const auto h = jitter::hoyt_params(cov, u);
  const std::size_t n = c.samples(1000000);
  const auto theta = jitter::sample_error_angles(cov, u, n, c.seed(), jitter::SampleMode::kExact);
  const double width = an.theta_max / an.bins;
  std::vector<std::size_t> counts(an.bins, 0);
  double second = 0.0;
  for (double t : theta) {
    second += t * t;
    const auto b = static_cast<std::size_t>(t / width);
    if (b < counts.size()) ++counts[b];
  }
  std::string csv = "theta_p,hoyt_pdf,empirical_density\n";
  for (int b = 0; b < an.bins; ++b) {
    const double mid = (b + 0.5) * width;
    csv += fmt::format("{},{},{}\n", mid, jitter::hoyt_pdf(mid, h),
                       static_cast<double>(counts[b]) / (static_cast<double>(n) * width));
  }
  io::write_file(c.out_dir() / "pointing.csv", csv);
  const double ks = stats::ks_statistic(theta, [&](double r) { return jitter::hoyt_cdf(r, h); });
  c.out << fmt::format("lambda1 {:.6g} mrad^2\nlambda2 {:.6g} mrad^2\nq {:.6g}\nomega {:.6g} mrad^2\n",
                       h.lambda1 * 1e6, h.lambda2 * 1e6, h.q, h.omega * 1e6);
  c.out << fmt::format("monte carlo E[theta^2] {:.6g} mrad^2 ({} samples)\nks distance {:.6g}\n",
                       second / n * 1e6, n, ks);
  return kOk;
}

// Ergodic capacity over a square grid at the flight altitude.
inline int cmd_capacity(Context& c) {
  const auto& an = c.cfg.analysis;
  const auto& sc = c.cfg.scenario;
  const auto axis = linspace(an.grid_min, an.grid_max, an.grid_points);
  const std::size_t n = c.samples(10000);
  std::string csv = "x,y,z,capacity\n";
  std::uint64_t seed = c.seed();
  for (double y : axis) {
    for (double x : axis) {
      const Vec3 s(x, y, sc.altitude);
      const Vec3 u = kinematics::pointing_vector(s, an.posture);
      double cap;
      if (c.monte_carlo()) {
        cap = channel::mc_ergodic_capacity(sc.link, s.norm(), sc.jitter, u, n, seed++).mean;
      } else {
        cap = channel::anchored_capacity(
            channel::expected_log_gamma(sc.link, s.norm(), jitter::hoyt_params(sc.jitter, u)));
      }
      csv += fmt::format("{},{},{},{}\n", x, y, sc.altitude, cap);
    }
  }
  io::write_file(c.out_dir() / "capacity.csv", csv);
  c.out << fmt::format("wrote {} grid points ({})\n", axis.size() * axis.size(), c.opt.mode);
  return kOk;
}

// Flight power over speed for each lateral acceleration.
inline int cmd_power(Context& c) {
  const auto& an = c.cfg.analysis;
  const auto& ac = c.cfg.scenario.aircraft;
  std::string csv = "speed,accel,power\n";
  for (double acc : an.accelerations)
    for (double v : linspace(an.speed_min, an.speed_max, an.speed_points))
      csv += fmt::format("{},{},{}\n", v, acc,
                         kinematics::flight_power(Vec3(v, 0, 0), Vec3(0, acc, 0), ac));
  io::write_file(c.out_dir() / "power.csv", csv);
  c.out << fmt::format("wrote {} rows\n", an.accelerations.size() * an.speed_points);
  return kOk;
}

inline sca::OptimizeResult run_optimizer(const io::ScenarioConfig& cfg, std::ostream* log) {
  return sca::optimize(cfg.scenario, cfg.optimizer, [log](const sca::HistoryRecord& h) {
    if (log)
      *log << fmt::format("iter {:3d}  lambda {:.6e}  efficiency {:.6e}  change {:.3e}  {:.1f} s\n",
                          h.iteration, h.lambda, h.efficiency, h.change, h.seconds)
           << std::flush;
  });
}

inline int cmd_optimize(Context& c) {
  c.cfg.seed = c.seed();
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_optimizer(c.cfg, &c.out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto report = io::make_run_report(c.cfg, res, c.samples(10000), secs);
  const auto dir = c.out_dir();
  const auto files = io::write_outputs(report, dir.string());
  c.out << fmt::format("efficiency {:.9e} ({})\n",
                       c.monte_carlo() ? report.efficiency_monte_carlo
                                       : report.efficiency_closed_form,
                       c.opt.mode);
  for (const auto& f : files) c.out << (dir / f).string() << "\n";
  return kOk;
}

struct Check {
  std::string name;
  double value, reference, tolerance;
  bool pass;
};

// Closed forms against Monte Carlo at the analysis geometry, plus the
// efficiency of a previous optimize run recomputed from its trajectory.csv.
inline int cmd_validate(Context& c) {
  const auto& an = c.cfg.analysis;
  const auto& sc = c.cfg.scenario;
  const std::size_t n = c.samples(1000000);
  std::vector<Check> checks;
  auto add = [&](std::string name, double v, double ref, double tol) {
    checks.push_back({std::move(name), v, ref, tol, std::abs(v - ref) <= tol});
  };
  const Vec3 u = kinematics::pointing_vector(an.position, an.posture);
  const auto h = jitter::hoyt_params(sc.jitter, u);
  const auto theta =
      jitter::sample_error_angles(sc.jitter, u, n, c.seed(), jitter::SampleMode::kExact);
  double second = 0.0;
  for (double t : theta) second += t * t;
  add("moment_identity", second / n, h.omega, 0.01 * h.omega);
  const double ks = stats::ks_statistic(theta, [&](double r) { return jitter::hoyt_cdf(r, h); });
  add("hoyt_ks_distance", ks, 0.0, std::max(0.005, stats::ks_critical_value(n, 1e-3)));
  const double z = an.position.norm();
  const double elg = channel::expected_log_gamma(sc.link, z, h);
  const auto mc = channel::mc_log_gamma(sc.link, z, sc.jitter, u, n, c.seed() + 1);
  add("expected_log_gamma", mc.mean, elg, 0.005 * std::abs(elg));
  const double bound = channel::anchored_capacity(elg);
  const auto cap = channel::mc_ergodic_capacity(sc.link, z, sc.jitter, u, n, c.seed() + 2);
  // Jensen: the anchored closed form never exceeds the ergodic capacity.
  add("capacity_lower_bound", std::min(bound, cap.mean + 3 * cap.standard_error), bound, 0.0);

  const std::string run = c.opt.run.empty() ? c.opt.out : c.opt.run;
  const auto traj = std::filesystem::path(run) / "trajectory.csv";
  const auto trace = std::filesystem::path(run) / "efficiency_trace.csv";
  if (std::filesystem::exists(traj) && std::filesystem::exists(trace)) {
    io::ScenarioConfig run_cfg = c.cfg;
    const auto echo = std::filesystem::path(run) / "scenario.echo";
    if (c.opt.scenario.empty() && std::filesystem::exists(echo))
      run_cfg = io::load_scenario(echo.string());
    const auto rows = io::read_csv(trace.string(), io::kTraceHeader);
    if (rows.empty() || rows.back().size() != 8)
      throw ParseError(trace.string(), "no efficiency records");
    const double reported = rows.back()[4];
    const auto s = io::read_trajectory_csv(traj.string());
    try {
      add("run_efficiency", sca::energy_efficiency(s, run_cfg.scenario), reported, 1e-9);
    } catch (const InfeasibleError& e) {
      c.out << "run trajectory: " << e.what() << "\n";
      checks.push_back({"run_efficiency", std::nan(""), reported, 1e-9, false});
    }
  }

  std::string csv = "check,value,reference,tolerance,pass\n";
  bool ok = true;
  for (const auto& k : checks) {
    csv += fmt::format("{},{},{},{},{}\n", k.name, k.value, k.reference, k.tolerance,
                       k.pass ? 1 : 0);
    c.out << fmt::format("{:<22} {:>14.8g} {:>14.8g} tol {:<10.3g} {}\n", k.name, k.value,
                         k.reference, k.tolerance, k.pass ? "PASS" : "FAIL");
    ok = ok && k.pass;
  }
  io::write_file(c.out_dir() / "oracle_checks.csv", csv);
  return ok ? kOk : kValidation;
}

// Optimizes under 3-, 2- and 1-DoF reductions of the scenario jitter and
// evaluates every result under the full jitter.
inline int cmd_compare_dof(Context& c) {
  const sca::Scenario truth = c.cfg.scenario;
  if (!truth.jitter.is_diagonal())
    throw UnsupportedOperation("compare-dof requires uncorrelated jitter");
  const int dofs[3] = {3, 2, 1};
  std::vector<std::future<sca::OptimizeResult>> jobs;
  for (int dof : dofs) {
    io::ScenarioConfig cfg = c.cfg;
    cfg.scenario.jitter = jitter::reduce_jitter_dof(truth.jitter, dof);
    jobs.push_back(std::async(std::launch::async, [cfg] { return run_optimizer(cfg, nullptr); }));
  }
  sca::EfficiencyOptions eval;
  eval.mode = c.monte_carlo() ? sca::EfficiencyMode::kMonteCarlo : sca::EfficiencyMode::kClosedForm;
  eval.samples = c.samples(10000);
  eval.seed = c.seed();
  const auto dir = c.out_dir();
  double eff[3];
  for (int i = 0; i < 3; ++i) {
    const auto res = jobs[i].get();
    eff[i] = sca::energy_efficiency(res.iterate.s, truth, eval);
    io::write_file(dir / fmt::format("trajectory_dof{}.csv", dofs[i]),
                   io::trajectory_csv(io::slot_records(res.iterate.s, truth)));
  }
  std::string csv = "dof,efficiency,relative_percent\n";
  c.out << "dof  efficiency      relative\n";
  for (int i = 0; i < 3; ++i) {
    const double rel = 100.0 * eff[i] / eff[0];
    csv += fmt::format("{},{},{}\n", dofs[i], eff[i], rel);
    c.out << fmt::format("{:<4} {:.6e}  {:7.2f} %\n", dofs[i], eff[i], rel);
  }
  io::write_file(dir / "dof_comparison.csv", csv);
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-efficient FSO UAV trajectory design"};
  app.require_subcommand(1);
  Options opt;
  struct Command {
    const char* name;
    const char* help;
    int (*fn)(Context&);
  };
  const Command commands[] = {
      {"pointing", "Hoyt parameters, pdf curve and Monte Carlo histogram", cmd_pointing},
      {"capacity", "ergodic capacity over a position grid", cmd_capacity},
      {"power", "flight power sweep", cmd_power},
      {"optimize", "run the trajectory optimization and write a run report", cmd_optimize},
      {"validate", "closed forms against Monte Carlo oracles", cmd_validate},
      {"compare-dof", "optimize under reduced jitter DoF, evaluate under full jitter",
       cmd_compare_dof},
  };
  std::vector<CLI::App*> subs;
  for (const auto& cmd : commands) {
    CLI::App* s = app.add_subcommand(cmd.name, cmd.help);
    s->add_option("--scenario", opt.scenario, "scenario file (defaults when omitted)");
    s->add_option("--out", opt.out, "output directory");
    s->add_option("--seed", opt.seed, "seed for every stochastic path");
    s->add_option("--samples", opt.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
    s->add_option("--mode", opt.mode, "efficiency evaluation")
        ->check(CLI::IsMember({"closed_form", "monte_carlo"}));
    if (std::string(cmd.name) == "validate")
      s->add_option("--run", opt.run, "directory of an optimize run (default: --out)");
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  try {
    io::ScenarioConfig cfg = opt.scenario.empty() ? io::ScenarioConfig{}
                                                  : io::load_scenario(opt.scenario);
    Context ctx{opt, std::move(cfg), out};
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return commands[i].fn(ctx);
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const BracketError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace fsouav::cli

#endif  // FSOUAV_CLI_HPP_
