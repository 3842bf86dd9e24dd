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

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fsouav/sca.hpp"
#include "support/oracles.hpp"
#include "support/trajectories.hpp"

namespace fsouav::sca {
namespace {

using fsouav::testing::perturbed_pointing;
using fsouav::testing::random_feasible_positions;
using fsouav::testing::restriction_tags;
using fsouav::testing::small_mission;

TEST(Initialize, LinearMissionHasConstantSpeed) {
  const Scenario sc = Scenario::moving_mission();
  const Iterate it = initialize_iterate(sc);
  ASSERT_EQ(it.slots(), 100);
  EXPECT_EQ(it.s.front(), sc.origin);
  EXPECT_EQ(it.s.back(), sc.destination);
  for (const Vec3& v : it.v) {
    EXPECT_NEAR(v.x(), 20.0, 1e-9);
    EXPECT_NEAR(v.y(), 0.0, 1e-12);
  }
  for (const Vec3& a : it.a) EXPECT_NEAR(a.norm(), 0.0, 1e-8);
}

TEST(Initialize, CircularMissionIsClosedLoop) {
  const Scenario sc = Scenario::hover_mission();
  const Iterate it = initialize_iterate(sc);
  EXPECT_EQ(it.s.front(), sc.origin);
  EXPECT_EQ(it.s.back(), sc.origin);
  const double step = 2.0 * std::numbers::pi / (sc.slots - 1);
  const double chord_speed = 2.0 * 60.0 * std::sin(step / 2) / sc.slot_length;
  const double arc_speed = 2.0 * std::numbers::pi * 60.0 / ((sc.slots - 1) * sc.slot_length);
  for (int k = 0; k + 1 < sc.slots; ++k) {
    EXPECT_NEAR(it.v[k].norm(), chord_speed, 1e-9);
    EXPECT_NEAR((it.s[k] - sc.circle.center).norm(), 60.0, 1e-9);
  }
  EXPECT_NEAR(chord_speed, arc_speed, 1e-4 * arc_speed);
  // Clockwise seen from above, starting due north of the centre: the first
  // step heads towards +x.
  EXPECT_GT(it.v.front().x(), 0.0);
}

TEST(Initialize, AuxiliariesAreTight) {
  const Scenario sc = Scenario::moving_mission();
  const Iterate it = initialize_iterate(sc);
  const Mat3 d = sc.jitter.pair_sum_matrix();
  const double g2 = sc.aircraft.g * sc.aircraft.g;
  for (int k = 0; k < it.slots(); ++k) {
    EXPECT_DOUBLE_EQ(it.S[k], it.s[k].norm());
    EXPECT_DOUBLE_EQ(it.V[k], std::log(it.s[k].norm()));
    EXPECT_NEAR(it.U[k], std::sqrt(it.u[k].dot(d * it.u[k])) / it.S[k], 1e-15);
  }
  for (int k = 0; k + 1 < it.slots(); ++k) {
    EXPECT_NEAR(it.Q[k] * it.R[k], 1.0 + it.a[k].squaredNorm() / g2, 1e-14);
    EXPECT_NEAR(it.P[k], kinematics::flight_power(it.v[k], it.a[k], sc.aircraft), 1e-9);
  }
}

TEST(Initialize, RejectsInfeasibleMissions) {
  Scenario fast = Scenario::hover_mission();
  fast.aircraft.v_max = 4.0;
  try {
    initialize_iterate(fast);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("max_speed"), std::string::npos) << e.what();
  }
  Scenario far = Scenario::moving_mission();
  far.aircraft.v_max = 15.0;
  EXPECT_THROW(initialize_iterate(far), InfeasibleError);
  Scenario outside = Scenario::moving_mission();
  outside.destination = Vec3(700.0, 0.0, 600.0);
  EXPECT_THROW(initialize_iterate(outside), InfeasibleError);
  Scenario off_circle = Scenario::hover_mission();
  off_circle.circle.radius = 50.0;
  EXPECT_THROW(initialize_iterate(off_circle), InvalidTrajectory);
}

TEST(LogAnchor, UnitAnchor) {
  const channel::LogBound b = channel::log_bound(1.0);
  EXPECT_EQ(b.gamma_l, 1.0);
  EXPECT_EQ(b.nabla, 0.5);
  EXPECT_NEAR(b.delta, std::log(2.0), 1e-16);
}

TEST(LogAnchor, MatchesExpectedLogGamma) {
  std::mt19937_64 rng(11);
  Scenario sc = Scenario::moving_mission();
  sc.jitter = jitter::JitterCovariance::diagonal(0.1e-3, 1e-3, 0.1e-3);
  const Iterate it = make_iterate(random_feasible_positions(sc, rng), sc);
  for (int k = 0; k < it.slots(); ++k) {
    const double direct = channel::expected_log_gamma(sc.link, it.s[k].norm(),
                                                      jitter::hoyt_params(sc.jitter, it.u[k]));
    const channel::LogBound b = log_anchor(it, k);
    EXPECT_NEAR(std::log(b.gamma_l), direct, 1e-10);
    EXPECT_NEAR(b.nabla, b.gamma_l / (1.0 + b.gamma_l), 1e-15);
    EXPECT_NEAR(b.nabla * std::log(b.gamma_l) + b.delta, std::log1p(b.gamma_l), 1e-12);
  }
}

Vec3 pointing_at(const Vec3& s, const Vec3& v, const Vec3& a, double g) {
  return slot_pointing(s, v, a, g);
}


TEST(DeltaU, ZeroPerturbation) {
  const Scenario sc = Scenario::moving_mission();
  const Iterate it = initialize_iterate(sc);
  const PointingJacobian j = delta_u_coefficients(it, 10, sc.aircraft.g);
  EXPECT_EQ((j * Eigen::Matrix<double, 6, 1>::Zero()).norm(), 0.0);
}

TEST(DeltaU, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const Scenario sc = Scenario::moving_mission();
  const double g = sc.aircraft.g;
  const Iterate it = make_iterate(random_feasible_positions(sc, rng), sc);
  for (int k : {0, 17, 50, 98, 99}) {
    const PointingJacobian j = delta_u_coefficients(it, k, g);
    const Vec3 u0 = pointing_at(it.s[k], it.v[k], it.accel_at(k), g);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::Matrix<double, 6, 1> d;
      for (int i = 0; i < 6; ++i) d(i) = n01(rng);
      d *= 1e-6 / d.norm();
      const Vec3 diff = perturbed_pointing(it.s[k], it.v[k], it.accel_at(k), g, d) - u0;
      EXPECT_LE(((j * d) - diff).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(DeltaU, SecondOrderRemainderQuarters) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  const Scenario sc = Scenario::moving_mission();
  const double g = sc.aircraft.g;
  const Iterate it = make_iterate(random_feasible_positions(sc, rng, 10.0), sc);
  for (int k : {3, 40, 77}) {
    const PointingJacobian j = delta_u_coefficients(it, k, g);
    const Vec3 u0 = pointing_at(it.s[k], it.v[k], it.accel_at(k), g);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::Matrix<double, 6, 1> d;
      for (int i = 0; i < 6; ++i) d(i) = n01(rng);
      auto remainder = [&](double h) {
        const Eigen::Matrix<double, 6, 1> dh = d * (h / d.norm());
        return (perturbed_pointing(it.s[k], it.v[k], it.accel_at(k), g, dh) - u0 - j * dh).norm();
      };
      const double r1 = remainder(2e-3), r2 = remainder(1e-3);
      EXPECT_NEAR(r1 / r2, 4.0, 0.1);
    }
  }
}

TEST(DeltaU, StraightLineSparsity) {
  // v along x, a = 0: roll enters only through a_y, so the a_x column is
  // zero and the a_y column is the roll sensitivity.
  const Vec3 s(120.0, 200.0, 600.0), v(20.0, 0.0, 0.0), a(0.0, 0.0, 0.0);
  const double g = 9.8;
  const PointingJacobian j = pointing_jacobian(s, v, a, g);
  EXPECT_EQ(j.col(4).norm(), 0.0);
  EXPECT_GT(j.col(5).norm(), 1.0);
  const double h = 1e-6;
  const Vec3 droll = (kinematics::pointing_vector(s, Posture{h, 0.0, 0.0}) -
                      kinematics::pointing_vector(s, Posture{-h, 0.0, 0.0})) /
                     (2 * h);
  // tan(phi) = -a_y / g at v along x.
  EXPECT_LE((j.col(5) - droll * (-1.0 / g)).norm(), 1e-6);
  EXPECT_THROW(pointing_jacobian(s, Vec3::Zero(), a, g), DegenerateVelocity);
}

int census_total(const ConvexProgram& p) {
  int total = 0;
  for (const auto& [tag, count] : p.tag_census()) total += count;
  return total;
}

TEST(Assemble, ConstraintCensus) {
  for (int n : {10, 100, 400}) {
    Scenario sc = Scenario::moving_mission();
    sc.slots = n;
    sc.slot_length = 20.0 / n;
    const Iterate it = initialize_iterate(sc);
    const ConvexProgram p = assemble_subproblem(it, 1e-4, sc);
    EXPECT_EQ(census_total(p), 13 * n - 3) << "N = " << n;
    const auto c = p.tag_census();
    EXPECT_EQ(c.at("velocity_def"), n - 1);
    EXPECT_EQ(c.at("velocity_ext"), 1);
    EXPECT_EQ(c.at("accel_def"), n - 1);
    EXPECT_EQ(c.at("endpoint"), 4);
    for (const char* tag : {"max_accel", "max_speed", "min_speed_lin", "speed_aux",
                            "induced_power_cone", "flight_power"})
      EXPECT_EQ(c.at(tag), n - 1) << tag;
    for (const char* tag : {"range_aux", "jitter_aux", "jitter_sign", "log_range", "elevation"})
      EXPECT_EQ(c.at(tag), n) << tag;
  }
}


void expect_tight(const Iterate& it, const Scenario& sc, const AssemblyOptions& opt) {
  const ConvexProgram p = assemble_subproblem(it, 2e-4, sc, opt);
  const SubproblemLayout lay(it.slots());
  const VectorXd x = lay.pack(it);
  const auto report = convex::check_feasible(p, x, 1e-8);
  int min_speed = 0;
  for (const auto& e : report.entries) {
    if (restriction_tags().count(e.tag)) {
      EXPECT_NEAR(e.value, 0.0, 1e-8) << e.tag << " #" << e.index;
    } else if (e.tag == "min_speed_lin") {
      const double speed = it.v[min_speed++].norm();
      const double vmin = sc.aircraft.v_min;
      EXPECT_NEAR(e.value, vmin * vmin - speed * speed, 1e-8);
    } else {
      EXPECT_LE(e.value, 1e-8) << e.tag << " #" << e.index;
    }
  }
  EXPECT_TRUE(report.feasible);
}

TEST(Assemble, RestrictionsAreTightAtTheAnchor) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> sigma(0.05e-3, 1.5e-3);
  for (int trial = 0; trial < 12; ++trial) {
    Scenario sc = trial % 3 == 0 ? small_mission(40) : Scenario::moving_mission();
    sc.jitter = jitter::JitterCovariance::diagonal(sigma(rng), sigma(rng), sigma(rng));
    const Iterate it = make_iterate(random_feasible_positions(sc, rng), sc);
    AssemblyOptions opt;
    expect_tight(it, sc, opt);
    opt.linearized_power_cone = true;
    expect_tight(it, sc, opt);
  }
}

TEST(Assemble, ZeroJitterLeavesSignConstraintOnly) {
  Scenario sc = small_mission(20);
  sc.jitter = jitter::JitterCovariance{};
  const Iterate it = initialize_iterate(sc);
  for (double u : it.U) EXPECT_EQ(u, 0.0);
  const Totals t = iterate_totals(it, sc);
  const ConvexProgram p = assemble_subproblem(it, t.capacity / t.power, sc);
  const SubproblemLayout lay(it.slots());
  const VectorXd start = interior_start(it, sc);
  const convex::Solution sol = convex::solve(p, convex::SolverOptions{}, &start);
  ASSERT_EQ(sol.status, convex::Status::kOptimal);
  // U only costs nabla c5 U^2 in the objective; its optimal share of log Gamma
  // is negligible.
  const double c5 = 1.0 / (sc.link.sigma_div * sc.link.sigma_div);
  for (int k = 0; k < it.slots(); ++k) {
    const double u = sol.x(lay.jitter(k)) / kJitterScale;
    EXPECT_GE(u, -1e-12);
    EXPECT_LE(c5 * u * u, 1e-8);
  }
}

TEST(Assemble, RejectsCorrelatedJitter) {
  Scenario sc = small_mission(10);
  const Iterate it = initialize_iterate(sc);
  sc.jitter = jitter::JitterCovariance::uniform_correlation(1e-3, 1e-3, 1e-3, 0.3);
  EXPECT_THROW(assemble_subproblem(it, 1e-4, sc), UnsupportedOperation);
  EXPECT_THROW(optimize(sc, OptimizerConfig{}), UnsupportedOperation);
}

TEST(Assemble, SlowAnchorIsProjected) {
  Iterate it;
  it.v = {Vec3(1.0, 0.0, 0.0), Vec3(0.0, 2.0, 0.0)};
  AircraftParams ac;
  EXPECT_NEAR(guarded_velocity(it, 0, ac).norm(), ac.v_min, 1e-15);
  EXPECT_EQ(guarded_velocity(it, 1, ac), it.v[1]);
  it.v[0] = Vec3::Zero();
  EXPECT_THROW(guarded_velocity(it, 0, ac), DegenerateVelocity);
}

TEST(Surrogate, EqualsClosedFormAtTheAnchor) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Scenario sc = Scenario::moving_mission();
    const Iterate it = make_iterate(random_feasible_positions(sc, rng), sc);
    const Totals t = iterate_totals(it, sc);
    const EfficiencyBreakdown b = efficiency_breakdown(it.s, sc);
    EXPECT_NEAR(t.capacity, b.total_capacity, 1e-8);
    EXPECT_NEAR(t.power, b.total_power, 1e-8 * b.total_power);
  }
}

// max (1 - x^2) / (1 + x) on [0, 1] = max 1 - x, attained at x = 0.
FractionalValue toy_parametric(double lambda) {
  ConvexProgram p;
  const int x = p.variables.add("x", 1, 0.0, 1.0);
  p.objective.add_square(Affine::variable(x), 1.0);
  p.objective.linear = Affine::variable(x, lambda) + Affine(lambda - 1.0);
  const convex::Solution s = convex::solve(p, 1e-10);
  const double xv = s.x(x);
  return {s.objective, 1.0 - xv * xv, 1.0 + xv};
}

TEST(Dinkelbach, ToyFractionalProgram) {
  BisectionOptions opt;
  opt.lambda_min = 0.0;
  opt.lambda_max = 3.0;
  opt.tau_f = 1e-7;
  const BisectionResult r = dinkelbach_bisect(toy_parametric, opt);
  EXPECT_NEAR(r.lambda, 1.0, opt.tau_f);
  EXPECT_LE(std::abs(r.value.f), opt.tau_f);
  EXPECT_NEAR(r.lambda, r.value.numerator / r.value.denominator,
              10 * opt.tau_f / r.value.denominator);
}

TEST(Dinkelbach, ParametricValueIsNondecreasing) {
  double prev = -1e300;
  for (int i = 0; i <= 9; ++i) {
    const double f = toy_parametric(0.3 * i).f;
    EXPECT_GE(f, prev - 1e-9);
    prev = f;
  }
  const Scenario sc = small_mission(16);
  const Iterate it = initialize_iterate(sc);
  const Totals t = iterate_totals(it, sc);
  const VectorXd start = interior_start(it, sc);
  prev = -1e300;
  for (int i = 1; i <= 10; ++i) {
    const double lambda = 0.2 * i * t.capacity / t.power;
    const convex::Solution s =
        convex::solve(assemble_subproblem(it, lambda, sc), convex::SolverOptions{}, &start);
    ASSERT_EQ(s.status, convex::Status::kOptimal);
    EXPECT_GE(s.objective, prev - 1e-7 * std::abs(prev));
    prev = s.objective;
  }
}

TEST(Dinkelbach, BracketWithoutSignChange) {
  BisectionOptions opt;
  opt.lambda_max = 1.0;
  opt.max_doublings = 2;
  int calls = 0;
  auto always_negative = [&](double) {
    ++calls;
    return FractionalValue{-1.0, 1.0, 1.0};
  };
  try {
    dinkelbach_bisect(always_negative, opt);
    FAIL() << "expected BracketError";
  } catch (const BracketError& e) {
    EXPECT_EQ(e.f_low(), -1.0);
    EXPECT_EQ(e.f_high(), -1.0);
  }
  EXPECT_EQ(calls, 4);
  opt.lambda_min = 1.0;
  EXPECT_THROW(dinkelbach_bisect(always_negative, opt), Error);
}

TEST(Dinkelbach, DoublesTheUpperEnd) {
  BisectionOptions opt;
  opt.lambda_max = 0.5;
  opt.tau_f = 1e-9;
  const BisectionResult r =
      dinkelbach_bisect([](double l) { return FractionalValue{l - 3.0, 3.0, 1.0}; }, opt);
  EXPECT_EQ(r.lambda_max_used, 4.0);
  EXPECT_NEAR(r.lambda, 3.0, 1e-9);
}

TEST(Dinkelbach, SubproblemRootIdentity) {
  const Scenario sc = small_mission(24);
  const Iterate it = initialize_iterate(sc);
  OptimizerConfig cfg;
  const Totals t = iterate_totals(it, sc);
  const double tau_f = resolve_tau_f(cfg, t.capacity);
  const DinkelbachOutcome out = dinkelbach_solve(it, sc, cfg);
  EXPECT_LE(std::abs(out.f), tau_f);
  EXPECT_LE(std::abs(out.lambda - out.totals.capacity / out.totals.power) * out.totals.power,
            10 * tau_f);
  EXPECT_NEAR(-out.totals.capacity + out.lambda * out.totals.power, out.f, 1e-6 * tau_f);
  // The restriction is tight at the anchor, so the step cannot lose ratio.
  EXPECT_GE(out.lambda, t.capacity / t.power - 10 * tau_f / t.power);
  EXPECT_LE(physical_violations(out.next.s, sc).max_violation, 1e-6);
}

TEST(Efficiency, VanishesWithTransmitPower) {
  Scenario sc = Scenario::moving_mission();
  const Iterate it = initialize_iterate(sc);
  const double base = energy_efficiency(it.s, sc);
  sc.link.transmit_power = 1e-9;
  EXPECT_LT(energy_efficiency(it.s, sc), 1e-6 * base);
}

TEST(Efficiency, LaunchCostDominatesHover) {
  const Scenario sc = Scenario::hover_mission();
  const Iterate it = initialize_iterate(sc);
  const EfficiencyBreakdown b = efficiency_breakdown(it.s, sc);
  EXPECT_EQ(sc.launch_cost / sc.slot_length, 2e6);
  EXPECT_GT(sc.launch_cost / sc.slot_length, 0.9 * b.total_power);
}

TEST(Efficiency, RejectsInfeasiblePlans) {
  const Scenario sc = Scenario::moving_mission();
  auto s = initialize_iterate(sc).s;
  s[50].y() += 30.0;
  EXPECT_THROW(energy_efficiency(s, sc), InfeasibleError);
}

TEST(Efficiency, ClosedFormAgreesWithMonteCarlo) {
  const Scenario sc = Scenario::moving_mission();
  const Iterate it = initialize_iterate(sc);
  const double closed = energy_efficiency(it.s, sc);
  EfficiencyOptions mc;
  mc.mode = EfficiencyMode::kMonteCarlo;
  mc.samples = 200000;
  mc.seed = 9;
  EXPECT_NEAR(energy_efficiency(it.s, sc, mc), closed, 0.01 * closed);
}

TEST(VariableChange, ZeroForSameIterateAndWrapsYaw) {
  const Scenario sc = Scenario::moving_mission();
  const Iterate it = initialize_iterate(sc);
  EXPECT_EQ(variable_change(it, it), 0.0);
  Iterate turned = it;
  turned.posture[0].yaw += 2.0 * std::numbers::pi;
  EXPECT_NEAR(variable_change(it, turned), 0.0, 1e-12);
}

TEST(Optimize, ImprovesAndStaysFeasible) {
  const Scenario sc = small_mission(30);
  OptimizerConfig cfg;
  cfg.max_outer = 15;
  std::vector<HistoryRecord> seen;
  const OptimizeResult r = optimize(sc, cfg, [&](const HistoryRecord& h) { seen.push_back(h); });
  ASSERT_GE(r.history.size(), 2u);
  EXPECT_EQ(seen.size(), r.history.size());
  EXPECT_GE(r.final_efficiency(), r.initial_efficiency());
  for (std::size_t p = 1; p < r.history.size(); ++p) {
    EXPECT_LE(r.history[p].max_violation, 1e-6);
    EXPECT_GE(r.history[p].efficiency, r.history[p - 1].efficiency * (1 - 1e-3));
  }
  EXPECT_LE((r.iterate.s.front() - sc.origin).norm(), 1e-6);
  EXPECT_LE((r.iterate.s.back() - sc.destination).norm(), 1e-6);
  if (r.converged) EXPECT_LT(r.history.back().change, cfg.tau_v);
}

TEST(Optimize, RejectsBadConfig) {
  OptimizerConfig cfg;
  cfg.tau_v = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = OptimizerConfig{};
  cfg.lambda_min = 2.0;
  cfg.lambda_max = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace fsouav::sca
