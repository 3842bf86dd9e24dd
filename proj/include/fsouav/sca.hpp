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

// Energy-efficient trajectory design by successive convex approximation.
//
// Each outer iteration anchors a convex restriction of the efficiency
// problem at the current trajectory and solves it for the best ratio
// C_tot / P_tot with a Dinkelbach bisection on lambda, where every inner step
// minimizes F(lambda) = -C_tot + lambda P_tot over the restriction.
//
// Subproblem variables per slot k (N slots): position s, velocity v, range
// bound S, jitter bound U (in mrad), log range V; per transition (N-1): the
// acceleration a and the power auxiliaries P, Q, R.

#ifndef FSOUAV_SCA_HPP_
#define FSOUAV_SCA_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "fsouav/channel.hpp"
#include "fsouav/convex.hpp"
#include "fsouav/errors.hpp"
#include "fsouav/jitter.hpp"
#include "fsouav/kinematics.hpp"
#include "fsouav/linalg3.hpp"

namespace fsouav::sca {

using convex::Affine;
using convex::Constraint;
using convex::ConvexProgram;
using Eigen::VectorXd;
using kinematics::AircraftParams;
using kinematics::Posture;
using kinematics::TrajectoryPlan;

// Scale of the U block: the program stores 1e3 * U, i.e. milliradians.
inline constexpr double kJitterScale = 1e3;
// Q and R enter the subproblem as Q * kSpeedScale and R / kSpeedScale.
inline constexpr double kSpeedScale = 10.0;

enum class InitKind { kLinear, kCircular };

struct CircularInit {
  Vec3 center = Vec3(0.0, -60.0, 600.0);
  double radius = 60.0;
  bool clockwise = true;
};

struct Scenario {
  Vec3 origin = Vec3(54.0, 200.0, 600.0);
  Vec3 destination = Vec3(450.0, 200.0, 600.0);
  int slots = 100;
  double slot_length = 0.2;  // s
  double altitude = 600.0;   // m
  double launch_cost = 1e5;  // J
  double min_elevation = std::numbers::pi / 4;
  channel::LinkParams link;
  AircraftParams aircraft;
  jitter::JitterCovariance jitter =
      jitter::JitterCovariance::diagonal(0.583e-3, 0.583e-3, 0.583e-3);
  InitKind init = InitKind::kLinear;
  CircularInit circle;

  // Largest horizontal distance from the GS allowed by the elevation bound.
  double horizontal_limit() const { return altitude / std::tan(min_elevation); }

  void validate() const {
    if (slots < 2) throw InvalidTrajectory("scenario needs at least 2 slots");
    if (!(slot_length > 0.0)) throw InvalidTrajectory("slot length must be positive");
    if (!(altitude > 0.0)) throw InvalidTrajectory("altitude must be positive");
    if (origin.z() != altitude || destination.z() != altitude)
      throw InvalidTrajectory("mission endpoints must lie at the flight altitude");
    if (!(launch_cost >= 0.0)) throw InvalidTrajectory("launch cost must be non-negative");
    if (!(min_elevation >= std::numbers::pi / 4 - 1e-12 &&
          min_elevation < std::numbers::pi / 2))
      throw InvalidTrajectory("minimum elevation must lie in [pi/4, pi/2)");
    link.validate();
    aircraft.validate();
    jitter.validate();
    if (init == InitKind::kCircular) {
      if (!(circle.radius > 0.0)) throw InvalidTrajectory("circle radius must be positive");
      if (circle.center.z() != altitude)
        throw InvalidTrajectory("circle centre must lie at the flight altitude");
    }
  }

  double duration() const { return slots * slot_length; }

  static Scenario moving_mission() { return Scenario{}; }

  static Scenario hover_mission() {
    Scenario s;
    s.origin = Vec3(0.0, 0.0, 600.0);
    s.destination = s.origin;
    s.slots = 400;
    s.launch_cost = 4e5;
    s.init = InitKind::kCircular;
    return s;
  }
};

struct OptimizerConfig {
  double tau_v = 1e-2;            // outer stop on the combined variable change
  double tau_f = 0.0;             // Dinkelbach stop; 0 selects tau_f_relative
  double tau_f_relative = 1e-4;   // times C_tot at initialization
  double lambda_min = 0.0;
  double lambda_max = 0.0;        // 0 selects 2 C_tot / P_tot at initialization
  int max_outer = 50;
  int max_inner = 40;
  int max_bracket_doublings = 4;
  bool linearized_power_cone = false;
  double solver_tol = 1e-7;
  int solver_max_iterations = 200;

  void validate() const {
    if (!(tau_v > 0.0)) throw Error("tau_v must be positive");
    if (!(tau_f >= 0.0)) throw Error("tau_f must be non-negative");
    if (!(tau_f_relative > 0.0)) throw Error("relative tau_f must be positive");
    if (!(lambda_min >= 0.0)) throw Error("lambda_min must be non-negative");
    if (lambda_max != 0.0 && !(lambda_max > lambda_min))
      throw Error("need lambda_min < lambda_max");
    if (max_outer < 1 || max_inner < 1) throw Error("iteration caps must be positive");
    if (max_bracket_doublings < 0) throw Error("bracket doublings must be non-negative");
    if (!(solver_tol > 0.0)) throw Error("solver tolerance must be positive");
  }
};

// Trajectory plus the auxiliaries at their tight values and the log anchor
// of every slot.
struct Iterate {
  std::vector<Vec3> s, v;                 // N
  std::vector<Vec3> a;                    // N - 1
  std::vector<Vec3> u;                    // N pointing vectors
  std::vector<Posture> posture;           // N
  std::vector<double> S, U, V;            // N, U in rad
  std::vector<double> P, Q, R;            // N - 1
  std::vector<channel::LogBound> anchor;  // N

  int slots() const { return static_cast<int>(s.size()); }
  const Vec3& accel_at(int k) const { return a[std::min<std::size_t>(k, a.size() - 1)]; }

  TrajectoryPlan plan(double slot_length, double altitude) const {
    return TrajectoryPlan(s, slot_length, altitude);
  }
};

// û of a slot as a function of its own motion: yaw from v, roll from (v, a),
// zero pitch.
inline Vec3 slot_pointing(const Vec3& s, const Vec3& v, const Vec3& a, double g) {
  return kinematics::pointing_vector(s, kinematics::slot_posture(v, a, g));
}

// log Gamma_L = c3 - c4 |s| - c5 U^2 - c6 V with c4 = 2 sigma_B,
// c5 = 1 / sigma_div^2, c6 = 2.
inline double anchor_log_gamma(const channel::LinkParams& link, double range, double u,
                               double v) {
  const double c5 = 1.0 / (link.sigma_div * link.sigma_div);
  return channel::log_gain_constant(link) - 2.0 * link.sigma_b() * range - c5 * u * u - 2.0 * v;
}

inline Iterate make_iterate(const std::vector<Vec3>& positions, const Scenario& sc) {
  const TrajectoryPlan plan(positions, sc.slot_length, sc.altitude);
  const auto d = kinematics::differentiate_trajectory(plan);
  const int n = static_cast<int>(positions.size());
  const AircraftParams& ac = sc.aircraft;
  const Mat3 dm = sc.jitter.pair_sum_matrix();
  Iterate it;
  it.s = positions;
  it.v = d.velocities;
  it.a = d.accelerations;
  for (int k = 0; k < n; ++k) {
    const Vec3& v = it.v[k];
    if (!(v.norm() > 0.0))
      throw DegenerateVelocity("zero velocity at slot " + std::to_string(k));
    const Posture p = kinematics::slot_posture(v, it.accel_at(k), ac.g);
    const Vec3 u = kinematics::pointing_vector(it.s[k], p);
    const double range = it.s[k].norm();
    it.posture.push_back(p);
    it.u.push_back(u);
    it.S.push_back(range);
    it.U.push_back(std::sqrt(std::max(0.0, u.dot(dm * u))) / range);
    it.V.push_back(std::log(range));
    it.anchor.push_back(
        channel::log_bound_from_log(anchor_log_gamma(sc.link, range, it.U.back(), it.V.back())));
  }
  for (int k = 0; k + 1 < n; ++k) {
    const double speed = it.v[k].norm();
    const double g2 = ac.g * ac.g;
    it.R.push_back(speed);
    it.Q.push_back((1.0 + it.a[k].squaredNorm() / g2) / speed);
    it.P.push_back(ac.c1 * speed * speed * speed + ac.c2 * it.Q.back());
  }
  return it;
}

// Physical constraints of the original problem: speed and acceleration
// limits, endpoints and elevation. Altitude holds by construction of the plan.
inline convex::FeasibilityReport physical_violations(const std::vector<Vec3>& s,
                                                     const Scenario& sc) {
  const TrajectoryPlan plan(s, sc.slot_length, sc.altitude);
  const auto d = kinematics::differentiate_trajectory(plan);
  convex::FeasibilityReport r;
  auto record = [&](const char* tag, int k, double v) {
    r.entries.push_back({tag, k, v});
    r.max_violation = std::max(r.max_violation, v);
  };
  const AircraftParams& ac = sc.aircraft;
  for (int k = 0; k < static_cast<int>(d.velocities.size()); ++k) {
    const double speed = d.velocities[k].norm();
    record("min_speed", k, ac.v_min - speed);
    record("max_speed", k, speed - ac.v_max);
  }
  for (int k = 0; k < static_cast<int>(d.accelerations.size()); ++k)
    record("max_accel", k, d.accelerations[k].norm() - ac.a_max);
  const double limit = sc.horizontal_limit();
  for (int k = 0; k < static_cast<int>(s.size()); ++k)
    record("elevation", k, s[k].head<2>().norm() - limit);
  record("endpoint", 0, (s.front() - sc.origin).norm());
  record("endpoint", static_cast<int>(s.size()) - 1, (s.back() - sc.destination).norm());
  r.feasible = r.max_violation <= 0.0;
  return r;
}

inline std::string describe_worst(const convex::FeasibilityReport& r) {
  const auto it = std::max_element(r.entries.begin(), r.entries.end(),
                                   [](const auto& l, const auto& h) { return l.value < h.value; });
  if (it == r.entries.end()) return "none";
  return it->tag + " at slot " + std::to_string(it->index) + " (violation " +
         std::to_string(it->value) + ")";
}

inline std::vector<Vec3> initial_positions(const Scenario& sc) {
  const int n = sc.slots;
  std::vector<Vec3> s(n);
  if (sc.init == InitKind::kLinear) {
    for (int k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / (n - 1);
      s[k] = sc.origin + t * (sc.destination - sc.origin);
      s[k].z() = sc.altitude;
    }
    s.back() = sc.destination;
    return s;
  }
  const Vec3 rel = sc.origin - sc.circle.center;
  const double r0 = rel.head<2>().norm();
  if (std::abs(r0 - sc.circle.radius) > 1e-9 * sc.circle.radius)
    throw InvalidTrajectory("circular initialization must pass through the origin point");
  const double start = std::atan2(rel.y(), rel.x());
  const double dir = sc.circle.clockwise ? -1.0 : 1.0;
  for (int k = 0; k < n; ++k) {
    const double ang = start + dir * 2.0 * std::numbers::pi * k / (n - 1);
    s[k] = Vec3(sc.circle.center.x() + sc.circle.radius * std::cos(ang),
                sc.circle.center.y() + sc.circle.radius * std::sin(ang), sc.altitude);
  }
  s.front() = sc.origin;
  s.back() = sc.origin;
  return s;
}

// Rejects missions that no trajectory can serve.
inline void check_mission_reachable(const Scenario& sc) {
  const double gap = (sc.destination - sc.origin).norm();
  const double reach = sc.aircraft.v_max * (sc.slots - 1) * sc.slot_length;
  if (gap > reach)
    throw InfeasibleError("endpoints are " + std::to_string(gap) + " m apart but at most " +
                          std::to_string(reach) + " m is reachable at v_max");
  const double limit = sc.horizontal_limit();
  if (sc.origin.head<2>().norm() > limit || sc.destination.head<2>().norm() > limit)
    throw InfeasibleError("an endpoint violates the elevation bound");
}

inline Iterate initialize_iterate(const Scenario& sc) {
  sc.validate();
  check_mission_reachable(sc);
  const auto s = initial_positions(sc);
  const auto report = physical_violations(s, sc);
  if (report.max_violation > 1e-9)
    throw InfeasibleError("initial trajectory violates " + describe_worst(report));
  return make_iterate(s, sc);
}

inline channel::LogBound log_anchor(const Iterate& it, int k) { return it.anchor.at(k); }

// Jacobian of û(s, v, a) with respect to (s_x, s_y, v_x, v_y, a_x, a_y) for
// û = -R_x(-phi) R_z(-theta) s, theta = atan2(v_y, v_x) and
// phi = atan((v_y a_x - v_x a_y) / (g |v|)).
using PointingJacobian = Eigen::Matrix<double, 3, 6>;

inline PointingJacobian pointing_jacobian(const Vec3& s, const Vec3& v, const Vec3& a,
                                          double g) {
  using kinematics::Axis;
  using kinematics::rotation_matrix;
  const double speed2 = v.x() * v.x() + v.y() * v.y();
  if (!(speed2 > 0.0)) throw DegenerateVelocity("pointing Jacobian needs nonzero velocity");
  const double speed = std::sqrt(speed2);
  const double theta = std::atan2(v.y(), v.x());
  const double w = (v.y() * a.x() - v.x() * a.y()) / (g * speed);
  const double phi = std::atan(w);
  Mat3 kx, kz;
  kx << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  kz << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  const Mat3 rx = rotation_matrix(Axis::kX, -phi);
  const Mat3 rz = rotation_matrix(Axis::kZ, -theta);
  const Mat3 rot = rx * rz;
  const Vec3 du_dphi = rx * kx * rz * s;
  const Vec3 du_dtheta = rot * kz * s;
  const double dphi_dw = 1.0 / (1.0 + w * w);
  const double gv = g * speed;
  const double dw_dvx = -a.y() / gv - w * v.x() / speed2;
  const double dw_dvy = a.x() / gv - w * v.y() / speed2;
  const double dw_dax = v.y() / gv;
  const double dw_day = -v.x() / gv;
  PointingJacobian j;
  j.col(0) = -rot.col(0);
  j.col(1) = -rot.col(1);
  j.col(2) = du_dtheta * (-v.y() / speed2) + du_dphi * dphi_dw * dw_dvx;
  j.col(3) = du_dtheta * (v.x() / speed2) + du_dphi * dphi_dw * dw_dvy;
  j.col(4) = du_dphi * dphi_dw * dw_dax;
  j.col(5) = du_dphi * dphi_dw * dw_day;
  return j;
}

inline PointingJacobian delta_u_coefficients(const Iterate& it, int k, double g) {
  return pointing_jacobian(it.s.at(k), it.v.at(k), it.accel_at(k), g);
}

// Index map of the subproblem variables.
class SubproblemLayout {
 public:
  explicit SubproblemLayout(int slots) : n_(slots) {
    if (slots < 2) throw InvalidTrajectory("subproblem needs at least 2 slots");
    const int m = slots - 1;
    sx_ = space_.add("sx", n_);
    sy_ = space_.add("sy", n_);
    vx_ = space_.add("vx", n_);
    vy_ = space_.add("vy", n_);
    ax_ = space_.add("ax", m);
    ay_ = space_.add("ay", m);
    s_ = space_.add("S", n_);
    u_ = space_.add("U", n_);
    v_ = space_.add("V", n_);
    p_ = space_.add("P", m);
    q_ = space_.add("Q", m);
    r_ = space_.add("R", m);
  }

  int slots() const { return n_; }
  const convex::VariableSpace& space() const { return space_; }
  int dimension() const { return space_.dimension(); }

  int sx(int k) const { return sx_ + k; }
  int sy(int k) const { return sy_ + k; }
  int vx(int k) const { return vx_ + k; }
  int vy(int k) const { return vy_ + k; }
  int ax(int k) const { return ax_ + k; }
  int ay(int k) const { return ay_ + k; }
  int range(int k) const { return s_ + k; }
  int jitter(int k) const { return u_ + k; }
  int log_range(int k) const { return v_ + k; }
  int power(int k) const { return p_ + k; }
  int q(int k) const { return q_ + k; }
  int r(int k) const { return r_ + k; }

  VectorXd pack(const Iterate& it) const {
    VectorXd x = VectorXd::Zero(dimension());
    for (int k = 0; k < n_; ++k) {
      x(sx(k)) = it.s[k].x();
      x(sy(k)) = it.s[k].y();
      x(vx(k)) = it.v[k].x();
      x(vy(k)) = it.v[k].y();
      x(range(k)) = it.S[k];
      x(jitter(k)) = kJitterScale * it.U[k];
      x(log_range(k)) = it.V[k];
    }
    for (int k = 0; k + 1 < n_; ++k) {
      x(ax(k)) = it.a[k].x();
      x(ay(k)) = it.a[k].y();
      x(power(k)) = it.P[k];
      x(q(k)) = kSpeedScale * it.Q[k];
      x(r(k)) = it.R[k] / kSpeedScale;
    }
    return x;
  }

  std::vector<Vec3> positions(const VectorXd& x, double altitude) const {
    std::vector<Vec3> s(n_);
    for (int k = 0; k < n_; ++k) s[k] = Vec3(x(sx(k)), x(sy(k)), altitude);
    return s;
  }

 private:
  int n_;
  convex::VariableSpace space_;
  int sx_, sy_, vx_, vy_, ax_, ay_, s_, u_, v_, p_, q_, r_;
};

struct Totals {
  double capacity = 0.0;  // C_tot, bits per channel use summed over slots
  double power = 0.0;     // P_tot
};

// Surrogate C_tot and P_tot of a subproblem point under the anchors of `it`.
inline Totals surrogate_totals(const SubproblemLayout& lay, const VectorXd& x, const Iterate& it,
                               const Scenario& sc) {
  Totals t;
  const double c3 = channel::log_gain_constant(sc.link);
  const double c4 = 2.0 * sc.link.sigma_b();
  const double c5 = 1.0 / (sc.link.sigma_div * sc.link.sigma_div);
  for (int k = 0; k < lay.slots(); ++k) {
    const double range = Vec3(x(lay.sx(k)), x(lay.sy(k)), sc.altitude).norm();
    const double u = x(lay.jitter(k)) / kJitterScale;
    const auto& b = it.anchor[k];
    t.capacity += b.nabla * (c3 - c4 * range - c5 * u * u - 2.0 * x(lay.log_range(k))) + b.delta;
  }
  t.capacity /= 2.0 * std::numbers::ln2;
  for (int k = 0; k + 1 < lay.slots(); ++k) t.power += x(lay.power(k));
  t.power += lay.slots() * sc.link.transmit_power + sc.launch_cost / sc.slot_length;
  return t;
}

struct AssemblyOptions {
  bool linearized_power_cone = false;
};

// Velocity used for linearization; slots slower than v_min / 2 are projected
// onto the v_min sphere.
inline Vec3 guarded_velocity(const Iterate& it, int k, const AircraftParams& ac) {
  Vec3 v = it.v[k];
  const double speed = v.norm();
  if (!(speed > 0.0)) throw DegenerateVelocity("zero anchor velocity at slot " + std::to_string(k));
  if (speed < 0.5 * ac.v_min) v *= ac.v_min / speed;
  return v;
}

inline ConvexProgram assemble_subproblem(const Iterate& it, double lambda, const Scenario& sc,
                                         const AssemblyOptions& opt = {}) {
  const int n = it.slots();
  if (n != sc.slots) throw InvalidTrajectory("iterate and scenario slot counts differ");
  if (!sc.jitter.is_diagonal())
    throw UnsupportedOperation("trajectory optimization requires uncorrelated jitter");
  const SubproblemLayout lay(n);
  ConvexProgram prog;
  prog.variables = lay.space();
  const AircraftParams& ac = sc.aircraft;
  const double dt = sc.slot_length;
  const double h = sc.altitude;
  auto var = [](int i) { return Affine::variable(i); };

  for (int k = 0; k + 1 < n; ++k) {
    prog.add(Constraint::equal(
        {dt * var(lay.vx(k)) - var(lay.sx(k + 1)) + var(lay.sx(k)),
         dt * var(lay.vy(k)) - var(lay.sy(k + 1)) + var(lay.sy(k))},
        "velocity_def"));
  }
  prog.add(Constraint::equal({var(lay.vx(n - 1)) - var(lay.vx(n - 2)),
                              var(lay.vy(n - 1)) - var(lay.vy(n - 2))},
                             "velocity_ext"));
  for (int k = 0; k + 1 < n; ++k) {
    prog.add(Constraint::equal(
        {dt * var(lay.ax(k)) - var(lay.vx(k + 1)) + var(lay.vx(k)),
         dt * var(lay.ay(k)) - var(lay.vy(k + 1)) + var(lay.vy(k))},
        "accel_def"));
  }
  prog.add(Constraint::equal(var(lay.sx(0)) - Affine(sc.origin.x()), "endpoint"));
  prog.add(Constraint::equal(var(lay.sy(0)) - Affine(sc.origin.y()), "endpoint"));
  prog.add(Constraint::equal(var(lay.sx(n - 1)) - Affine(sc.destination.x()), "endpoint"));
  prog.add(Constraint::equal(var(lay.sy(n - 1)) - Affine(sc.destination.y()), "endpoint"));

  for (int k = 0; k + 1 < n; ++k) {
    prog.add(Constraint::soc({var(lay.ax(k)), var(lay.ay(k))}, Affine(ac.a_max), "max_accel"));
    prog.add(Constraint::soc({var(lay.vx(k)), var(lay.vy(k))}, Affine(ac.v_max), "max_speed"));
    const Vec3 vp = guarded_velocity(it, k, ac);
    // 2 v_p . v - |v_p|^2, the tangent of |v|^2 at v_p.
    const Affine speed_tangent = 2.0 * vp.x() * var(lay.vx(k)) + 2.0 * vp.y() * var(lay.vy(k)) -
                                 Affine(vp.head<2>().squaredNorm());
    prog.add(Constraint::less_equal(Affine(ac.v_min * ac.v_min) - speed_tangent,
                                    "min_speed_lin"));
    prog.add(Constraint::squared_norm({var(lay.r(k))}, (1.0 / (kSpeedScale * kSpeedScale)) * speed_tangent,
                                      "speed_aux"));
    const Affine qv = var(lay.q(k)), rv = var(lay.r(k));
    if (opt.linearized_power_cone) {
      const double qr = kSpeedScale * it.Q[k] + it.R[k] / kSpeedScale;
      const Affine l = 0.5 * qr * (qv + rv);
      prog.add(Constraint::soc({qv - rv, Affine(qr), l - Affine(1.0), Affine(2.0),
                                (2.0 / ac.g) * var(lay.ax(k)), (2.0 / ac.g) * var(lay.ay(k))},
                               l + Affine(1.0), "induced_power_cone"));
    } else {
      prog.add(Constraint::soc({Affine(2.0), (2.0 / ac.g) * var(lay.ax(k)),
                                (2.0 / ac.g) * var(lay.ay(k)), qv - rv},
                               qv + rv, "induced_power_cone"));
    }
    prog.add(Constraint::cubic_norm({var(lay.vx(k)), var(lay.vy(k))}, ac.c1,
                                    var(lay.power(k)) - (ac.c2 / kSpeedScale) * qv,
                                    "flight_power"));
  }

  const Mat3 dm = sc.jitter.pair_sum_matrix();
  const bool no_jitter = dm.diagonal().maxCoeff() <= 0.0;
  const double limit = sc.horizontal_limit();
  for (int k = 0; k < n; ++k) {
    const Vec3& sp = it.s[k];
    const Affine sx = var(lay.sx(k)), sy = var(lay.sy(k));
    // 2 s_p . s - |s_p|^2 with s_z = H fixed.
    const Affine range_tangent = 2.0 * sp.x() * sx + 2.0 * sp.y() * sy +
                                 Affine(2.0 * h * h - sp.squaredNorm());
    prog.add(Constraint::squared_norm({var(lay.range(k))}, range_tangent, "range_aux"));

    const Affine uvar = var(lay.jitter(k));
    if (no_jitter) {
      prog.add(Constraint::less_equal(-1.0 * uvar, "jitter_aux"));
    } else {
      const int ka = std::min(k, n - 2);
      const Vec3 vp = guarded_velocity(it, k, ac);
      const Vec3& ap = it.accel_at(k);
      const Vec3 up = slot_pointing(sp, vp, ap, ac.g);
      const double r0 = std::sqrt(up.dot(dm * up));
      const PointingJacobian jac = pointing_jacobian(sp, vp, ap, ac.g);
      const Eigen::Matrix<double, 1, 6> grad = (dm * up).transpose() * jac / r0;
      const double base[6] = {sp.x(), sp.y(), vp.x(), vp.y(), ap.x(), ap.y()};
      const int idx[6] = {lay.sx(k), lay.sy(k), lay.vx(k), lay.vy(k), lay.ax(ka), lay.ay(ka)};
      Affine rhs(r0);
      for (int i = 0; i < 6; ++i) rhs += grad(i) * (var(idx[i]) - Affine(base[i]));
      const double s0 = it.S[k];
      const double u0 = kJitterScale * it.U[k];
      const Affine lhs = s0 * uvar + u0 * var(lay.range(k)) - Affine(s0 * u0);
      prog.add(Constraint::less_equal(kJitterScale * rhs - lhs, "jitter_aux"));
    }
    prog.add(Constraint::less_equal(-1.0 * uvar, "jitter_sign"));
    prog.add(Constraint::log_norm({sx, sy, Affine(h)}, var(lay.log_range(k)), "log_range"));
    prog.add(Constraint::soc({sx, sy}, Affine(limit), "elevation"));
  }

  // F = -C_tot + lambda P_tot.
  const double norm2 = 2.0 * std::numbers::ln2;
  const double c3 = channel::log_gain_constant(sc.link);
  const double c4 = 2.0 * sc.link.sigma_b();
  const double c5 = 1.0 / (sc.link.sigma_div * sc.link.sigma_div);
  convex::Objective& f = prog.objective;
  double constant = lambda * (n * sc.link.transmit_power + sc.launch_cost / dt);
  for (int k = 0; k < n; ++k) {
    const auto& b = it.anchor[k];
    constant -= (b.nabla * c3 + b.delta) / norm2;
    f.linear.add(lay.log_range(k), 2.0 * b.nabla / norm2);
    f.add_norm({var(lay.sx(k)), var(lay.sy(k)), Affine(h)}, b.nabla * c4 / norm2);
    f.add_square(var(lay.jitter(k)), b.nabla * c5 / (kJitterScale * kJitterScale) / norm2);
  }
  for (int k = 0; k + 1 < n; ++k) f.linear.add(lay.power(k), lambda);
  f.linear.constant = constant;
  return prog;
}

// Strictly interior point of the subproblem anchored at `it`: the anchor
// trajectory with every auxiliary moved off its tight value by a relative
// margin `eps`.
inline VectorXd interior_start(const Iterate& it, const Scenario& sc, double eps = 1e-3) {
  const SubproblemLayout lay(it.slots());
  VectorXd x = lay.pack(it);
  const AircraftParams& ac = sc.aircraft;
  for (int k = 0; k < it.slots(); ++k) {
    x(lay.range(k)) *= 1.0 - eps;
    x(lay.jitter(k)) = x(lay.jitter(k)) * (1.0 + 2.0 * eps) + eps;
    x(lay.log_range(k)) += eps;
  }
  for (int k = 0; k + 1 < it.slots(); ++k) {
    x(lay.r(k)) *= 1.0 - eps;
    x(lay.q(k)) = (1.0 + it.a[k].squaredNorm() / (ac.g * ac.g)) / x(lay.r(k)) * (1.0 + eps);
    const double speed = it.v[k].norm();
    const double p = ac.c1 * speed * speed * speed + ac.c2 / kSpeedScale * x(lay.q(k));
    x(lay.power(k)) = p + eps * (1.0 + p);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Dinkelbach bisection

struct FractionalValue {
  double f = 0.0;            // min of -numerator + lambda denominator
  double numerator = 0.0;    // at the minimizer
  double denominator = 0.0;  // at the minimizer
};

struct BisectionOptions {
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  double tau_f = 1e-6;
  int max_iterations = 40;
  int max_doublings = 4;
  // Known upper bound on F(lambda_min). When negative the lower end is not
  // evaluated; at lambda = 0 the parametric problem may have no minimizer.
  double f_min_upper_bound = std::numeric_limits<double>::quiet_NaN();
};

struct BisectionResult {
  double lambda = 0.0;
  FractionalValue value;
  int evaluations = 0;
  double lambda_max_used = 0.0;
  std::vector<std::pair<double, double>> trace;  // (lambda, F)
};

// Root of the nondecreasing F(lambda) by bisection. `eval(lambda)` minimizes
// the parametric problem and is always called last at the returned lambda.
inline BisectionResult dinkelbach_bisect(const std::function<FractionalValue(double)>& eval,
                                         const BisectionOptions& opt) {
  if (!(opt.lambda_min < opt.lambda_max)) throw Error("need lambda_min < lambda_max");
  BisectionResult out;
  auto run = [&](double lambda) {
    const FractionalValue v = eval(lambda);
    ++out.evaluations;
    out.trace.emplace_back(lambda, v.f);
    out.lambda = lambda;
    out.value = v;
    return v;
  };
  double lo = opt.lambda_min, hi = opt.lambda_max;
  double f_lo;
  if (opt.f_min_upper_bound < -opt.tau_f) {
    f_lo = opt.f_min_upper_bound;
  } else {
    f_lo = run(lo).f;
    if (std::abs(f_lo) <= opt.tau_f) return out;
  }
  double f_hi = run(hi).f;
  for (int d = 0; d < opt.max_doublings && f_hi < -opt.tau_f; ++d) {
    lo = hi;
    hi *= 2.0;
    f_hi = run(hi).f;
  }
  out.lambda_max_used = hi;
  if (std::abs(f_hi) <= opt.tau_f) return out;
  if (!(f_lo < 0.0 && f_hi > 0.0))
    throw BracketError("Dinkelbach bracket has no sign change: F(lambda_min) = " +
                           std::to_string(f_lo) + ", F(lambda_max) = " + std::to_string(f_hi),
                       f_lo, f_hi);
  double lambda = 0.5 * (lo + hi);
  for (int i = 0; i < opt.max_iterations; ++i) {
    const double f = run(lambda).f;
    if (std::abs(f) <= opt.tau_f) return out;
    if (f > 0.0)
      hi = lambda;
    else
      lo = lambda;
    lambda = 0.5 * (lo + hi);
  }
  throw SolverError("Dinkelbach bisection did not reach |F| <= tau_f in " +
                    std::to_string(opt.max_iterations) + " steps (last F = " +
                    std::to_string(out.value.f) + ")");
}

struct DinkelbachOutcome {
  Iterate next;
  VectorXd x;  // subproblem solution at lambda*
  double lambda = 0.0;
  double f = 0.0;
  Totals totals;  // surrogate totals at x
  int evaluations = 0;
  int solver_iterations = 0;
  std::vector<std::pair<double, double>> trace;
};

inline Totals iterate_totals(const Iterate& it, const Scenario& sc) {
  const SubproblemLayout lay(it.slots());
  return surrogate_totals(lay, lay.pack(it), it, sc);
}

inline double resolve_tau_f(const OptimizerConfig& cfg, double c_tot_init) {
  return cfg.tau_f > 0.0 ? cfg.tau_f : cfg.tau_f_relative * std::abs(c_tot_init);
}

// One SCA step: Dinkelbach bisection over subproblems anchored at `it`.
// `tau_f` and the bracket come from `cfg`, with zero entries resolved against
// `it` itself.
inline DinkelbachOutcome dinkelbach_solve(const Iterate& it, const Scenario& sc,
                                          const OptimizerConfig& cfg) {
  cfg.validate();
  const Totals here = iterate_totals(it, sc);
  const SubproblemLayout lay(it.slots());
  convex::SolverOptions sopt;
  sopt.tol = cfg.solver_tol;
  sopt.max_iterations = cfg.solver_max_iterations;
  AssemblyOptions aopt;
  aopt.linearized_power_cone = cfg.linearized_power_cone;

  VectorXd start = interior_start(it, sc);
  bool have_start = false;
  DinkelbachOutcome out;
  VectorXd last_x;
  auto eval = [&](double lambda) {
    const ConvexProgram prog = assemble_subproblem(it, lambda, sc, aopt);
    const convex::Solution sol = convex::solve(prog, sopt, &start);
    out.solver_iterations += sol.iterations + sol.phase1_iterations;
    if (sol.status == convex::Status::kInfeasible)
      throw InfeasibleError("subproblem infeasible (certificate " +
                            std::to_string(sol.infeasibility_certificate) + ")");
    if (sol.status != convex::Status::kOptimal)
      throw SolverError("subproblem solve stopped with status " +
                        std::string(convex::status_name(sol.status)) + " at lambda " +
                        std::to_string(lambda));
    if (!have_start) {
      start = sol.start;
      have_start = true;
    }
    last_x = sol.x;
    const Totals t = surrogate_totals(lay, sol.x, it, sc);
    return FractionalValue{sol.objective, t.capacity, t.power};
  };
  BisectionOptions bopt;
  bopt.lambda_min = cfg.lambda_min;
  bopt.lambda_max = cfg.lambda_max > 0.0 ? cfg.lambda_max : 2.0 * here.capacity / here.power;
  bopt.tau_f = resolve_tau_f(cfg, here.capacity);
  bopt.max_iterations = cfg.max_inner;
  bopt.max_doublings = cfg.max_bracket_doublings;
  // F(lambda_min) <= -C_tot + lambda_min P_tot at the feasible anchor.
  bopt.f_min_upper_bound = -here.capacity + bopt.lambda_min * here.power;
  const BisectionResult r = dinkelbach_bisect(eval, bopt);
  out.x = last_x;
  out.lambda = r.lambda;
  out.f = r.value.f;
  out.totals = Totals{r.value.numerator, r.value.denominator};
  out.evaluations = r.evaluations;
  out.trace = r.trace;
  out.next = make_iterate(lay.positions(last_x, sc.altitude), sc);
  return out;
}

// ---------------------------------------------------------------------------
// True energy efficiency

enum class EfficiencyMode { kClosedForm, kMonteCarlo };

struct EfficiencyOptions {
  EfficiencyMode mode = EfficiencyMode::kClosedForm;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  double feasibility_tol = 1e-6;
};

struct EfficiencyBreakdown {
  std::vector<double> capacity;  // C_E per slot (N)
  std::vector<double> power;     // P_F per transition (N - 1)
  double total_capacity = 0.0;
  double total_power = 0.0;      // sum P_F + N P_T + E_cost / delta
  double efficiency = 0.0;
};

// sum C_E / (sum P_F + N P_T + E_cost / delta), with C_E the anchored
// ergodic capacity 1/2 log2(1 + exp(E[log Gamma])) or its Monte Carlo
// estimate. Correlated jitter is accepted here.
inline EfficiencyBreakdown efficiency_breakdown(const std::vector<Vec3>& s, const Scenario& sc,
                                                const EfficiencyOptions& opt = {}) {
  const auto report = physical_violations(s, sc);
  if (report.max_violation > opt.feasibility_tol)
    throw InfeasibleError("plan violates " + describe_worst(report));
  const TrajectoryPlan plan(s, sc.slot_length, sc.altitude);
  const auto d = kinematics::differentiate_trajectory(plan);
  const int n = static_cast<int>(s.size());
  EfficiencyBreakdown b;
  for (int k = 0; k < n; ++k) {
    const Vec3 u = slot_pointing(s[k], d.velocities[k], kinematics::acceleration_at(d, k),
                                 sc.aircraft.g);
    const double z = s[k].norm();
    double c;
    if (opt.mode == EfficiencyMode::kClosedForm) {
      c = channel::anchored_capacity(
          channel::expected_log_gamma(sc.link, z, jitter::hoyt_params(sc.jitter, u)));
    } else {
      c = channel::mc_ergodic_capacity(sc.link, z, sc.jitter, u, opt.samples, opt.seed + k).mean;
    }
    b.capacity.push_back(c);
    b.total_capacity += c;
  }
  for (int k = 0; k + 1 < n; ++k) {
    b.power.push_back(kinematics::flight_power(d.velocities[k], d.accelerations[k], sc.aircraft));
    b.total_power += b.power.back();
  }
  b.total_power += n * sc.link.transmit_power + sc.launch_cost / sc.slot_length;
  b.efficiency = b.total_capacity / b.total_power;
  return b;
}

inline double energy_efficiency(const std::vector<Vec3>& s, const Scenario& sc,
                                const EfficiencyOptions& opt = {}) {
  return efficiency_breakdown(s, sc, opt).efficiency;
}

inline double energy_efficiency(const TrajectoryPlan& plan, const Scenario& sc,
                                const EfficiencyOptions& opt = {}) {
  return energy_efficiency(plan.positions(), sc, opt);
}

// ---------------------------------------------------------------------------
// Outer loop

struct HistoryRecord {
  int iteration = 0;
  double lambda = 0.0;
  double c_tot = 0.0;
  double p_tot = 0.0;
  double efficiency = 0.0;      // true, closed form
  double max_violation = 0.0;   // physical constraints
  double change = 0.0;          // combined variable change
  int evaluations = 0;          // Dinkelbach subproblem solves
  double dinkelbach_f = 0.0;    // F(lambda*) of the accepted subproblem
  double seconds = 0.0;
};

struct OptimizeResult {
  Iterate iterate;
  std::vector<HistoryRecord> history;  // entry 0 is the initialization
  bool converged = false;

  std::vector<Vec3> positions() const { return iterate.s; }
  double initial_efficiency() const { return history.front().efficiency; }
  double final_efficiency() const { return history.back().efficiency; }
};

// |V_p - V_(p-1)| + |A_p - A_(p-1)| in SI units, V = (s, u, v, a, posture)
// and A = (S, U, V, P, Q, R).
inline double variable_change(const Iterate& a, const Iterate& b) {
  double dv = 0.0, da = 0.0;
  auto vecs = [](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    double t = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) t += (x[k] - y[k]).squaredNorm();
    return t;
  };
  auto scalars = [](const std::vector<double>& x, const std::vector<double>& y) {
    double t = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) t += (x[k] - y[k]) * (x[k] - y[k]);
    return t;
  };
  dv += vecs(a.s, b.s) + vecs(a.u, b.u) + vecs(a.v, b.v) + vecs(a.a, b.a);
  for (std::size_t k = 0; k < a.posture.size(); ++k) {
    constexpr double kTurn = 2.0 * std::numbers::pi;
    const Vec3 d(a.posture[k].roll - b.posture[k].roll, a.posture[k].pitch - b.posture[k].pitch,
                 std::remainder(a.posture[k].yaw - b.posture[k].yaw, kTurn));
    dv += d.squaredNorm();
  }
  da += scalars(a.S, b.S) + scalars(a.U, b.U) + scalars(a.V, b.V) + scalars(a.P, b.P) +
        scalars(a.Q, b.Q) + scalars(a.R, b.R);
  return std::sqrt(dv) + std::sqrt(da);
}

using ProgressCallback = std::function<void(const HistoryRecord&)>;

inline OptimizeResult optimize(const Scenario& sc, const OptimizerConfig& cfg,
                               const ProgressCallback& progress = {}) {
  cfg.validate();
  if (!sc.jitter.is_diagonal())
    throw UnsupportedOperation("trajectory optimization requires uncorrelated jitter");
  Iterate it = initialize_iterate(sc);
  const Totals init = iterate_totals(it, sc);
  OptimizerConfig inner = cfg;
  inner.tau_f = resolve_tau_f(cfg, init.capacity);
  if (!(cfg.lambda_max > 0.0)) inner.lambda_max = 2.0 * init.capacity / init.power;

  OptimizeResult res;
  HistoryRecord first;
  first.lambda = init.capacity / init.power;
  first.c_tot = init.capacity;
  first.p_tot = init.power;
  first.efficiency = energy_efficiency(it.s, sc);
  first.max_violation = physical_violations(it.s, sc).max_violation;
  res.history.push_back(first);
  if (progress) progress(first);

  for (int p = 1; p <= cfg.max_outer; ++p) {
    const auto t0 = std::chrono::steady_clock::now();
    DinkelbachOutcome step = dinkelbach_solve(it, sc, inner);
    HistoryRecord rec;
    rec.iteration = p;
    rec.lambda = step.lambda;
    rec.c_tot = step.totals.capacity;
    rec.p_tot = step.totals.power;
    rec.max_violation = physical_violations(step.next.s, sc).max_violation;
    rec.efficiency = energy_efficiency(step.next.s, sc, EfficiencyOptions{
        EfficiencyMode::kClosedForm, 0, 0, std::max(1e-6, rec.max_violation)});
    rec.change = variable_change(step.next, it);
    rec.evaluations = step.evaluations;
    rec.dinkelbach_f = step.f;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.history.push_back(rec);
    if (progress) progress(rec);
    it = std::move(step.next);
    if (rec.change < cfg.tau_v) {
      res.converged = true;
      break;
    }
  }
  res.iterate = std::move(it);
  return res;
}

}  // namespace fsouav::sca

#endif  // FSOUAV_SCA_HPP_
