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

// Discrete-time flight kinematics of a fixed-wing UAV flying at constant
// altitude in a frame centred on the ground station.

#ifndef FSOUAV_KINEMATICS_HPP_
#define FSOUAV_KINEMATICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fsouav/errors.hpp"
#include "fsouav/linalg3.hpp"

namespace fsouav::kinematics {

// Positions s[0..N-1] sampled every `slot_length` seconds at altitude
// `altitude`. The velocity at the last slot repeats the previous one, i.e. an
// implied extra point s[N] = 2 s[N-1] - s[N-2].
class TrajectoryPlan {
 public:
  TrajectoryPlan(std::vector<Vec3> positions, double slot_length, double altitude)
      : positions_(std::move(positions)), slot_length_(slot_length), altitude_(altitude) {
    if (positions_.size() < 2)
      throw InvalidTrajectory("trajectory needs at least 2 slots, got " +
                              std::to_string(positions_.size()));
    if (!(slot_length_ > 0.0) || !std::isfinite(slot_length_))
      throw InvalidTrajectory("slot length must be positive");
    for (std::size_t k = 0; k < positions_.size(); ++k) {
      if (!positions_[k].allFinite())
        throw InvalidTrajectory("non-finite position at slot " + std::to_string(k));
      if (positions_[k].z() != altitude_)
        throw InvalidTrajectory("position at slot " + std::to_string(k) +
                                " is off the flight altitude");
    }
  }

  std::size_t size() const { return positions_.size(); }
  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& operator[](std::size_t k) const { return positions_[k]; }
  double slot_length() const { return slot_length_; }
  double altitude() const { return altitude_; }
  double duration() const { return slot_length_ * static_cast<double>(size()); }

 private:
  std::vector<Vec3> positions_;
  double slot_length_;
  double altitude_;
};

struct Posture {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

struct AircraftParams {
  double c1 = 9.26e-4;  // kg/m
  double c2 = 2250.0;   // kg m^3 / s^4
  double g = 9.8;
  double mass = 10.0;
  double v_min = 3.0;
  double v_max = 100.0;
  double a_max = 5.0;

  void validate() const {
    if (!(c1 > 0.0)) throw InvalidTrajectory("aircraft c1 must be positive");
    if (!(c2 > 0.0)) throw InvalidTrajectory("aircraft c2 must be positive");
    if (!(g > 0.0)) throw InvalidTrajectory("gravity must be positive");
    if (!(mass > 0.0)) throw InvalidTrajectory("mass must be positive");
    if (!(v_min > 0.0 && v_min < v_max)) throw InvalidTrajectory("need 0 < v_min < v_max");
    if (!(a_max > 0.0)) throw InvalidTrajectory("a_max must be positive");
  }
};

struct Derivatives {
  std::vector<Vec3> velocities;     // N entries, last one repeated
  std::vector<Vec3> accelerations;  // N-1 entries
};

inline Derivatives differentiate_trajectory(const TrajectoryPlan& plan) {
  const std::size_t n = plan.size();
  if (n < 2) throw InvalidTrajectory("trajectory needs at least 2 slots");
  const double dt = plan.slot_length();
  Derivatives d;
  d.velocities.resize(n);
  d.accelerations.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) d.velocities[k] = (plan[k + 1] - plan[k]) / dt;
  d.velocities[n - 1] = d.velocities[n - 2];
  for (std::size_t k = 0; k + 1 < n; ++k)
    d.accelerations[k] = (d.velocities[k + 1] - d.velocities[k]) / dt;
  return d;
}

// The last slot has no acceleration of its own; it keeps the bank of slot
// N-2.
inline const Vec3& acceleration_at(const Derivatives& d, std::size_t k) {
  return d.accelerations[std::min(k, d.accelerations.size() - 1)];
}

inline double yaw_from_velocity(const Vec3& v) {
  if (!(v.norm() > 0.0)) throw DegenerateVelocity("yaw undefined for zero velocity");
  return std::atan2(v.y(), v.x());
}

// Bank angle of a coordinated turn: tan(roll) = -a_perp / g with a_perp the
// acceleration along the left wing.
inline double roll_from_motion(const Vec3& v, const Vec3& a, double g) {
  const double speed = v.norm();
  if (!(speed > 0.0)) throw DegenerateVelocity("roll undefined for zero velocity");
  return std::atan((v.y() * a.x() - v.x() * a.y()) / (speed * g));
}

inline double bank_angle_limit(double a_max, double g) { return std::atan(a_max / g); }

enum class Axis { kX, kY, kZ };

inline Mat3 rotation_matrix(Axis axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  switch (axis) {
    case Axis::kX:
      r << 1, 0, 0, 0, c, -s, 0, s, c;
      break;
    case Axis::kY:
      r << c, 0, s, 0, 1, 0, -s, 0, c;
      break;
    case Axis::kZ:
      r << c, -s, 0, s, c, 0, 0, 0, 1;
      break;
  }
  return r;
}

// Rotation taking ground-frame vectors into the body frame.
inline Mat3 posture_rotation(const Posture& p) {
  return rotation_matrix(Axis::kX, -p.roll) * rotation_matrix(Axis::kY, -p.pitch) *
         rotation_matrix(Axis::kZ, -p.yaw);
}

// Average UAV-to-GS pointing vector in the body frame, for the GS at the
// origin.
inline Vec3 pointing_vector(const Vec3& s, const Posture& posture) {
  if (!(s.norm() > 0.0)) throw DegenerateGeometry("pointing vector undefined at the GS");
  return -(posture_rotation(posture) * s);
}

// Slot posture of the trajectory: yaw follows the velocity, roll follows the
// lateral acceleration, pitch is zero at constant altitude.
inline Posture slot_posture(const Vec3& v, const Vec3& a, double g) {
  return Posture{roll_from_motion(v, a, g), 0.0, yaw_from_velocity(v)};
}

inline double flight_power(const Vec3& v, const Vec3& a, const AircraftParams& params) {
  const double speed = v.norm();
  if (!(speed > 0.0)) throw DegenerateVelocity("flight power undefined for zero velocity");
  const double g2 = params.g * params.g;
  return params.c1 * speed * speed * speed + params.c2 / speed * (1.0 + a.squaredNorm() / g2);
}

// Diagnostic only; the optimized objective drops this term.
inline double kinetic_energy_delta(const Vec3& v_first, const Vec3& v_last, double mass) {
  return 0.5 * mass * (v_last.squaredNorm() - v_first.squaredNorm());
}

}  // namespace fsouav::kinematics

#endif  // FSOUAV_KINEMATICS_HPP_
