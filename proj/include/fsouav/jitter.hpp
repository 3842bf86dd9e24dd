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

// Attitude jitter of the airframe and the pointing-error angle it induces on
// the UAV-to-GS beam.
//
// The jitter vector x = (alpha, beta, gamma) collects roll, pitch and yaw
// perturbations, x ~ N(0, Sigma). For small angles the squared pointing error
// is the quadratic form x^T A x with A the projector orthogonal to the
// pointing vector, so theta_p is Hoyt (Nakagami-q) distributed with
// parameters taken from the two nonzero eigenvalues of Sigma^1/2 A Sigma^1/2.

#ifndef FSOUAV_JITTER_HPP_
#define FSOUAV_JITTER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "fsouav/errors.hpp"
#include "fsouav/kinematics.hpp"
#include "fsouav/linalg3.hpp"
#include "fsouav/special_functions.hpp"

namespace fsouav::jitter {

// Roll/pitch/yaw jitter standard deviations (radians) and pairwise
// correlations.
struct JitterCovariance {
  double sigma_roll = 0.0;
  double sigma_pitch = 0.0;
  double sigma_yaw = 0.0;
  double rho_roll_pitch = 0.0;
  double rho_pitch_yaw = 0.0;
  double rho_yaw_roll = 0.0;

  static JitterCovariance diagonal(double roll, double pitch, double yaw) {
    return JitterCovariance{roll, pitch, yaw, 0.0, 0.0, 0.0};
  }
  static JitterCovariance uniform_correlation(double roll, double pitch, double yaw,
                                              double rho) {
    return JitterCovariance{roll, pitch, yaw, rho, rho, rho};
  }

  Mat3 matrix() const {
    const double a = sigma_roll, b = sigma_pitch, c = sigma_yaw;
    Mat3 m;
    m << a * a, rho_roll_pitch * a * b, rho_yaw_roll * c * a,  //
        rho_roll_pitch * a * b, b * b, rho_pitch_yaw * b * c,  //
        rho_yaw_roll * c * a, rho_pitch_yaw * b * c, c * c;
    return m;
  }

  bool is_diagonal() const {
    return rho_roll_pitch == 0.0 && rho_pitch_yaw == 0.0 && rho_yaw_roll == 0.0;
  }

  double trace() const {
    return sigma_roll * sigma_roll + sigma_pitch * sigma_pitch + sigma_yaw * sigma_yaw;
  }

  // diag(sb^2 + sy^2, sy^2 + sa^2, sa^2 + sb^2): for a diagonal Sigma,
  // u^T D u / |u|^2 equals Tr(Sigma A).
  Mat3 pair_sum_matrix() const {
    const double a2 = sigma_roll * sigma_roll;
    const double b2 = sigma_pitch * sigma_pitch;
    const double c2 = sigma_yaw * sigma_yaw;
    return Vec3(b2 + c2, c2 + a2, a2 + b2).asDiagonal();
  }

  void validate() const {
    for (double s : {sigma_roll, sigma_pitch, sigma_yaw})
      if (!(s >= 0.0) || !std::isfinite(s))
        throw InvalidCovariance("jitter standard deviations must be finite and >= 0");
    for (double r : {rho_roll_pitch, rho_pitch_yaw, rho_yaw_roll})
      if (!(std::abs(r) <= 1.0)) throw InvalidCovariance("jitter correlations must lie in [-1, 1]");
    const Vec3 ev = linalg3::jacobi_eigen(matrix()).values;
    if (ev(2) < -1e-12) throw InvalidCovariance("jitter covariance is not positive semidefinite");
  }
};

struct HoytParams {
  double lambda1 = 0.0;  // rad^2
  double lambda2 = 0.0;  // rad^2
  double q = 1.0;        // sqrt(lambda2 / lambda1), in [0, 1]
  double omega = 0.0;    // lambda1 + lambda2 = E[theta_p^2]

  static HoytParams from_eigenvalues(double l1, double l2) {
    if (l2 > l1) std::swap(l1, l2);
    l2 = std::max(l2, 0.0);
    HoytParams h;
    h.lambda1 = l1;
    h.lambda2 = l2;
    h.omega = l1 + l2;
    h.q = l1 > 0.0 ? std::sqrt(l2 / l1) : 1.0;
    return h;
  }

  // Below this ratio the density is evaluated as its one-dimensional
  // (folded normal) limit.
  static constexpr double kFoldedLimitQ = 1e-4;
  bool degenerate() const { return q < kFoldedLimitQ; }
};

struct JitterSample {
  double alpha = 0.0;  // roll
  double beta = 0.0;   // pitch
  double gamma = 0.0;  // yaw
};

struct JitterMatrix {
  Mat3 exact;
  Mat3 linearized;
};

inline JitterMatrix jitter_matrix(const JitterSample& x) {
  using kinematics::Axis;
  using kinematics::rotation_matrix;
  JitterMatrix m;
  m.exact = rotation_matrix(Axis::kX, x.alpha) * rotation_matrix(Axis::kY, x.beta) *
            rotation_matrix(Axis::kZ, x.gamma);
  m.linearized << 1.0, -x.gamma, x.beta,  //
      x.gamma, 1.0, -x.alpha,             //
      -x.beta, x.alpha, 1.0;
  return m;
}

inline Mat3 error_projection_matrix(const Vec3& u) {
  const double z2 = u.squaredNorm();
  if (!(z2 > 0.0)) throw DegenerateGeometry("projection undefined for a zero pointing vector");
  return Mat3::Identity() - u * u.transpose() / z2;
}

inline HoytParams hoyt_params(const JitterCovariance& cov, const Vec3& u) {
  cov.validate();
  const Mat3 a = error_projection_matrix(u);
  const Mat3 root = linalg3::psd_sqrt(cov.matrix());
  const Vec3 ev = linalg3::sym3_eigenvalues(root * a * root);
  return HoytParams::from_eigenvalues(ev(0), ev(1));
}

inline double expected_square_error(const HoytParams& h) { return h.omega; }

// Nakagami-q density of theta_p. The exponential factor is merged with the
// scaled Bessel function so that large Bessel arguments do not overflow.
inline double hoyt_pdf(double theta, const HoytParams& h) {
  if (!(h.lambda1 > 0.0)) throw InvalidCovariance("Hoyt density needs lambda1 > 0");
  if (theta < 0.0) return 0.0;
  if (h.degenerate()) {
    return std::sqrt(2.0 / (std::numbers::pi * h.lambda1)) *
           std::exp(-theta * theta / (2.0 * h.lambda1));
  }
  const double q = h.q;
  const double q2 = q * q;
  const double x = (1.0 - q2 * q2) * theta * theta / (4.0 * q2 * h.omega);
  return (1.0 + q2) * theta / (q * h.omega) * std::exp(-theta * theta / (2.0 * h.lambda1)) *
         special::bessel_i0e(x);
}

// P(theta_p <= r) from the polar form of lambda1 Z1^2 + lambda2 Z2^2. The
// integrand is smooth and periodic so the trapezoid rule converges
// geometrically; the node count doubles until two passes agree.
inline double hoyt_cdf(double r, const HoytParams& h) {
  if (r <= 0.0) return 0.0;
  if (!(h.lambda1 > 0.0)) return 1.0;
  if (h.degenerate()) return std::erf(r / std::sqrt(2.0 * h.lambda1));
  const double r2 = r * r;
  auto integrand = [&](double t) {
    const double c = std::cos(t), s = std::sin(t);
    const double var = h.lambda1 * c * c + h.lambda2 * s * s;
    return -std::expm1(-r2 / (2.0 * var));
  };
  // Period pi and even symmetry about 0 and pi/2: average over [0, pi/2].
  int m = 16;
  auto pass = [&](int nodes) {
    double sum = 0.5 * (integrand(0.0) + integrand(0.5 * std::numbers::pi));
    for (int i = 1; i < nodes; ++i) sum += integrand(0.5 * std::numbers::pi * i / nodes);
    return sum / nodes;
  };
  double prev = pass(m);
  while (m < (1 << 16)) {
    m *= 2;
    const double next = pass(m);
    if (std::abs(next - prev) < 1e-13) return next;
    prev = next;
  }
  return prev;
}

enum class SampleMode { kExact, kSmallAngle };

// Draws theta_p for a fixed pointing vector. Cholesky factor of Sigma when it
// is positive definite, symmetric square root otherwise.
class ErrorAngleSampler {
 public:
  ErrorAngleSampler(const JitterCovariance& cov, const Vec3& u, SampleMode mode)
      : u_(u), mode_(mode) {
    cov.validate();
    projection_ = error_projection_matrix(u);
    const Mat3 sigma = cov.matrix();
    Eigen::LLT<Mat3> llt(sigma);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0)
      factor_ = llt.matrixL();
    else
      factor_ = linalg3::psd_sqrt(sigma);
  }

  template <class Rng>
  JitterSample draw_jitter(Rng& rng) {
    const Vec3 z(normal_(rng), normal_(rng), normal_(rng));
    const Vec3 x = factor_ * z;
    return JitterSample{x(0), x(1), x(2)};
  }

  double angle(const JitterSample& x) const {
    if (mode_ == SampleMode::kSmallAngle) {
      const Vec3 v(x.alpha, x.beta, x.gamma);
      return std::sqrt(std::max(0.0, v.dot(projection_ * v)));
    }
    const Vec3 u = jitter_matrix(x).exact * u_;
    return std::atan2(u.cross(u_).norm(), u.dot(u_));
  }

  template <class Rng>
  double operator()(Rng& rng) {
    return angle(draw_jitter(rng));
  }

 private:
  Vec3 u_;
  SampleMode mode_;
  Mat3 projection_;
  Mat3 factor_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline std::vector<double> sample_error_angles(const JitterCovariance& cov, const Vec3& u,
                                               std::size_t n, std::uint64_t seed,
                                               SampleMode mode) {
  if (n < 1) throw Error("need at least one sample");
  ErrorAngleSampler sampler(cov, u, mode);
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& theta : out) theta = sampler(rng);
  return out;
}

// Best-matching covariance with fewer jitter degrees of freedom. All modes
// preserve Tr(Sigma).
inline JitterCovariance reduce_jitter_dof(const JitterCovariance& cov, int dof) {
  if (dof == 3) return cov;
  if (dof != 1 && dof != 2) throw UnsupportedOperation("jitter DoF must be 1, 2 or 3");
  if (!cov.is_diagonal())
    throw UnsupportedOperation("DoF reduction requires uncorrelated jitter");
  if (dof == 2) {
    const double xy = std::sqrt(0.5 * (cov.sigma_roll * cov.sigma_roll +
                                       cov.sigma_pitch * cov.sigma_pitch));
    return JitterCovariance::diagonal(xy, xy, cov.sigma_yaw);
  }
  const double iso = std::sqrt(cov.trace() / 3.0);
  return JitterCovariance::diagonal(iso, iso, iso);
}

}  // namespace fsouav::jitter

#endif  // FSOUAV_JITTER_HPP_
