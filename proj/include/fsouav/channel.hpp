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

// FSO link budget between the UAV and a ground station at the origin:
// Kruse attenuation, Beer-Lambert loss, Gaussian-beam pointing loss,
// log-normal scintillation and the IM/DD capacity C = 1/2 log2(1 + Gamma)
// with Gamma = e P^2 / (2 pi sigma^2).

#ifndef FSOUAV_CHANNEL_HPP_
#define FSOUAV_CHANNEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fsouav/errors.hpp"
#include "fsouav/jitter.hpp"
#include "fsouav/linalg3.hpp"
#include "fsouav/stats.hpp"

namespace fsouav::channel {

// sigma_B = 3.91 / V * (lambda / 550 nm)^(-q_sca), V in meters, result in
// 1/m. The q_sca branches are defined on V in km.
inline double attenuation_coefficient(double visibility, double wavelength) {
  if (!(visibility > 0.0)) throw Error("visibility must be positive");
  if (!(wavelength > 0.0)) throw Error("wavelength must be positive");
  const double v_km = visibility / 1000.0;
  double q_sca;
  if (v_km >= 50.0)
    q_sca = 1.6;
  else if (v_km >= 6.0)
    q_sca = 1.3;
  else
    q_sca = 0.585 * std::cbrt(v_km);
  return 3.91 / v_km * std::pow(wavelength / 550e-9, -q_sca) / 1000.0;
}

struct LinkParams {
  double transmit_power = 0.01;  // P_T, W
  double noise_std = 1e-5;       // sigma, A
  double responsivity = 0.5;     // R, A/W
  double aperture = 0.2;         // a, m
  double sigma_div = 1.5e-3;     // rad
  double sigma_i = 0.3;          // log-amplitude std
  double visibility = 3000.0;    // V, m
  double wavelength = 1550e-9;   // m

  double sigma_b() const { return attenuation_coefficient(visibility, wavelength); }

  void validate() const {
    if (!(transmit_power > 0.0)) throw Error("transmit power must be positive");
    if (!(noise_std > 0.0)) throw Error("noise std must be positive");
    if (!(responsivity > 0.0)) throw Error("responsivity must be positive");
    if (!(aperture > 0.0)) throw Error("aperture must be positive");
    if (!(sigma_div > 0.0)) throw Error("sigma_div must be positive");
    if (!(sigma_i >= 0.0)) throw Error("sigma_I must be non-negative");
    if (!(visibility > 0.0)) throw Error("visibility must be positive");
    if (!(wavelength > 0.0)) throw Error("wavelength must be positive");
  }
};

inline double atmospheric_loss(double sigma_b, double z) {
  if (!(z >= 0.0)) throw Error("link distance must be non-negative");
  return std::exp(-sigma_b * z);
}

struct PointingLoss {
  double gain = 0.0;        // h_p
  double max_gain = 0.0;    // A_0
  double beam_width = 0.0;  // 1-sigma footprint diameter, m
  bool near_field = false;  // footprint within 10 apertures
};

inline double max_pointing_gain(double z, const LinkParams& link) {
  if (!(z > 0.0)) throw DegenerateGeometry("link distance must be positive");
  return link.aperture * link.aperture / (2.0 * z * link.sigma_div);
}

inline PointingLoss pointing_loss(double theta_p, double z, const LinkParams& link) {
  if (!(theta_p >= 0.0)) throw Error("pointing error angle must be non-negative");
  PointingLoss out;
  out.max_gain = max_pointing_gain(z, link);
  out.gain = out.max_gain *
             std::exp(-theta_p * theta_p / (2.0 * link.sigma_div * link.sigma_div));
  out.beam_width = 2.0 * z * link.sigma_div;
  out.near_field = out.beam_width <= 10.0 * link.aperture;
  return out;
}

inline double snr(double h_a, double h_l, double h_p, const LinkParams& link) {
  const double p = h_a * h_l * h_p * link.responsivity * link.transmit_power;
  return std::numbers::e * p * p / (2.0 * std::numbers::pi * link.noise_std * link.noise_std);
}

inline double instantaneous_capacity(double h_a, double h_l, double h_p,
                                     const LinkParams& link) {
  if (h_a < 0.0 || h_l < 0.0 || h_p < 0.0) throw Error("channel gains must be non-negative");
  return 0.5 * std::log1p(snr(h_a, h_l, h_p, link)) / std::numbers::ln2;
}

// Floored log for diagnostics on pathological inputs.
inline double safe_log(double x) { return std::log(std::max(x, 1e-300)); }

// E[log Gamma] split into its independent factors.
struct LogGammaComponents {
  double constant = 0.0;     // log(e R^2 P_T^2 / (2 pi sigma^2))
  double fading = 0.0;       // 2 E[log h_a]
  double atmospheric = 0.0;  // 2 log h_l
  double pointing = 0.0;     // 2 E[log h_p]

  double total() const { return constant + fading + atmospheric + pointing; }
};

inline LogGammaComponents expected_log_gamma_components(const LinkParams& link, double z,
                                                        double omega) {
  if (!(z > 0.0)) throw DegenerateGeometry("link distance must be positive");
  LogGammaComponents c;
  const double rp = link.responsivity * link.transmit_power;
  c.constant = std::log(std::numbers::e * rp * rp /
                        (2.0 * std::numbers::pi * link.noise_std * link.noise_std));
  c.fading = -4.0 * link.sigma_i * link.sigma_i;
  c.atmospheric = -2.0 * link.sigma_b() * z;
  c.pointing = 2.0 * std::log(max_pointing_gain(z, link)) -
               omega / (link.sigma_div * link.sigma_div);
  return c;
}

// The distance-free part c3 of E[log Gamma] = c3 - 2 sigma_B z - 2 log z -
// Omega / sigma_div^2.
inline double log_gain_constant(const LinkParams& link) {
  const double r = link.responsivity, pt = link.transmit_power, a = link.aperture;
  return std::log(std::numbers::e * r * r * pt * pt * a * a * a * a /
                  (8.0 * std::numbers::pi * link.noise_std * link.noise_std * link.sigma_div *
                   link.sigma_div)) -
         4.0 * link.sigma_i * link.sigma_i;
}

inline double expected_log_gamma(const LinkParams& link, double z, const jitter::HoytParams& h) {
  return log_gain_constant(link) - 2.0 * link.sigma_b() * z - 2.0 * std::log(z) -
         h.omega / (link.sigma_div * link.sigma_div);
}

// Tangent of log(1 + e^t) at t = log Gamma_L:
// log(1 + Gamma) >= nabla log Gamma + delta.
struct LogBound {
  double gamma_l = 1.0;
  double nabla = 0.5;
  double delta = std::numbers::ln2;
};

inline LogBound log_bound(double gamma_l) {
  if (!(gamma_l > 0.0)) throw Error("anchor Gamma_L must be positive");
  LogBound b;
  b.gamma_l = gamma_l;
  b.nabla = gamma_l / (1.0 + gamma_l);
  b.delta = std::log1p(gamma_l) - b.nabla * std::log(gamma_l);
  return b;
}

// Same bound parameterized by log Gamma_L, safe for very large or small
// anchors.
inline LogBound log_bound_from_log(double log_gamma_l) {
  LogBound b;
  b.gamma_l = std::exp(log_gamma_l);
  if (log_gamma_l > 0.0) {
    const double e = std::exp(-log_gamma_l);
    b.nabla = 1.0 / (1.0 + e);
    b.delta = log_gamma_l + std::log1p(e) - b.nabla * log_gamma_l;
  } else {
    const double e = std::exp(log_gamma_l);
    b.nabla = e / (1.0 + e);
    b.delta = std::log1p(e) - b.nabla * log_gamma_l;
  }
  return b;
}

inline double ergodic_capacity(double expected_log_gamma_value, const LogBound& bound) {
  return (bound.nabla * expected_log_gamma_value + bound.delta) / (2.0 * std::numbers::ln2);
}

inline double ergodic_capacity(double expected_log_gamma_value, double gamma_l) {
  return ergodic_capacity(expected_log_gamma_value, log_bound(gamma_l));
}

// log(1 + e^t) without overflow.
inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// Bound evaluated at its own anchor: 1/2 log2(1 + exp(E[log Gamma])).
inline double anchored_capacity(double expected_log_gamma_value) {
  return softplus(expected_log_gamma_value) / (2.0 * std::numbers::ln2);
}

// Joint sampler of (h_a, theta_p) for one link geometry.
class ChannelSampler {
 public:
  ChannelSampler(const LinkParams& link, double z, const jitter::JitterCovariance& cov,
                 const Vec3& u)
      : link_(link),
        z_(z),
        h_l_(atmospheric_loss(link.sigma_b(), z)),
        angles_(cov, u, jitter::SampleMode::kExact) {
    link_.validate();
  }

  struct Draw {
    double h_a = 1.0;
    double theta_p = 0.0;
    double h_p = 0.0;
  };

  template <class Rng>
  Draw operator()(Rng& rng) {
    Draw d;
    d.theta_p = angles_(rng);
    if (link_.sigma_i > 0.0) {
      const double s2 = link_.sigma_i * link_.sigma_i;
      d.h_a = std::exp(-2.0 * s2 + 2.0 * link_.sigma_i * normal_(rng));
    }
    d.h_p = pointing_loss(d.theta_p, z_, link_).gain;
    return d;
  }

  double capacity(const Draw& d) const {
    return instantaneous_capacity(d.h_a, h_l_, d.h_p, link_);
  }
  double log_gamma(const Draw& d) const { return safe_log(snr(d.h_a, h_l_, d.h_p, link_)); }

 private:
  LinkParams link_;
  double z_;
  double h_l_;
  jitter::ErrorAngleSampler angles_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Monte Carlo E[1/2 log2(1 + Gamma)] with the standard error of the mean.
inline stats::Estimate mc_ergodic_capacity(const LinkParams& link, double z,
                                           const jitter::JitterCovariance& cov, const Vec3& u,
                                           std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error("need at least one sample");
  ChannelSampler sampler(link, z, cov, u);
  std::mt19937_64 rng(seed);
  std::vector<double> values(n);
  for (auto& c : values) c = sampler.capacity(sampler(rng));
  return stats::estimate_mean(values);
}

inline stats::Estimate mc_log_gamma(const LinkParams& link, double z,
                                    const jitter::JitterCovariance& cov, const Vec3& u,
                                    std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error("need at least one sample");
  ChannelSampler sampler(link, z, cov, u);
  std::mt19937_64 rng(seed);
  std::vector<double> values(n);
  for (auto& c : values) c = sampler.log_gamma(sampler(rng));
  return stats::estimate_mean(values);
}

}  // namespace fsouav::channel

#endif  // FSOUAV_CHANNEL_HPP_
