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

#ifndef FSOUAV_STATS_HPP_
#define FSOUAV_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace fsouav::stats {

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Mean and standard error of the mean, accumulated relative to the first
// sample so that constant data is reproduced exactly.
inline Estimate estimate_mean(std::span<const double> xs) {
  Estimate e;
  if (xs.empty()) return e;
  const double n = static_cast<double>(xs.size());
  const double shift = xs.front();
  double sum = 0.0;
  for (double x : xs) sum += x - shift;
  const double offset = sum / n;
  e.mean = shift + offset;
  if (xs.size() < 2) return e;
  double ss = 0.0;
  for (double x : xs) ss += (x - shift - offset) * (x - shift - offset);
  e.standard_error = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double i_d = static_cast<double>(i);
    d = std::max({d, (i_d + 1.0) / n - f, f - i_d / n});
  }
  return d;
}

// Asymptotic critical value of the one-sample KS statistic.
inline double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

}  // namespace fsouav::stats

#endif  // FSOUAV_STATS_HPP_
