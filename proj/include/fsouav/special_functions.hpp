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

#ifndef FSOUAV_SPECIAL_FUNCTIONS_HPP_
#define FSOUAV_SPECIAL_FUNCTIONS_HPP_

#include <cmath>
#include <numbers>

namespace fsouav::special {

// Exponentially scaled modified Bessel function exp(-x) I0(x) for x >= 0.
//
// Power series below the switch point and the Hankel asymptotic expansion
// above it. At x = 15 the smallest asymptotic term is below 1e-13, so both
// branches hold 1e-10 absolute accuracy on the scaled value.
inline double bessel_i0e(double x) {
  x = std::abs(x);
  constexpr double kSwitch = 15.0;
  if (x < kSwitch) {
    const double quarter_x2 = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= quarter_x2 / (static_cast<double>(k) * static_cast<double>(k));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum * std::exp(-x);
  }
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break;  // past the smallest term
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

inline double bessel_i0(double x) { return bessel_i0e(x) * std::exp(std::abs(x)); }

}  // namespace fsouav::special

#endif  // FSOUAV_SPECIAL_FUNCTIONS_HPP_
