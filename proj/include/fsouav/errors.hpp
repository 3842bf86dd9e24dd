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

#ifndef FSOUAV_ERRORS_HPP_
#define FSOUAV_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fsouav {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTrajectory : public Error {
 public:
  using Error::Error;
};

// Zero (or vanishing) velocity where a heading or bank angle is required.
class DegenerateVelocity : public Error {
 public:
  using Error::Error;
};

// Zero position or pointing vector.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class InvalidCovariance : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

// Scenario, initialization or trajectory that violates the physical
// constraints of the mission.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Fractional-programming bracket without a sign change.
class BracketError : public Error {
 public:
  BracketError(const std::string& what, double f_low, double f_high)
      : Error(what), f_low_(f_low), f_high_(f_high) {}
  double f_low() const { return f_low_; }
  double f_high() const { return f_high_; }

 private:
  double f_low_;
  double f_high_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// Configuration error; `path()` names the offending field, e.g.
// "link.sigma_div".
class ParseError : public Error {
 public:
  ParseError(const std::string& path, const std::string& message)
      : Error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace fsouav

#endif  // FSOUAV_ERRORS_HPP_
