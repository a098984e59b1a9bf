// Copyright 2026 The Sysrisk Authors
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

// Error types, extended-real helpers and the numeric tolerances shared by
// every module.

#ifndef SYSRISK_COMMON_HPP_
#define SYSRISK_COMMON_HPP_

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sysrisk {

// Input data violates a documented invariant (bad dimensions, negative
// probabilities, malformed network, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the mathematical domain of an operation.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical kernel failed. `state` carries a short description of the
// solver state at the time of failure.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::string state = {})
      : std::runtime_error(what), state_(std::move(state)) {}
  const std::string& state() const { return state_; }

 private:
  std::string state_;
};

// The caller did not establish a documented precondition.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// rho(0) does not lie in the interior of the aggregation range.
class AssumptionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Finite real, +inf or -inf. NaN never escapes the public API.
using ExtendedReal = double;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_pos_inf(double v) { return v == kInf; }
inline bool is_neg_inf(double v) { return v == -kInf; }

namespace tol {
inline constexpr double kProbabilitySum = 1e-12;
inline constexpr double kDensityMass = 1e-10;
inline constexpr double kDensityZero = 1e-14;
inline constexpr double kMeasureEquality = 1e-10;
inline constexpr double kLpFeasibility = 1e-9;
inline constexpr double kPathSum = 1e-9;
inline constexpr double kScalarization = 1e-6;
inline constexpr double kPenalty = 1e-5;
inline constexpr double kFixedPoint = 1e-8;
}  // namespace tol

namespace limits {
inline constexpr std::size_t kMaxInstitutions = 64;
inline constexpr std::size_t kMaxScenarios = 100000;
inline constexpr std::size_t kMaxPaths = 10000;
}  // namespace limits

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }
inline double negative_part(double v) { return v < 0.0 ? -v : 0.0; }

// x log x with the convention 0 log 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace sysrisk

#endif  // SYSRISK_COMMON_HPP_
