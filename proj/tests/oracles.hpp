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

// Test-side oracles. Each one recomputes a library quantity by a different
// and deliberately naive route: vertex enumeration, grid search, nested
// bisection.

#ifndef SYSRISK_TESTS_ORACLES_HPP_
#define SYSRISK_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "sysrisk/core_model.hpp"

namespace sysrisk::oracle {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// sup over the vertices of [0, pbar] of
//   sum_i a_i0 p_i - sum_i z_i (p_i - sum_j a_ji p_j),
// the Eisenberg-Noe conjugate for z >= 0.
inline double en_conjugate_by_vertices(const LiabilityNetwork& net, const std::vector<double>& z) {
  const std::size_t d = net.institutions();
  std::vector<double> pbar(d);
  for (std::size_t i = 0; i < d; ++i) pbar[i] = net.total_liability(i + 1);
  auto a = [&](std::size_t i, std::size_t j) { return net.relative(i, j); };  // node indices
  double best = -kInfinity;
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    std::vector<double> p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = (mask >> i) & 1 ? pbar[i] : 0.0;
    double v = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      v += a(i + 1, 0) * p[i];
      double inflow = 0.0;
      for (std::size_t j = 0; j < d; ++j) inflow += a(j + 1, i + 1) * p[j];
      v -= z[i] * (p[i] - inflow);
    }
    best = std::max(best, v);
  }
  return best;
}

// Maximum of c^T x over {x in R^2 : A x <= b} by enumerating the
// intersections of constraint pairs; NaN when infeasible.
inline double lp2_by_vertices(const std::vector<std::array<double, 2>>& a, const std::vector<double>& b,
                              std::array<double, 2> c) {
  double best = -kInfinity;
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t s = r + 1; s < a.size(); ++s) {
      const double det = a[r][0] * a[s][1] - a[r][1] * a[s][0];
      if (std::abs(det) < 1e-12) continue;
      const double x = (b[r] * a[s][1] - a[r][1] * b[s]) / det;
      const double y = (a[r][0] * b[s] - b[r] * a[s][0]) / det;
      bool ok = true;
      for (std::size_t t = 0; t < a.size() && ok; ++t) ok = a[t][0] * x + a[t][1] * y <= b[t] + 1e-9;
      if (ok) best = std::max(best, c[0] * x + c[1] * y);
    }
  }
  return best == -kInfinity ? std::numeric_limits<double>::quiet_NaN() : best;
}

// Smallest t in [lo, hi] with member(t), for a monotone predicate.
inline double bisect_threshold(const std::function<bool(double)>& member, double lo, double hi, int steps = 200) {
  if (!member(hi)) return kInfinity;
  if (member(lo)) return -kInfinity;
  for (int i = 0; i < steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (member(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

// min w^T z over a monotone set in R^2 given by its membership predicate,
// w > 0: for each z1 the smallest feasible z2 by bisection, then a grid over
// z1 in [-bound, bound] refined around the best cell.
inline double scalarization_2d(const std::function<bool(const std::vector<double>&)>& member,
                               const std::vector<double>& w, double bound, int grid = 400) {
  auto value_at = [&](double z1) {
    const double z2 = bisect_threshold([&](double t) { return member({z1, t}); }, -4.0 * bound, 4.0 * bound);
    if (std::isinf(z2)) return kInfinity;
    return w[0] * z1 + w[1] * z2;
  };
  double lo = -bound, hi = bound;
  double best = kInfinity, best_x = 0.0;
  for (int round = 0; round < 6; ++round) {
    const double step = (hi - lo) / grid;
    for (int i = 0; i <= grid; ++i) {
      const double x = lo + step * i;
      const double v = value_at(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    lo = best_x - 2.0 * step;
    hi = best_x + 2.0 * step;
  }
  return best;
}

// inf over sigma_1 in (0, 1) of f(sigma) = penalty(sigma) + sum_k sigma_k
// g(m_k / sigma_k) for n = 2: a uniform grid of `points` cells, then the
// same number of points across the two cells around the best one, so a
// minimum sitting on the edge of dom f is resolved as well.
inline double grid_penalty_n2(const std::function<double(double, double)>& penalty,
                              const std::function<double(const std::vector<double>&)>& g,
                              const std::vector<std::vector<double>>& m, int points = 100000) {
  auto f = [&](double s1) {
    const double sig[2] = {s1, 1.0 - s1};
    double v = penalty(sig[0], sig[1]);
    for (int k = 0; k < 2; ++k) {
      std::vector<double> z(m[k].size());
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = m[k][i] / sig[k];
      v += sig[k] * g(z);
    }
    return v;
  };
  double best = kInfinity, arg = 0.5;
  for (int j = 1; j < points; ++j) {
    const double s1 = static_cast<double>(j) / points;
    const double v = f(s1);
    if (v < best) {
      best = v;
      arg = s1;
    }
  }
  const double h = 1.0 / points;
  const double lo = std::max(arg - h, 0.0), hi = std::min(arg + h, 1.0);
  for (int j = 1; j < points; ++j) best = std::min(best, f(lo + (hi - lo) * j / points));
  return best;
}

// Network with d institutions, liabilities uniform in [0, 5], every
// institution owing society a positive amount.
inline LiabilityNetwork random_network(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::bernoulli_distribution sparse(0.3);
  std::vector<std::vector<double>> rows(d + 1, std::vector<double>(d + 1, 0.0));
  for (std::size_t i = 1; i <= d; ++i) {
    rows[i][0] = 0.1 + u(rng);
    for (std::size_t j = 1; j <= d; ++j)
      if (i != j && !sparse(rng)) rows[i][j] = u(rng);
  }
  return LiabilityNetwork::from_rows(rows);
}

}  // namespace sysrisk::oracle

#endif  // SYSRISK_TESTS_ORACLES_HPP_
