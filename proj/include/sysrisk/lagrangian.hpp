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

// Lagrange dual of   minimize w^T z  subject to  c(z) <= 0
// for a convex constraint c that is nonincreasing along the all-ones
// direction:
//
//   phi(lambda) = inf_z (w^T z + lambda c(z)),   maximized over lambda > 0.

#ifndef SYSRISK_LAGRANGIAN_HPP_
#define SYSRISK_LAGRANGIAN_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sysrisk/common.hpp"
#include "sysrisk/linear_program.hpp"
#include "sysrisk/optimizer.hpp"

namespace sysrisk {

// c(z) and a subgradient; may return +inf (then grad is ignored).
using ConstraintFn = std::function<double(std::span<const double> z, std::span<double> grad)>;

struct InnerSolution {
  double value = 0.0;  // phi(lambda), possibly -inf
  std::vector<double> z;
};

// Exact inner solver: (lambda, warm start) -> phi(lambda) and a minimizer.
using InnerSolver = std::function<InnerSolution(double lambda, const std::vector<double>& warm)>;

struct LagrangianOptions {
  double lambda_lo = 1e-6;
  double lambda_hi = 1e6;
  double lambda_max = 1e12;
  std::size_t inner_iterations = 10000;
  double divergence_norm = 1e9;
};

namespace detail {

// Smallest t with c(z + t 1) <= 0, by bracketing and bisection.
inline std::optional<double> feasibility_shift(const ConstraintFn& c, std::span<const double> z) {
  std::vector<double> buf(z.begin(), z.end()), grad(z.size());
  auto at = [&](double t) {
    for (std::size_t i = 0; i < z.size(); ++i) buf[i] = z[i] + t;
    return c(buf, grad);
  };
  double lo, hi;
  if (at(0.0) <= 0.0) {
    hi = 0.0;
    double step = 1.0;
    lo = -step;
    while (at(lo) <= 0.0) {
      hi = lo;
      step *= 2.0;
      lo = -step;
      if (step > 1e15) return lo;
    }
  } else {
    lo = 0.0;
    double step = 1.0;
    hi = step;
    while (!(at(hi) <= 0.0)) {
      lo = hi;
      step *= 2.0;
      hi = step;
      if (step > 1e15) return std::nullopt;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid) <= 0.0) hi = mid;
    else lo = mid;
  }
  return hi;
}

// True when t -> w^T (z + t 1) + lambda c(z + t 1) keeps decreasing at a
// nonvanishing rate far out in either direction, so phi(lambda) = -inf.
inline bool ones_recession(std::span<const double> w, const ConstraintFn& c, double lambda,
                           std::span<const double> z) {
  double wsum = 0.0;
  for (double v : w) wsum += v;
  std::vector<double> buf(z.size()), grad(z.size());
  auto lag = [&](double t) {
    for (std::size_t i = 0; i < z.size(); ++i) buf[i] = z[i] + t;
    const double cv = c(buf, grad);
    return std::isfinite(cv) ? wsum * t + lambda * cv : cv;
  };
  const double far = 1e6 * (1.0 + std::abs(z.empty() ? 0.0 : z[0]));
  for (double sign : {1.0, -1.0}) {
    const double a = lag(sign * far), b = lag(sign * 2.0 * far);
    if (std::isfinite(a) && std::isfinite(b) && (b - a) / far < -1e-6 * wsum) return true;
  }
  return false;
}

}  // namespace detail

// Maximizes phi by golden-section search over log(lambda); the inner
// problem is solved by `exact` when given, otherwise by first-order descent
// on w^T z + lambda c(z) warm-started at the previous minimizer. The report
// carries the repaired primal point (point), its cost (objective), the best
// dual value (dual_bound), gap = objective - dual_bound and duals = {lambda}.
inline SolveReport lagrange_dual_scalarization(std::span<const double> w, const ConstraintFn& c,
                                               std::span<const double> slater,
                                               const std::optional<InnerSolver>& exact = std::nullopt,
                                               const LagrangianOptions& opt = {}) {
  const std::size_t d = w.size();
  double wmax = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw PreconditionError("scalarization: weights must be nonnegative");
    wmax = std::max(wmax, v);
  }
  if (wmax <= 0.0) throw PreconditionError("scalarization: weights must not all vanish");
  {
    std::vector<double> g(d);
    if (slater.size() != d || !(c(slater, g) < 0.0))
      throw PreconditionError("scalarization: no Slater point supplied");
  }

  std::vector<double> warm(slater.begin(), slater.end());
  std::size_t inner_total = 0;
  bool diverged_somewhere = false;
  struct Best {
    double lambda = 0.0;
    double value = -kInf;
    std::vector<double> z;
  } best;

  auto phi = [&](double lambda) -> double {
    InnerSolution sol;
    if (exact) {
      sol = (*exact)(lambda, warm);
    } else {
      DescentOptions dopt;
      dopt.max_iterations = opt.inner_iterations;
      dopt.divergence_norm = opt.divergence_norm;
      VectorObjective obj = [&](std::span<const double> z, std::span<double> grad) {
        const double cv = c(z, grad);
        if (!std::isfinite(cv)) {
          std::fill(grad.begin(), grad.end(), 0.0);
          return kInf;
        }
        double v = lambda * cv;
        for (std::size_t i = 0; i < d; ++i) {
          v += w[i] * z[i];
          grad[i] = w[i] + lambda * grad[i];
        }
        return v;
      };
      SolveReport r = descend(obj, warm, dopt);
      inner_total += r.iterations;
      if (r.status == SolveStatus::kUnbounded) diverged_somewhere = true;
      sol.value = r.objective;
      sol.z = r.point;
      if (std::isfinite(sol.value) && detail::ones_recession(w, c, lambda, sol.z)) {
        diverged_somewhere = true;
        sol.value = -kInf;
      }
    }
    if (std::isfinite(sol.value)) warm = sol.z;
    if (sol.value > best.value) best = {lambda, sol.value, sol.z};
    return sol.value;
  };

  double lo = std::log(opt.lambda_lo), hi = std::log(opt.lambda_hi);
  const double top = std::log(opt.lambda_max);
  while (true) {
    ScalarMin m = golden_section([&](double s) { return -phi(std::exp(s)); }, lo, hi, 1e-9);
    if (m.x < hi - 0.01 * (hi - lo) || hi >= top) break;
    lo = hi - 1.0;
    hi = std::min(hi + std::log(1e3), top);
  }
  // phi can be finite at a single lambda only, the one that makes the
  // Lagrangian flat along the ones direction; probe it explicitly.
  {
    std::vector<double> base = best.z.empty() ? std::vector<double>(slater.begin(), slater.end()) : best.z;
    std::vector<double> g(d);
    const double cv = c(base, g);
    double slope = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      slope -= g[i];
      wsum += w[i];
    }
    if (std::isfinite(cv) && slope > 0.0) {
      const double lambda = wsum / slope;
      if (lambda > 0.0 && lambda <= opt.lambda_max) phi(lambda);
    }
  }

  SolveReport rep;
  rep.iterations = inner_total;
  rep.duals = {best.lambda};
  if (!std::isfinite(best.value)) {
    // phi = -inf on the whole search range: the scalarization is unbounded.
    rep.status = SolveStatus::kUnbounded;
    rep.objective = -kInf;
    rep.dual_bound = -kInf;
    rep.note = diverged_somewhere ? "inner iterates diverged: possible unbounded direction" : "dual function is -inf";
    return rep;
  }
  rep.dual_bound = best.value;
  auto shift = detail::feasibility_shift(c, best.z);
  if (!shift) throw NumericError("scalarization: could not repair the primal point along the ones direction");
  rep.point = best.z;
  for (double& v : rep.point) v += *shift;
  rep.objective = 0.0;
  for (std::size_t i = 0; i < d; ++i) rep.objective += w[i] * rep.point[i];
  rep.gap = rep.objective - rep.dual_bound;
  rep.status = SolveStatus::kOptimal;
  return rep;
}

}  // namespace sysrisk

#endif  // SYSRISK_LAGRANGIAN_HPP_
