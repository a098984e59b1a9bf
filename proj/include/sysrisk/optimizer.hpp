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

// Smooth and derivative-free kernels: golden-section search, Nelder-Mead,
// entropic mirror descent over the simplex and first-order descent in R^d.

#ifndef SYSRISK_OPTIMIZER_HPP_
#define SYSRISK_OPTIMIZER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sysrisk/common.hpp"
#include "sysrisk/linear_program.hpp"

namespace sysrisk {

struct ScalarMin {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

// Minimizes a unimodal f on [a, b]. Ties between two infinite values move
// the bracket to the right, which suits dual functions that are -inf to the
// left of their domain (used negated).
inline ScalarMin golden_section(const std::function<double(double)>& f, double a, double b, double xtol = 1e-10,
                                std::size_t max_evals = 200) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  std::size_t evals = 2;
  while (b - a > xtol * (1.0 + std::abs(a) + std::abs(b)) && evals < max_evals) {
    const bool both_inf = std::isinf(fc) && std::isinf(fd) && fc == fd;
    if (!both_inf && fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  if (fc <= fd) return {c, fc, evals};
  return {d, fd, evals};
}

// Derivative-free minimization with the standard reflection/expansion/
// contraction/shrink coefficients.
inline SolveReport nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                               double initial_step = 0.5, std::size_t max_evals = 20000, double ftol = 1e-13) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += initial_step;
  std::vector<double> vals(n + 1);
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    if (std::isnan(v)) throw NumericError("nelder-mead: objective returned NaN");
    return v;
  };
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);
  std::vector<std::size_t> order(n + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= ftol * (1.0 + std::abs(vals[best]))) break;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
      return x;
    };
    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      auto xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
          vals[i] = eval(pts[i]);
        }
      }
    }
  }
  const std::size_t best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  SolveReport rep;
  rep.point = pts[best];
  rep.objective = vals[best];
  rep.iterations = evals;
  rep.status = evals < max_evals ? SolveStatus::kOptimal : SolveStatus::kIterationCap;
  return rep;
}

// Objective for the simplex kernels: returns f(sigma) and writes a
// (sub)gradient into grad.
using SimplexObjective = std::function<double(std::span<const double> sigma, std::span<double> grad)>;

struct SimplexOptions {
  std::size_t max_iterations = 10000;
  std::size_t window = 50;
  double rel_improvement = 1e-10;
  double initial_step = 1.0;
  // Optional per-coordinate upper bounds (capped simplex).
  std::vector<double> caps;
  double floor = 1e-300;
};

namespace detail {

// KL projection of a positive vector y onto {sigma : sum = 1, sigma <= cap}:
// sigma = min(cap, c y) with the scalar c found by bisection.
inline void project_capped(std::vector<double>& y, const std::vector<double>& caps) {
  double total = std::accumulate(y.begin(), y.end(), 0.0);
  if (caps.empty()) {
    for (double& v : y) v /= total;
    return;
  }
  auto mass = [&](double c) {
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += std::min(caps[k], c * y[k]);
    return s;
  };
  double lo = 0.0, hi = 1.0 / total;
  while (mass(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) < 1.0) lo = mid;
    else hi = mid;
  }
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = std::min(caps[k], hi * y[k]);
  total = std::accumulate(y.begin(), y.end(), 0.0);
  for (double& v : y) v /= total;
}

}  // namespace detail

// Entropic mirror descent (multiplicative updates) with an adaptive step:
// a step that does not improve f is rejected and halved, an accepted step
// grows by 10%. The returned point is the best iterate.
inline SolveReport minimize_over_simplex(const SimplexObjective& f, std::vector<double> sigma,
                                         const SimplexOptions& opt = {}) {
  const std::size_t n = sigma.size();
  if (n == 0) throw ModelError("simplex minimizer: empty simplex");
  detail::project_capped(sigma, opt.caps);
  std::vector<double> grad(n), trial(n), tgrad(n);
  auto eval = [&](const std::vector<double>& s, std::vector<double>& g) {
    const double v = f(s, g);
    if (std::isnan(v)) throw NumericError("simplex minimizer: objective returned NaN");
    return v;
  };
  double best = eval(sigma, grad);
  SolveReport rep;
  std::vector<double> history{best};
  double step = opt.initial_step;
  std::size_t it = 0;
  for (; it < opt.max_iterations && std::isfinite(best); ++it) {
    double gmax = -kInf, gmin = kInf;
    for (double g : grad) {
      gmax = std::max(gmax, g);
      gmin = std::min(gmin, g);
    }
    const double spread = gmax - gmin;
    if (!(spread > 0.0) || !std::isfinite(spread)) break;
    const double eta = step / spread;
    for (std::size_t k = 0; k < n; ++k) trial[k] = std::max(sigma[k] * std::exp(-eta * (grad[k] - gmin)), opt.floor);
    detail::project_capped(trial, opt.caps);
    const double v = eval(trial, tgrad);
    if (v < best) {
      best = v;
      sigma.swap(trial);
      grad.swap(tgrad);
      step *= 1.1;
    } else {
      step *= 0.5;
      if (step < 1e-18) break;
    }
    history.push_back(best);
    if (history.size() > opt.window) {
      const double old = history[history.size() - 1 - opt.window];
      if (old - best <= opt.rel_improvement * (1.0 + std::abs(best)) && step < 1e-6) break;
    }
  }
  rep.point = sigma;
  rep.objective = best;
  rep.iterations = it;
  rep.status = it < opt.max_iterations ? SolveStatus::kOptimal : SolveStatus::kIterationCap;
  rep.boundary_suspect = *std::min_element(sigma.begin(), sigma.end()) < 1e-8;
  return rep;
}

// Objective in R^d with a (sub)gradient.
using VectorObjective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct DescentOptions {
  std::size_t max_iterations = 10000;
  double initial_step = 1.0;
  double divergence_norm = 1e9;
};

// First-order descent with steps eta / sqrt(t+1) scaled by an adaptive
// factor (halved on a rejected step, grown on an accepted one). Flags
// divergence when the iterate norm exceeds divergence_norm.
inline SolveReport descend(const VectorObjective& f, std::vector<double> x, const DescentOptions& opt = {}) {
  const std::size_t d = x.size();
  std::vector<double> g(d), trial(d), tg(d);
  double best = f(x, g);
  if (std::isnan(best)) throw NumericError("descent: objective returned NaN");
  double scale = opt.initial_step;
  SolveReport rep;
  std::size_t it = 0;
  std::size_t stall = 0;
  for (; it < opt.max_iterations; ++it) {
    double gn = 0.0;
    for (double v : g) gn += v * v;
    gn = std::sqrt(gn);
    if (gn < 1e-15) break;
    const double eta = scale / std::sqrt(static_cast<double>(it) + 1.0);
    for (std::size_t i = 0; i < d; ++i) trial[i] = x[i] - eta * g[i] / gn;
    const double v = f(trial, tg);
    if (std::isnan(v)) throw NumericError("descent: objective returned NaN");
    if (v < best) {
      const double gain = best - v;
      best = v;
      x.swap(trial);
      g.swap(tg);
      scale *= 1.5;
      stall = gain <= 1e-15 * (1.0 + std::abs(best)) ? stall + 1 : 0;
    } else {
      scale *= 0.5;
      ++stall;
    }
    double xn = 0.0;
    for (double v2 : x) xn = std::max(xn, std::abs(v2));
    if (xn > opt.divergence_norm || best == -kInf) {
      rep.status = SolveStatus::kUnbounded;
      rep.point = x;
      rep.objective = -kInf;
      rep.iterations = it;
      rep.note = "iterate norm exceeded divergence threshold";
      return rep;
    }
    if (scale < 1e-16 || stall > 200) break;
  }
  rep.point = x;
  rep.objective = best;
  rep.iterations = it;
  rep.status = SolveStatus::kOptimal;
  return rep;
}

}  // namespace sysrisk

#endif  // SYSRISK_OPTIMIZER_HPP_
