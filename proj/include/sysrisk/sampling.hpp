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

// Seeded random dual variables and measures.
//
// Two schemes. The uniform one draws Q_i and S from Dirichlet(1) and the
// weights from |Normal| rescaled by a log-uniform factor; for most models
// these duals have alpha^sys = +inf. The domain-aware one picks S first,
// then per-scenario vectors z_k in the domain of the conjugate and sets
// w_i dQ_i/dP(k) = s_k z_ik, so that alpha^sys is finite.

#ifndef SYSRISK_SAMPLING_HPP_
#define SYSRISK_SAMPLING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sysrisk/aggregation.hpp"
#include "sysrisk/base_risk.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/optimizer.hpp"
#include "sysrisk/systemic.hpp"

namespace sysrisk {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 42;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * uniform01(rng));
}

// Scenario masses from a symmetric Dirichlet(1), each at least `floor`.
inline std::vector<double> dirichlet_masses(Rng& rng, std::size_t n, double floor = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> s(n);
  double t = 0.0;
  for (double& v : s) t += v = e(rng);
  for (double& v : s) v = std::max(v / t, floor);
  t = 0.0;
  for (double v : s) t += v;
  for (double& v : s) v /= t;
  return s;
}

inline Density random_density(Rng& rng, const ScenarioSpace& space, double floor = 0.0) {
  return Density::from_masses(space, dirichlet_masses(rng, space.size(), floor));
}

// Uniform scheme.
inline DualVariable sample_dual_uniform(Rng& rng, const ScenarioSpace& space, std::size_t d) {
  std::vector<Density> q;
  for (std::size_t i = 0; i < d; ++i) q.push_back(random_density(rng, space));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(d);
  double l1 = 0.0;
  for (double& v : w) l1 += v = std::abs(normal(rng));
  const double scale = log_uniform(rng, 0.1, 10.0);
  for (double& v : w) v = v / l1 * scale;
  Density s = random_density(rng, space, 1e-6);
  return DualVariable(std::move(q), std::move(w), std::move(s));
}

namespace detail {

inline Density sample_society(Rng& rng, const BaseRiskMeasure& base, const ScenarioSpace& space) {
  if (base.get_if<ShiftedExpectation>()) return Density::reference(space);
  std::vector<double> sigma = dirichlet_masses(rng, space.size(), 1e-6);
  if (auto* av = base.get_if<AverageValueAtRisk>()) {
    std::vector<double> caps(space.size());
    // A hair inside the cap so the penalty test passes after rounding.
    for (std::size_t k = 0; k < caps.size(); ++k) caps[k] = space.prob(k) / av->beta * (1.0 - 1e-12);
    if (av->beta >= 1.0) return Density::reference(space);
    project_capped(sigma, caps);
  }
  return Density::from_masses(space, sigma);
}

// A point of dom g, drawn per model.
inline std::vector<double> sample_conjugate_point(Rng& rng, const AggregationModel& agg) {
  const std::size_t d = agg.dim();
  std::vector<double> z(d);
  if (agg.get_if<TotalPL>()) {
    std::fill(z.begin(), z.end(), 1.0);
  } else if (agg.get_if<TotalLoss>()) {
    for (double& v : z) v = uniform01(rng);
  } else if (agg.get_if<EntropicAgg>()) {
    for (double& v : z) v = log_uniform(rng, std::exp(-3.0), std::exp(3.0));
  } else if (auto* ra = agg.get_if<ResourceAllocation>()) {
    for (double& v : z) v = 0.05 + uniform01(rng);
    double ratio = kInf;
    for (std::size_t j = 0; j < ra->tasks(); ++j) {
      if (!(ra->profit()[j] > 0.0)) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += ra->usage(i, j) * z[i];
      ratio = std::min(ratio, s / ra->profit()[j]);
    }
    const double scale = (1.0 + uniform01(rng)) / ratio;
    for (double& v : z) v *= scale;
  } else if (auto* mf = agg.get_if<MaxFlowPaths>()) {
    // theta on the arcs leaving the source plus 1 - theta on the arcs into
    // the sink: each simple path crosses each set exactly once.
    const double theta = uniform01(rng);
    for (std::size_t a = 0; a < d; ++a) {
      const auto& arc = mf->arcs()[a];
      if (!mf->on_path(a)) {
        z[a] = uniform01(rng);
        continue;
      }
      if (arc.first == mf->source()) z[a] += theta;
      if (arc.second == mf->sink()) z[a] += 1.0 - theta;
    }
  } else {
    // Eisenberg-Noe and CCP: the conjugate is finite on the whole orthant.
    for (double& v : z) v = uniform01(rng) < 0.2 ? 0.0 : 2.0 * uniform01(rng);
  }
  return z;
}

}  // namespace detail

// Domain-aware scheme; returns the uniform scheme's draw if the construction
// ends with all weights zero.
inline DualVariable sample_dual_feasible(Rng& rng, const AggregationModel& agg, const BaseRiskMeasure& base,
                                         const ScenarioSpace& space) {
  const std::size_t n = space.size(), d = agg.dim();
  Density s = detail::sample_society(rng, base, space);
  const auto sigma = s.masses();
  std::vector<double> u(n * d), w(d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto z = detail::sample_conjugate_point(rng, agg);
    for (std::size_t i = 0; i < d; ++i) {
      u[k * d + i] = sigma[k] * z[i];
      w[i] += u[k * d + i];
    }
  }
  if (*std::max_element(w.begin(), w.end()) <= 0.0) return sample_dual_uniform(rng, space, d);
  std::vector<Density> q;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> dm(n, 1.0);
    if (w[i] > 0.0)
      for (std::size_t k = 0; k < n; ++k) dm[k] = u[k * d + i] / (w[i] * space.prob(k));
    q.push_back(Density::from_masses(space, [&] {
      std::vector<double> mass(n);
      double t = 0.0;
      for (std::size_t k = 0; k < n; ++k) t += mass[k] = space.prob(k) * dm[k];
      for (double& v : mass) v /= t;
      return mass;
    }()));
  }
  return DualVariable(std::move(q), std::move(w), std::move(s));
}

// `count` duals alternating between the two schemes, generated in order
// from one engine seeded with `seed`.
inline std::vector<DualVariable> sample_duals(const SystemicModel& m, std::size_t count,
                                              std::uint64_t seed = kDefaultSeed) {
  Rng rng(seed);
  std::vector<DualVariable> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    if (j % 2 == 0) out.push_back(sample_dual_feasible(rng, m.aggregation(), m.base(), m.space()));
    else out.push_back(sample_dual_uniform(rng, m.space(), m.dim()));
  }
  return out;
}

// Capital vectors scattered around the scale of X: each coordinate uniform
// on [-B, B] with B = 2 max ||X_i||_inf + 1.
inline std::vector<std::vector<double>> sample_capital(Rng& rng, const WealthProcess& x, std::size_t count) {
  const auto norms = x.sup_norms();
  const double b = 2.0 * *std::max_element(norms.begin(), norms.end()) + 1.0;
  std::vector<std::vector<double>> out(count, std::vector<double>(x.dim()));
  for (auto& z : out)
    for (double& v : z) v = b * (2.0 * uniform01(rng) - 1.0);
  return out;
}

}  // namespace sysrisk

#endif  // SYSRISK_SAMPLING_HPP_
