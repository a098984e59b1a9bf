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

// Sampling-based checks of the dual representations: weak duality for
// rho^ins, the halfspace description of R^sen, the coherent case and the
// shortfall (model uncertainty) form of R^sen.

#ifndef SYSRISK_CHECKS_HPP_
#define SYSRISK_CHECKS_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sysrisk/parallel.hpp"
#include "sysrisk/penalty.hpp"
#include "sysrisk/sampling.hpp"
#include "sysrisk/systemic.hpp"

namespace sysrisk {

// alpha^sys and the expected-loss term of one dual.
struct DualEvaluation {
  double loss = 0.0;        // w^T E^Q[-X]
  PenaltyResult penalty;
  ExtendedReal value() const { return is_pos_inf(penalty.value) ? -kInf : loss - penalty.value; }
};

inline std::vector<DualEvaluation> evaluate_duals(const SystemicModel& m, const std::vector<DualVariable>& duals,
                                                  const PenaltyOptions& opt = {},
                                                  std::size_t threads = thread_count()) {
  return parallel_map(
      duals.size(),
      [&](std::size_t j) {
        DualEvaluation e;
        e.loss = weighted_expected_loss(m.wealth(), duals[j]);
        e.penalty = alpha_sys(m.aggregation(), m.base(), duals[j], opt);
        return e;
      },
      threads);
}

struct WeakDualityReport {
  std::size_t samples = 0;
  std::size_t finite = 0;  // duals with alpha^sys < +inf
  std::size_t violations = 0;
  ExtendedReal rho_ins = 0.0;
  ExtendedReal max_dual_value = -kInf;
  ExtendedReal min_slack = kInf;  // rho_ins - dual value
  bool boundary_suspect = false;
};

inline WeakDualityReport weak_duality_check(const SystemicModel& m, const std::vector<DualVariable>& duals,
                                            double tol = 1e-9, const PenaltyOptions& opt = {},
                                            std::size_t threads = thread_count()) {
  WeakDualityReport r;
  r.samples = duals.size();
  r.rho_ins = rho_ins(m);
  for (const DualEvaluation& e : evaluate_duals(m, duals, opt, threads)) {
    const double v = e.value();
    r.boundary_suspect = r.boundary_suspect || e.penalty.boundary_suspect;
    if (is_neg_inf(v)) continue;
    ++r.finite;
    r.max_dual_value = std::max(r.max_dual_value, v);
    const double slack = r.rho_ins - v;
    r.min_slack = std::min(r.min_slack, slack);
    if (slack < -tol) ++r.violations;
  }
  return r;
}

struct SensitiveDualityReport {
  std::size_t points = 0;
  std::size_t members = 0;
  std::size_t member_violations = 0;    // member z cut off by a dual halfspace
  std::size_t unseparated = 0;          // nonmember z no dual separates
  std::size_t separated_by_optimizer = 0;
  std::vector<std::vector<double>> counterexamples;
};

// Member z must satisfy w^T z >= w^T E^Q[-X] - alpha^sys(Q, w) - slack for
// every dual; a nonmember must violate that inequality for one of the first
// `separation_cap` duals or for the supporting dual at the boundary point
// z + t 1.
inline SensitiveDualityReport sensitive_duality_check(const SystemicModel& m,
                                                      const std::vector<std::vector<double>>& points,
                                                      const std::vector<DualVariable>& duals, double slack = 1e-8,
                                                      std::size_t separation_cap = 1000,
                                                      std::size_t threads = thread_count()) {
  const auto evals = evaluate_duals(m, duals, {}, threads);
  struct Outcome {
    bool member = false, violation = false, separated_by_optimizer = false;
  };
  auto outcomes = parallel_map(
      points.size(),
      [&](std::size_t p) {
        const auto& z = points[p];
        Outcome o;
        o.member = r_sen_membership(m, z);
        bool separated = false;
        for (std::size_t j = 0; j < duals.size(); ++j) {
          const double bound = evals[j].value();
          if (is_neg_inf(bound)) continue;
          const double wz = dot(duals[j].w, z);
          if (o.member && wz < bound - slack) o.violation = true;
          if (!o.member && j < separation_cap && wz < bound) separated = true;
        }
        if (!o.member && !separated) {
          if (auto sd = separating_dual(m, z)) {
            PenaltyOptions popt;
            if (sd->society.equivalent()) popt.hint = sd->society;
            const double bound = dual_value(m, sd->dual, popt);
            if (std::isfinite(bound) && dot(sd->dual.w, z) < bound) {
              separated = true;
              o.separated_by_optimizer = true;
            }
          }
          if (!separated) o.violation = true;
        }
        return o;
      },
      threads);
  SensitiveDualityReport r;
  r.points = points.size();
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Outcome& o = outcomes[p];
    r.members += o.member ? 1 : 0;
    r.separated_by_optimizer += o.separated_by_optimizer ? 1 : 0;
    if (o.violation) {
      if (o.member) ++r.member_violations;
      else ++r.unseparated;
      r.counterexamples.push_back(points[p]);
    }
  }
  return r;
}

struct CoherentReport {
  std::size_t samples = 0;
  std::size_t finite = 0;
  std::size_t nonzero_finite = 0;  // finite alpha^sys with |value| >= 1e-6
  double max_abs_finite = 0.0;
  std::vector<double> gammas;
  std::vector<double> homogeneity_errors;  // |rho_ins(gamma X) - gamma rho_ins(X)|
  bool passed = false;
};

inline CoherentReport coherent_dual_check(const SystemicModel& m, const std::vector<DualVariable>& duals,
                                          std::vector<double> gammas = {0.5, 2.0, 7.0},
                                          std::size_t threads = thread_count()) {
  if (!m.base().coherent()) throw PreconditionError("coherent check: base risk measure must be AV@R");
  if (!m.aggregation().positively_homogeneous())
    throw PreconditionError("coherent check: aggregation " + m.aggregation().kind() + " is not positively homogeneous");
  CoherentReport r;
  r.samples = duals.size();
  for (const DualEvaluation& e : evaluate_duals(m, duals, {}, threads)) {
    if (is_pos_inf(e.penalty.value)) continue;
    ++r.finite;
    r.max_abs_finite = std::max(r.max_abs_finite, std::abs(e.penalty.value));
    if (std::abs(e.penalty.value) >= 1e-6) ++r.nonzero_finite;
  }
  const double base_value = rho_ins(m);
  bool homogeneous = true;
  for (double g : gammas) {
    const double v = rho_ins(m.with_wealth(m.wealth().scaled(g)));
    const double err = (std::isinf(v) && std::isinf(base_value) && v == base_value) ? 0.0 : std::abs(v - g * base_value);
    r.gammas.push_back(g);
    r.homogeneity_errors.push_back(err);
    homogeneous = homogeneous && err <= 1e-8;
  }
  r.passed = homogeneous && r.nonzero_finite == 0;
  return r;
}

struct ModelUncertaintyReport {
  std::size_t points = 0;
  std::size_t measures = 0;  // sampled S with alpha(S) finite
  std::size_t members = 0;
  std::vector<std::vector<double>> counterexamples;
};

// R^sen as the intersection over S of the shortfall sets
// {z : E^S[-Lambda(X + z)] <= alpha(S)}. Only for Lambda(R^d) = R.
inline ModelUncertaintyReport model_uncertainty_check(const SystemicModel& m,
                                                      const std::vector<std::vector<double>>& points,
                                                      const std::vector<Density>& measures,
                                                      std::size_t threads = thread_count()) {
  const ValueRange range = m.aggregation().value_range();
  if (!(std::isinf(range.lo) && range.lo < 0.0 && std::isinf(range.hi) && range.hi > 0.0) || range.has_minus_inf)
    throw PreconditionError("model uncertainty check: the aggregation range must be all of R (" +
                            m.aggregation().kind() + " is not)");
  std::vector<std::pair<const Density*, double>> finite;
  for (const Density& s : measures) {
    const double a = m.base().penalty(s);
    if (std::isfinite(a)) finite.emplace_back(&s, a);
  }
  auto bad = parallel_map(
      points.size(),
      [&](std::size_t p) {
        const auto& z = points[p];
        const bool member = r_sen_membership(m, z);
        for (const auto& [s, a] : finite) {
          const bool passes = shortfall_membership(m.wealth(), m.aggregation(), a, *s, z);
          if (member && !passes) return std::pair{member, true};
        }
        if (!member) {
          // The maximizing measure of the dual representation must reject z.
          const Density s = m.base().optimal_density(aggregate(m, z), m.space());
          const double a = m.base().penalty(s);
          if (std::isfinite(a) && shortfall_membership(m.wealth(), m.aggregation(), a, s, z))
            return std::pair{member, true};
        }
        return std::pair{member, false};
      },
      threads);
  ModelUncertaintyReport r;
  r.points = points.size();
  r.measures = finite.size();
  for (std::size_t p = 0; p < points.size(); ++p) {
    r.members += bad[p].first ? 1 : 0;
    if (bad[p].second) r.counterexamples.push_back(points[p]);
  }
  return r;
}

struct DualOptimum {
  ExtendedReal value = -kInf;
  std::optional<DualVariable> dual;
  std::size_t evaluations = 0;
  ExtendedReal certificate_value = -kInf;  // dual value of the supporting dual at z = 0
};

// Maximizes the dual value over (w, Q) by Nelder-Mead in log u, where
// u_ik = w_i P_k dQ_i/dP(k), starting from u = 1. The supporting dual at
// z = 0 is evaluated as an independent cross-check.
inline DualOptimum optimize_dual(const SystemicModel& m, std::size_t max_evals = 4000) {
  const std::size_t n = m.scenarios(), d = m.dim();
  const ScenarioSpace& space = m.space();
  auto build = [&](const std::vector<double>& logu) {
    std::vector<double> w(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < n; ++k) w[i] += std::exp(logu[i * n + k]);
    std::vector<Density> q;
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> mass(n);
      for (std::size_t k = 0; k < n; ++k) mass[k] = std::exp(logu[i * n + k]) / w[i];
      q.push_back(Density::from_masses(space, mass));
    }
    return DualVariable(std::move(q), std::move(w), Density::reference(space));
  };
  DualOptimum out;
  auto objective = [&](const std::vector<double>& logu) {
    for (double v : logu)
      if (std::abs(v) > 50.0) return kInf;
    const double v = dual_value(m, build(logu));
    return std::isfinite(v) ? -v : kInf;
  };
  SolveReport rep = nelder_mead(objective, std::vector<double>(n * d, 0.0), 0.5, max_evals);
  out.evaluations = rep.iterations;
  if (std::isfinite(rep.objective)) {
    out.value = -rep.objective;
    out.dual = build(rep.point);
  }
  std::vector<double> zero(d, 0.0);
  if (auto sd = supporting_dual(m, zero)) {
    PenaltyOptions popt;
    if (sd->society.equivalent()) popt.hint = sd->society;
    out.certificate_value = dual_value(m, sd->dual, popt);
  }
  return out;
}

}  // namespace sysrisk

#endif  // SYSRISK_CHECKS_HPP_
