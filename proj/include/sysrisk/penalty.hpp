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

// Systemic penalty function
//
//   alpha^sys(Q, w) = inf_{S ~ P} alpha(S) + E^S[ g(w . dQ/dS) ]
//
// and the dual values built from it. In scenario masses sigma_k = P_k s_k
// and m_k = (w_i P_k dQ_i/dP(k))_i the divergence is sum_k sigma_k g(m_k / sigma_k).

#ifndef SYSRISK_PENALTY_HPP_
#define SYSRISK_PENALTY_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sysrisk/aggregation.hpp"
#include "sysrisk/base_risk.hpp"
#include "sysrisk/common.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/lagrangian.hpp"
#include "sysrisk/optimizer.hpp"
#include "sysrisk/systemic.hpp"

namespace sysrisk {

struct PenaltyResult {
  ExtendedReal value = kInf;
  std::string method;
  std::vector<double> sigma;  // society masses attaining `value`; empty when +inf
  bool boundary_suspect = false;
  std::size_t iterations = 0;
};

struct PenaltyOptions {
  SimplexOptions simplex{};
  // Candidate society measure evaluated in addition to the search.
  std::optional<Density> hint;
};

namespace detail {

inline void check_dual(const AggregationModel& agg, const DualVariable& dual) {
  if (dual.dim() != agg.dim())
    throw ModelError("dual variable has dimension " + std::to_string(dual.dim()) + ", aggregation expects " +
                     std::to_string(agg.dim()));
}

// m_k = (w_i P_k dQ_i/dP(k))_i, row-major n x d.
inline std::vector<double> weighted_masses(const DualVariable& dual) {
  const std::size_t n = dual.space().size(), d = dual.dim();
  std::vector<double> m(n * d);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < d; ++i) m[k * d + i] = dual.space().prob(k) * dual.weighted_density(i, k);
  return m;
}

// sum_k sigma_k g(m_k / sigma_k); also fills the derivative in sigma.
inline double divergence(const AggregationModel& agg, std::span<const double> m, std::span<const double> sigma,
                         std::span<double> grad = {}) {
  const std::size_t n = sigma.size(), d = m.size() / n;
  std::vector<double> z(d);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < d; ++i) z[i] = m[k * d + i] / sigma[k];
    const ConjugateValue c = agg.conjugate(z);
    if (is_pos_inf(c.g)) return kInf;
    total += sigma[k] * c.g;
    if (!grad.empty()) grad[k] = c.perspective_slope;
  }
  return total;
}

inline double penalty_of_masses(const BaseRiskMeasure& base, const ScenarioSpace& space,
                                std::span<const double> sigma) {
  std::vector<double> dm(sigma.size());
  double mass = 0.0;
  for (double v : sigma) mass += v;
  for (std::size_t k = 0; k < dm.size(); ++k) dm[k] = sigma[k] / mass / space.prob(k);
  return base.penalty(Density(space, std::move(dm)));
}

// argmin KL(sigma | pi) over the simplex with sigma >= lower (or <= upper).
inline std::vector<double> water_fill(std::span<const double> pi, std::span<const double> bound, bool lower) {
  const std::size_t n = pi.size();
  auto at = [&](double c, std::vector<double>& s) {
    double t = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = lower ? std::max(bound[k], c * pi[k]) : std::min(bound[k], c * pi[k]);
      t += s[k];
    }
    return t;
  };
  std::vector<double> s(n);
  double lo = 0.0, hi = 1.0;
  while (at(hi, s) < 1.0 && hi < 1e300) hi *= 2.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid, s) < 1.0) lo = mid;
    else hi = mid;
  }
  at(hi, s);
  const double t = std::accumulate(s.begin(), s.end(), 0.0);
  for (double& v : s) v /= t;
  return s;
}

inline PenaltyResult finite(double value, std::vector<double> sigma, const char* method) {
  PenaltyResult r;
  r.value = value;
  r.sigma = std::move(sigma);
  r.method = method;
  return r;
}

inline PenaltyResult infinite(const char* method) {
  PenaltyResult r;
  r.method = method;
  return r;
}

inline double relative_entropy_masses(std::span<const double> sigma, std::span<const double> pi) {
  double h = 0.0;
  for (std::size_t k = 0; k < sigma.size(); ++k)
    if (sigma[k] > 0.0) h += sigma[k] * std::log(sigma[k] / pi[k]);
  return h;
}

// Feasible masses inside [lower, upper] summing to one, all positive; the
// result interpolates between the bounds.
inline std::optional<std::vector<double>> box_point(std::span<const double> lower, std::span<const double> upper) {
  const std::size_t n = lower.size();
  double sl = 0.0, su = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (lower[k] > upper[k] * (1.0 + 1e-12)) return std::nullopt;
    sl += lower[k];
    su += upper[k];
  }
  if (sl > 1.0 + 1e-12 || su < 1.0 - 1e-12) return std::nullopt;
  if (!std::isfinite(su)) {
    // Unbounded above: put the missing mass where the box allows it,
    // spread evenly over the open coordinates.
    std::vector<double> s(lower.begin(), lower.end());
    std::size_t open = 0;
    for (std::size_t k = 0; k < n; ++k) open += std::isinf(upper[k]) ? 1 : 0;
    for (std::size_t k = 0; k < n; ++k)
      if (std::isinf(upper[k])) s[k] += std::max(0.0, 1.0 - sl) / static_cast<double>(open);
    for (double v : s)
      if (!(v > 0.0)) return std::nullopt;
    return s;
  }
  const double theta = su > sl ? std::clamp((1.0 - sl) / (su - sl), 0.0, 1.0) : 0.0;
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) {
    s[k] = theta > 0.0 ? lower[k] + theta * (upper[k] - lower[k]) : lower[k];
    if (!(s[k] > 0.0)) return std::nullopt;
  }
  return s;
}

// Fast path for the indicator-type conjugates: feasible society masses are
// a box lower <= sigma <= upper (TotalLoss, ResourceAllocation).
inline PenaltyResult box_penalty(const BaseRiskMeasure& base, std::span<const double> pi,
                                 std::vector<double> lower, std::vector<double> upper, const char* method) {
  const std::size_t n = pi.size();
  if (auto* sh = base.get_if<ShiftedExpectation>()) {
    for (std::size_t k = 0; k < n; ++k)
      if (pi[k] < lower[k] * (1.0 - 1e-12) || pi[k] > upper[k] * (1.0 + 1e-12)) return infinite(method);
    return finite(sh->lambda0, std::vector<double>(pi.begin(), pi.end()), method);
  }
  if (auto* av = base.get_if<AverageValueAtRisk>()) {
    for (std::size_t k = 0; k < n; ++k) upper[k] = std::min(upper[k], pi[k] / av->beta);
    auto s = box_point(lower, upper);
    if (!s) return infinite(method);
    return finite(0.0, std::move(*s), method);
  }
  // Entropic: KL projection of pi onto the box. At most one side binds.
  auto s0 = box_point(lower, upper);
  if (!s0) return infinite(method);
  bool has_lower = false, has_upper = false;
  for (std::size_t k = 0; k < n; ++k) {
    has_lower = has_lower || lower[k] > 0.0;
    has_upper = has_upper || std::isfinite(upper[k]);
  }
  std::vector<double> s;
  if (has_lower && has_upper) throw ModelError("penalty: two-sided boxes are not used");
  if (has_lower) s = water_fill(pi, lower, true);
  else if (has_upper) s = water_fill(pi, upper, false);
  else s.assign(pi.begin(), pi.end());
  for (double v : s)
    if (!(v > 0.0)) return infinite(method);
  const double h = relative_entropy_masses(s, pi);
  return finite(h, std::move(s), method);
}

}  // namespace detail

// alpha(S) + E^S[g(w . dQ/dS)] for the society measure of the dual.
inline ExtendedReal alpha_sys_at(const AggregationModel& agg, const BaseRiskMeasure& base, const DualVariable& dual,
                                 const Density& s) {
  detail::check_dual(agg, dual);
  const double a = base.penalty(s);
  if (is_pos_inf(a)) return kInf;
  const auto m = detail::weighted_masses(dual);
  const auto sigma = s.masses();
  for (double v : sigma)
    if (!(v > 0.0)) throw DomainError("penalty: society measure must be equivalent to P");
  return a + detail::divergence(agg, m, sigma);
}

inline PenaltyResult alpha_sys(const AggregationModel& agg, const BaseRiskMeasure& base, const DualVariable& dual,
                               const PenaltyOptions& opt = {}) {
  detail::check_dual(agg, dual);
  const ScenarioSpace& space = dual.space();
  const std::size_t n = space.size(), d = dual.dim();
  const auto pi = space.probs();
  const std::vector<double> m = detail::weighted_masses(dual);

  if (agg.get_if<TotalPL>()) {
    // w . dQ/dS = 1 forces s_k = w_i dQ_i/dP(k) for every i.
    std::vector<double> sigma(n);
    for (std::size_t k = 0; k < n; ++k) {
      sigma[k] = m[k * d];
      for (std::size_t i = 1; i < d; ++i)
        if (std::abs(m[k * d + i] - sigma[k]) > tol::kPathSum * pi[k]) return detail::infinite("closed-form");
      if (!(sigma[k] > 0.0)) return detail::infinite("closed-form");
    }
    const double total = std::accumulate(sigma.begin(), sigma.end(), 0.0);
    if (std::abs(total - 1.0) > tol::kPathSum) return detail::infinite("closed-form");
    const double a = detail::penalty_of_masses(base, space, sigma);
    if (is_pos_inf(a)) return detail::infinite("closed-form");
    return detail::finite(a, std::move(sigma), "closed-form");
  }
  if (agg.get_if<TotalLoss>()) {
    std::vector<double> lower(n, 0.0), upper(n, kInf);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < d; ++i) lower[k] = std::max(lower[k], m[k * d + i]);
    return detail::box_penalty(base, pi, std::move(lower), std::move(upper), "closed-form");
  }
  if (auto* ra = agg.get_if<ResourceAllocation>()) {
    std::vector<double> lower(n, 0.0), upper(n, kInf);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < ra->tasks(); ++j) {
        if (!(ra->profit()[j] > 0.0)) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += ra->usage(i, j) * m[k * d + i];
        upper[k] = std::min(upper[k], s / ra->profit()[j]);
      }
    return detail::box_penalty(base, pi, std::move(lower), std::move(upper), "closed-form");
  }
  if (auto* mf = agg.get_if<MaxFlowPaths>()) {
    // Every path sum of m_k must equal sigma_k.
    std::vector<double> sigma(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& paths = mf->paths();
      double first = 0.0;
      for (std::size_t a : paths.front()) first += m[k * d + a];
      for (const auto& p : paths) {
        double s = 0.0;
        for (std::size_t a : p) s += m[k * d + a];
        if (std::abs(s - first) > tol::kPathSum * (pi[k] + first)) return detail::infinite("closed-form");
      }
      if (!(first > 0.0)) return detail::infinite("closed-form");
      sigma[k] = first;
    }
    const double total = std::accumulate(sigma.begin(), sigma.end(), 0.0);
    if (std::abs(total - 1.0) > tol::kPathSum) return detail::infinite("closed-form");
    const double a = detail::penalty_of_masses(base, space, sigma);
    if (is_pos_inf(a)) return detail::infinite("closed-form");
    return detail::finite(a, std::move(sigma), "closed-form");
  }

  // Finite conjugates: EntropicAgg, Eisenberg-Noe, CCP.
  if (auto* sh = base.get_if<ShiftedExpectation>()) {
    std::vector<double> sigma(pi.begin(), pi.end());
    const double value = sh->lambda0 + detail::divergence(agg, m, sigma);
    return detail::finite(value, std::move(sigma), "closed-form");
  }
  const bool entropic = base.get_if<EntropicRisk>() != nullptr;
  SimplexOptions sopt = opt.simplex;
  if (auto* av = base.get_if<AverageValueAtRisk>()) {
    sopt.caps.resize(n);
    for (std::size_t k = 0; k < n; ++k) sopt.caps[k] = pi[k] / av->beta;
  }
  std::vector<double> grad_buf(n);
  SimplexObjective f = [&](std::span<const double> sigma, std::span<double> grad) {
    double v = detail::divergence(agg, m, sigma, grad);
    if (entropic) {
      for (std::size_t k = 0; k < n; ++k) {
        v += xlogx(sigma[k]) - sigma[k] * std::log(pi[k]);
        grad[k] += std::log(sigma[k] / pi[k]) + 1.0;
      }
    }
    return v;
  };
  std::vector<double> start(pi.begin(), pi.end());
  double hint_value = kInf;
  std::vector<double> hint_sigma;
  if (opt.hint) {
    hint_sigma = opt.hint->masses();
    bool interior = true;
    for (double v : hint_sigma) interior = interior && v > 0.0;
    if (interior) {
      hint_value = alpha_sys_at(agg, base, dual, *opt.hint);
      if (std::isfinite(hint_value)) start = hint_sigma;
    }
  }
  SolveReport rep = minimize_over_simplex(f, start, sopt);
  PenaltyResult out;
  out.method = "mirror-descent";
  out.iterations = rep.iterations;
  out.boundary_suspect = rep.boundary_suspect;
  if (hint_value < rep.objective) {
    out.value = hint_value;
    out.sigma = hint_sigma;
  } else {
    out.value = rep.objective;
    out.sigma = rep.point;
  }
  return out;
}

// Weights times expected losses: sum_i w_i E^{Q_i}[-X_i].
inline double weighted_expected_loss(const WealthProcess& x, const DualVariable& dual) {
  double v = 0.0;
  for (std::size_t i = 0; i < dual.dim(); ++i) {
    if (dual.w[i] == 0.0) continue;
    for (std::size_t k = 0; k < x.scenarios(); ++k) v -= dual.w[i] * x.space().prob(k) * dual.q[i][k] * x.at(k, i);
  }
  return v;
}

// w^T E^Q[-X] - alpha^sys(Q, w), a lower bound on rho^ins.
inline ExtendedReal dual_value(const SystemicModel& m, const DualVariable& dual, const PenaltyOptions& opt = {}) {
  if (!(dual.space() == m.space())) throw ModelError("dual variable lives on a different scenario space");
  const PenaltyResult a = alpha_sys(m.aggregation(), m.base(), dual, opt);
  if (is_pos_inf(a.value)) return -kInf;
  return weighted_expected_loss(m.wealth(), dual) - a.value;
}

// The same bound with the society measure fixed to dual.s.
inline ExtendedReal dual_value_at(const SystemicModel& m, const DualVariable& dual) {
  const double a = alpha_sys_at(m.aggregation(), m.base(), dual, dual.s);
  if (is_pos_inf(a)) return -kInf;
  return weighted_expected_loss(m.wealth(), dual) - a;
}

namespace detail {

// Scales at which an affine conjugate domain can be met: u = 1 for TotalPL
// and unit path sums for MaxFlow. Taking expectations of lambda w_i dQ_i / dS
// forces lambda = 1 / w_i and lambda = 1 / sum_{a in p} w_a respectively.
inline std::vector<double> affine_domain_scales(const AggregationModel& agg, std::span<const double> w) {
  std::vector<double> out;
  if (agg.get_if<TotalPL>()) {
    for (double v : w)
      if (v > 0.0) out.push_back(1.0 / v);
  } else if (const auto* mf = agg.get_if<MaxFlowPaths>()) {
    for (const auto& path : mf->paths()) {
      double t = 0.0;
      for (std::size_t a : path) t += w[a];
      if (t > 0.0) out.push_back(1.0 / t);
    }
  }
  return out;
}

}  // namespace detail

// Positively homogeneous hull inf_{lambda > 0} alpha^sys(Q, lambda w) / lambda
// on a 64-point geometric grid over [1e-4, 1e4] refined by golden section,
// plus the isolated scales where an affine conjugate domain is met.
inline ExtendedReal alpha_sys_homogenized(const AggregationModel& agg, const BaseRiskMeasure& base,
                                          const DualVariable& dual, const PenaltyOptions& opt = {}) {
  auto at = [&](double lambda) {
    std::vector<double> w = dual.w;
    for (double& v : w) v *= lambda;
    DualVariable scaled(dual.q, std::move(w), dual.s);
    const double a = alpha_sys(agg, base, scaled, opt).value;
    return a / lambda;
  };
  const int points = 64;
  const double lo = std::log(1e-4), hi = std::log(1e4);
  std::vector<double> vals(points);
  int best = 0;
  for (int j = 0; j < points; ++j) {
    vals[j] = at(std::exp(lo + (hi - lo) * j / (points - 1)));
    if (vals[j] < vals[best]) best = j;
  }
  double isolated = kInf;
  for (double lambda : detail::affine_domain_scales(agg, dual.w)) isolated = std::min(isolated, at(lambda));
  if (!std::isfinite(vals[best])) return std::min(vals[best], isolated);
  const double step = (hi - lo) / (points - 1);
  const double a = lo + step * std::max(0, best - 1), b = lo + step * std::min(points - 1, best + 1);
  ScalarMin r = golden_section([&](double s) { return at(std::exp(s)); }, a, b, 1e-8);
  return std::min({vals[best], r.value, isolated});
}

// Supporting dual at z: with S* attaining rho at Lambda(X + z) and
// U_k = P_k s*_k grad Lambda(X_k + z), w = sum_k U_k and dQ_i/dP = s* grad_i / w_i.
struct SupportingDual {
  DualVariable dual;
  Density society;
  std::vector<double> point;
};

inline std::optional<SupportingDual> supporting_dual(const SystemicModel& m, std::span<const double> z) {
  const std::size_t n = m.scenarios(), d = m.dim();
  std::vector<double> y(n), state(d);
  std::vector<std::vector<double>> sg(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto row = m.wealth().row(k);
    for (std::size_t i = 0; i < d; ++i) state[i] = row[i] + z[i];
    AggregateEval e = m.aggregation().evaluate_with_supergradient(state);
    if (is_neg_inf(e.value)) return std::nullopt;
    y[k] = e.value;
    sg[k] = std::move(e.supergradient);
  }
  Density s = m.base().optimal_density(y, m.space());
  if (!s.equivalent()) {
    // S* vanishes on some scenarios (AV@R); a tiny admixture of P keeps the
    // dual inside the set of equivalent measures at O(mix) cost in value.
    const double mix = 1e-9;
    std::vector<double> dm(n);
    for (std::size_t k = 0; k < n; ++k) dm[k] = (1.0 - mix) * s[k] + mix;
    s = Density(m.space(), std::move(dm));
  }
  std::vector<double> w(d, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < d; ++i) w[i] += m.space().prob(k) * s[k] * sg[k][i];
  if (*std::max_element(w.begin(), w.end()) <= 0.0) return std::nullopt;
  std::vector<Density> q;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> dm(n, 1.0);
    if (w[i] > 0.0) {
      double mass = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        dm[k] = s[k] * sg[k][i] / w[i];
        mass += m.space().prob(k) * dm[k];
      }
      for (double& v : dm) v /= mass;
    }
    q.emplace_back(m.space(), std::move(dm));
  }
  Density society = s;
  return SupportingDual{DualVariable(std::move(q), std::move(w), Density::reference(m.space())), society,
                        std::vector<double>(z.begin(), z.end())};
}

// Supporting dual at the boundary point z + t 1 of R^sen; for z outside
// R^sen its halfspace separates z.
inline std::optional<SupportingDual> separating_dual(const SystemicModel& m, std::span<const double> z) {
  auto t = detail::feasibility_shift(detail::constraint_of(m), z);
  if (!t) return std::nullopt;
  std::vector<double> zb(z.begin(), z.end());
  for (double& v : zb) v += *t;
  return supporting_dual(m, zb);
}

}  // namespace sysrisk

#endif  // SYSRISK_PENALTY_HPP_
