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

// Insensitive and sensitive systemic risk measures
//
//   R^ins(X) = { z : rho(Lambda(X)) <= sum_i z_i },
//   R^sen(X) = { z : rho(Lambda(X + z)) <= 0 },
//
// and the scalarizations rho^sen_w(X) = inf { w^T z : z in R^sen(X) }.

#ifndef SYSRISK_SYSTEMIC_HPP_
#define SYSRISK_SYSTEMIC_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sysrisk/aggregation.hpp"
#include "sysrisk/base_risk.hpp"
#include "sysrisk/common.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/lagrangian.hpp"
#include "sysrisk/linear_program.hpp"

namespace sysrisk {

inline constexpr const char* kAssumptionMessage =
    "Assumption: rho(0) must lie in the interior of the aggregation range";

enum class AssumptionPolicy { kEnforce, kWaive };

class SystemicModel {
 public:
  SystemicModel(WealthProcess x, AggregationModel agg, BaseRiskMeasure base,
                AssumptionPolicy policy = AssumptionPolicy::kEnforce)
      : x_(std::move(x)), agg_(std::move(agg)), base_(std::move(base)) {
    if (x_.dim() != agg_.dim())
      throw ModelError("systemic model: wealth has " + std::to_string(x_.dim()) + " columns, aggregation expects " +
                       std::to_string(agg_.dim()));
    assumption_ = agg_.value_range().in_interior(base_.rho_zero());
    if (policy == AssumptionPolicy::kEnforce && !assumption_) throw AssumptionError(assumption_detail());
  }

  const WealthProcess& wealth() const { return x_; }
  const AggregationModel& aggregation() const { return agg_; }
  const BaseRiskMeasure& base() const { return base_; }
  const ScenarioSpace& space() const { return x_.space(); }
  std::size_t dim() const { return x_.dim(); }
  std::size_t scenarios() const { return x_.scenarios(); }

  bool assumption_holds() const { return assumption_; }
  void require_assumption() const {
    if (!assumption_) throw AssumptionError(assumption_detail());
  }

  SystemicModel with_wealth(WealthProcess x) const {
    return SystemicModel(std::move(x), agg_, base_, assumption_ ? AssumptionPolicy::kEnforce : AssumptionPolicy::kWaive);
  }

 private:
  std::string assumption_detail() const {
    const ValueRange r = agg_.value_range();
    std::ostringstream os;
    os << kAssumptionMessage << " (rho(0) = " << base_.rho_zero() << ", range of " << agg_.kind() << " = ("
       << r.lo << ", " << r.hi << "))";
    return os.str();
  }

  WealthProcess x_;
  AggregationModel agg_;
  BaseRiskMeasure base_;
  bool assumption_ = false;
};

// Lambda(X(omega_k) + z) for every scenario; -inf marks infeasible states.
inline std::vector<double> aggregate(const SystemicModel& m, std::span<const double> z = {}) {
  const std::size_t d = m.dim();
  std::vector<double> out(m.scenarios()), state(d);
  for (std::size_t k = 0; k < m.scenarios(); ++k) {
    auto row = m.wealth().row(k);
    for (std::size_t i = 0; i < d; ++i) state[i] = row[i] + (z.empty() ? 0.0 : z[i]);
    out[k] = m.aggregation().evaluate(state);
  }
  return out;
}

// rho of an aggregate vector with the extended convention for -inf.
inline double rho_extended(const SystemicModel& m, std::span<const double> y) {
  for (double v : y)
    if (is_neg_inf(v)) return kInf;
  return m.base().rho(y, m.space());
}

inline ExtendedReal rho_ins(const SystemicModel& m) { return rho_extended(m, aggregate(m)); }

inline bool r_ins_membership(const SystemicModel& m, std::span<const double> z) {
  const double r = rho_ins(m);
  if (is_pos_inf(r)) return false;
  double s = 0.0;
  for (double v : z) s += v;
  return r <= s;
}

// c(z) = rho(Lambda(X + z)), +inf when a scenario is infeasible.
inline double sensitive_constraint(const SystemicModel& m, std::span<const double> z) {
  return rho_extended(m, aggregate(m, z));
}

inline bool r_sen_membership(const SystemicModel& m, std::span<const double> z) {
  return sensitive_constraint(m, z) <= 0.0;
}

// c(z) with the subgradient -sum_k P_k s*_k grad Lambda(X_k + z), where S*
// attains the dual representation of rho at Lambda(X + z).
inline double sensitive_constraint_with_gradient(const SystemicModel& m, std::span<const double> z,
                                                 std::span<double> grad) {
  const std::size_t d = m.dim(), n = m.scenarios();
  std::vector<double> y(n), state(d);
  std::vector<std::vector<double>> sg(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto row = m.wealth().row(k);
    for (std::size_t i = 0; i < d; ++i) state[i] = row[i] + z[i];
    AggregateEval e = m.aggregation().evaluate_with_supergradient(state);
    if (is_neg_inf(e.value)) return kInf;
    y[k] = e.value;
    sg[k] = std::move(e.supergradient);
  }
  const double value = m.base().rho(y, m.space());
  const Density s = m.base().optimal_density(y, m.space());
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double wk = m.space().prob(k) * s[k];
    for (std::size_t i = 0; i < d; ++i) grad[i] -= wk * sg[k][i];
  }
  return value;
}

// z-bar = (||X_i||_inf)_i + t 1 for t = 1, 2, 4, ..., 2^20 until the
// constraint is strictly negative.
inline std::optional<std::vector<double>> find_slater_point(const SystemicModel& m) {
  m.require_assumption();
  const std::vector<double> base = m.wealth().sup_norms();
  std::vector<double> z(base.size());
  for (int e = 0; e <= 20; ++e) {
    const double t = std::ldexp(1.0, e);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = base[i] + t;
    if (sensitive_constraint(m, z) < -1e-6) return z;
  }
  return std::nullopt;
}

struct ScalarizationOptions {
  bool cross_check = true;
  double tol_scalarization = tol::kScalarization;
  LagrangianOptions lagrangian{};
};

struct ScalarizationResult {
  ExtendedReal value = 0.0;
  std::vector<double> z;  // minimizer; empty when unbounded
  bool unbounded = false;
  std::string method;     // closed-form | lp | cutting-plane | lagrangian
  std::optional<SolveReport> primary;
  std::optional<SolveReport> lagrangian;
  // |primary - lagrangian| when both ran.
  double cross_check_delta = 0.0;
};

namespace detail {

inline void check_weights(std::span<const double> w, std::size_t d) {
  if (w.size() != d)
    throw ModelError("weights have length " + std::to_string(w.size()) + ", expected " + std::to_string(d));
  double mx = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) throw ModelError("weights must be finite and nonnegative");
    mx = std::max(mx, v);
  }
  if (mx <= 0.0) throw ModelError("weights must not all vanish");
}

// LP over (z, hypograph variables) describing R^sen without the risk
// constraint. v[k] is the aggregate of scenario k.
struct SensitiveLp {
  LinearProgram lp;
  std::vector<std::size_t> z;
  std::vector<AffineExpr> v;
};

inline SensitiveLp sensitive_lp(const SystemicModel& m, double box = kInf) {
  SensitiveLp s;
  for (std::size_t i = 0; i < m.dim(); ++i) s.z.push_back(s.lp.add_variable(-box, box));
  for (std::size_t k = 0; k < m.scenarios(); ++k)
    s.v.push_back(m.aggregation().append_hypograph(s.lp, m.wealth().row(k), s.z).value);
  return s;
}

inline ScalarizationResult from_lp(const SensitiveLp& s, const SolveReport& rep, std::span<const double> w,
                                   const char* method) {
  ScalarizationResult out;
  out.method = method;
  out.primary = rep;
  if (rep.status == SolveStatus::kUnbounded) {
    out.unbounded = true;
    out.value = -kInf;
    return out;
  }
  if (rep.status == SolveStatus::kInfeasible) {
    out.value = kInf;
    return out;
  }
  for (std::size_t i = 0; i < s.z.size(); ++i) out.z.push_back(rep.point[s.z[i]]);
  out.value = dot(w, out.z);
  return out;
}

// Exact LP: maximize -w^T z subject to rho(v) <= 0 for LP-representable rho.
inline ScalarizationResult rho_sen_lp(const SystemicModel& m, std::span<const double> w) {
  SensitiveLp s = sensitive_lp(m);
  AffineExpr r = m.base().append_risk(s.lp, s.v, m.space());
  s.lp.add_row(r, RowSense::kLe, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) s.lp.add_objective(s.z[i], -w[i]);
  return from_lp(s, solve_lp(s.lp), w, "lp");
}

// Outer approximation of { v : E[exp(-v)] <= 1 } by tangent cuts (Kelley).
// A box keeps the relaxations bounded; a minimizer on the box boundary
// certifies an unbounded scalarization.
inline ScalarizationResult rho_sen_cutting_plane(const SystemicModel& m, std::span<const double> w) {
  const auto pr = m.space().probs();
  double scale = 1.0;
  for (double v : m.wealth().sup_norms()) scale = std::max(scale, v);
  const double box = 1e6 * scale;
  SensitiveLp s = sensitive_lp(m, box);
  for (std::size_t i = 0; i < w.size(); ++i) s.lp.add_objective(s.z[i], -w[i]);
  const std::size_t n = m.scenarios();
  std::vector<double> vhat(n, 0.0);
  SolveReport rep;
  std::size_t total_iter = 0;
  for (int round = 0; round < 500; ++round) {
    // F(vhat) + sum_k dF_k (v_k - vhat_k) <= 1 with F(v) = sum_k P_k exp(-v_k).
    AffineExpr cut;
    double f0 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double e = pr[k] * std::exp(-vhat[k]);
      f0 += e;
      cut.constant += e * vhat[k];
      for (const auto& [j, c] : s.v[k].terms) cut.add(j, -e * c);
      cut.constant -= e * s.v[k].constant;
    }
    s.lp.add_row(cut, RowSense::kLe, 1.0 - f0);
    rep = solve_lp(s.lp);
    total_iter += rep.iterations;
    if (rep.status != SolveStatus::kOptimal) break;
    double fv = 0.0, mx = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      vhat[k] = s.v[k].eval(rep.point);
      mx = std::max(mx, -vhat[k]);
    }
    for (std::size_t k = 0; k < n; ++k) fv += pr[k] * std::exp(-vhat[k] - mx);
    if (std::log(fv) + mx <= 1e-11) break;
  }
  rep.iterations = total_iter;
  ScalarizationResult out = from_lp(s, rep, w, "cutting-plane");
  if (rep.status == SolveStatus::kOptimal) {
    for (std::size_t i = 0; i < out.z.size(); ++i)
      if (std::abs(out.z[i]) >= box * (1.0 - 1e-9) && w[i] > 0.0) {
        out.unbounded = true;
        out.value = -kInf;
        out.z.clear();
        return out;
      }
  }
  return out;
}

// Inner problem of the Lagrangian for LP-representable pairs:
// inf_z w^T z + lambda rho(v(z)).
inline InnerSolver lp_inner(const SystemicModel& m, std::span<const double> w) {
  std::vector<double> wv(w.begin(), w.end());
  return [&m, wv](double lambda, const std::vector<double>&) {
    SensitiveLp s = sensitive_lp(m);
    AffineExpr r = m.base().append_risk(s.lp, s.v, m.space());
    s.lp.add_objective(r, -lambda);
    for (std::size_t i = 0; i < wv.size(); ++i) s.lp.add_objective(s.z[i], -wv[i]);
    SolveReport rep = solve_lp(s.lp);
    InnerSolution sol;
    if (rep.status == SolveStatus::kUnbounded) {
      sol.value = -kInf;
      return sol;
    }
    if (rep.status != SolveStatus::kOptimal)
      throw NumericError("scalarization: inner LP ended with status " + std::string(to_string(rep.status)));
    sol.value = -rep.objective;
    for (std::size_t zi : s.z) sol.z.push_back(rep.point[zi]);
    return sol;
  };
}

inline ConstraintFn constraint_of(const SystemicModel& m) {
  return [&m](std::span<const double> z, std::span<double> grad) {
    return sensitive_constraint_with_gradient(m, z, grad);
  };
}

}  // namespace detail

inline SolveReport scalarize_lagrangian(const SystemicModel& m, std::span<const double> w,
                                        const ScalarizationOptions& opt = {}) {
  m.require_assumption();
  detail::check_weights(w, m.dim());
  auto slater = find_slater_point(m);
  if (!slater) throw PreconditionError("scalarization: no Slater point found");
  std::optional<InnerSolver> inner;
  if (m.aggregation().polyhedral() && m.base().polyhedral()) inner = detail::lp_inner(m, w);
  return lagrange_dual_scalarization(w, detail::constraint_of(m), *slater, inner, opt.lagrangian);
}

// rho^sen_w(X). TotalPL has the closed form a rho^ins for w = a 1 and -inf
// otherwise; LP-representable pairs are solved exactly and cross-checked
// against the Lagrangian; a polyhedral Lambda with entropic rho uses tangent
// cuts; the remaining pairs use the Lagrangian directly.
inline ScalarizationResult rho_sen(const SystemicModel& m, std::span<const double> w,
                                   const ScalarizationOptions& opt = {}) {
  m.require_assumption();
  detail::check_weights(w, m.dim());
  auto slater = find_slater_point(m);
  if (!slater) throw PreconditionError("scalarization: no Slater point found");

  ScalarizationResult out;
  const AggregationModel& agg = m.aggregation();
  if (agg.get_if<TotalPL>()) {
    const double wmax = *std::max_element(w.begin(), w.end());
    const double wmin = *std::min_element(w.begin(), w.end());
    out.method = "closed-form";
    if (wmax - wmin <= 1e-12 * wmax) {
      const double r = rho_ins(m);
      out.value = wmax * r;
      out.z.assign(m.dim(), r / static_cast<double>(m.dim()));
    } else {
      out.unbounded = true;
      out.value = -kInf;
    }
    if (opt.cross_check && m.base().polyhedral()) {
      ScalarizationResult lp = detail::rho_sen_lp(m, w);
      out.primary = lp.primary;
      out.cross_check_delta = (lp.unbounded && out.unbounded) ? 0.0 : std::abs(lp.value - out.value);
    }
    return out;
  }

  if (agg.polyhedral() && m.base().polyhedral()) {
    out = detail::rho_sen_lp(m, w);
  } else if (agg.polyhedral()) {
    out = detail::rho_sen_cutting_plane(m, w);
  } else {
    SolveReport rep = scalarize_lagrangian(m, w, opt);
    out.method = "lagrangian";
    out.lagrangian = rep;
    if (rep.status == SolveStatus::kUnbounded) {
      out.unbounded = true;
      out.value = -kInf;
    } else {
      out.value = rep.objective;
      out.z = rep.point;
    }
    return out;
  }

  if (opt.cross_check && !out.unbounded && agg.polyhedral() && m.base().polyhedral()) {
    SolveReport rep = scalarize_lagrangian(m, w, opt);
    out.lagrangian = rep;
    out.cross_check_delta = rep.status == SolveStatus::kUnbounded ? kInf : std::abs(rep.dual_bound - out.value);
  }
  return out;
}

// Shortfall acceptance E^S[-Lambda(X + z)] <= lambda0.
inline bool shortfall_membership(const WealthProcess& x, const AggregationModel& agg, double lambda0,
                                 const Density& s, std::span<const double> z) {
  const ValueRange r = agg.value_range();
  if (!(-r.hi < lambda0 && lambda0 < -r.lo))
    throw PreconditionError("shortfall: lambda0 must be an interior point of -Lambda(R^d)");
  if (!(s.space() == x.space())) throw ModelError("shortfall: density on a different scenario space");
  std::vector<double> state(x.dim());
  double e = 0.0;
  for (std::size_t k = 0; k < x.scenarios(); ++k) {
    auto row = x.row(k);
    for (std::size_t i = 0; i < x.dim(); ++i) state[i] = row[i] + z[i];
    const double v = agg.evaluate(state);
    if (is_neg_inf(v)) return false;
    e -= x.space().prob(k) * s[k] * v;
  }
  return e <= lambda0;
}

struct Halfspace {
  std::vector<double> normal;
  ExtendedReal offset = 0.0;
  std::string status;  // ok | unbounded direction | error
  std::vector<double> point;
  std::string message;
};

struct HalfspaceSet {
  std::vector<Halfspace> halfspaces;
};

// Directions w = (1 - t, t), t = j / count, j = 0..count-1.
inline std::vector<std::vector<double>> simplex_directions(std::size_t count) {
  std::vector<std::vector<double>> out;
  for (std::size_t j = 0; j < count; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(count);
    out.push_back({1.0 - t, t});
  }
  return out;
}

}  // namespace sysrisk

#endif  // SYSRISK_SYSTEMIC_HPP_
