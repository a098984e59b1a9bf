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

// Aggregation functions Lambda and their conjugates
//
//   g(z) = sup_x (Lambda(x) - z^T x),  z >= 0.
//
// The polyhedral models also expose an LP description of their hypograph,
// which the systemic layer reuses for exact scalarizations.

#ifndef SYSRISK_AGGREGATION_HPP_
#define SYSRISK_AGGREGATION_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sysrisk/clearing.hpp"
#include "sysrisk/common.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/linear_program.hpp"

namespace sysrisk {

// Interval (lo, hi) of finite values of Lambda, endpoints possibly
// infinite. has_minus_inf marks models that also return the -inf sentinel.
struct ValueRange {
  double lo = -kInf;
  double hi = kInf;
  bool lo_closed = false;
  bool hi_closed = false;
  bool has_minus_inf = false;

  bool in_interior(double v) const { return lo < v && v < hi; }
};

// Value of g together with g(z) - grad g(z)^T z, the derivative of the
// perspective t -> t g(m / t) with respect to t.
struct ConjugateValue {
  double g = 0.0;
  double perspective_slope = 0.0;
};

// LP handle returned by append_hypograph: `value` is an affine expression
// whose admissible values are exactly those <= Lambda(x + z). x_rows[i] is
// the row whose right-hand side carries x_i (or npos).
struct Hypograph {
  AffineExpr value;
  std::vector<std::size_t> x_rows;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// z_vars[i] is the LP variable of the capital z_i, or npos when z_i = 0.
using CapitalVars = std::span<const std::size_t>;

namespace detail {

inline constexpr double kIndicatorTol = 1e-12;

inline void check_conjugate_arg(std::span<const double> z, std::size_t d) {
  if (z.size() != d)
    throw ModelError("conjugate: argument has length " + std::to_string(z.size()) + ", expected " + std::to_string(d));
  for (double v : z)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("conjugate: argument must be finite and nonnegative");
}

inline void check_state(std::span<const double> x, std::size_t d) {
  if (x.size() != d)
    throw ModelError("aggregation: state has length " + std::to_string(x.size()) + ", expected " + std::to_string(d));
  for (double v : x)
    if (!std::isfinite(v)) throw ModelError("aggregation: state entries must be finite");
}

inline void add_capital(std::vector<std::pair<std::size_t, double>>& terms, CapitalVars z, std::size_t i) {
  if (!z.empty() && z[i] != Hypograph::npos) terms.emplace_back(z[i], -1.0);
}

}  // namespace detail

struct TotalPL {
  std::size_t d = 1;

  std::size_t dim() const { return d; }
  const char* kind() const { return "total_pl"; }
  double evaluate(std::span<const double> x) const {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  ConjugateValue conjugate(std::span<const double> z) const {
    for (double v : z)
      if (std::abs(v - 1.0) > tol::kPathSum) return {kInf, 0.0};
    return {};
  }
  ValueRange value_range() const { return {}; }
  std::vector<double> supergradient(std::span<const double>) const { return std::vector<double>(d, 1.0); }
  Hypograph append_hypograph(LinearProgram&, std::span<const double> x, CapitalVars z) const {
    Hypograph h;
    h.value.constant = evaluate(x);
    for (std::size_t i = 0; i < d; ++i)
      if (!z.empty() && z[i] != Hypograph::npos) h.value.add(z[i], 1.0);
    h.x_rows.assign(d, Hypograph::npos);
    return h;
  }
  bool polyhedral() const { return true; }
  bool positively_homogeneous() const { return true; }
};

struct TotalLoss {
  std::size_t d = 1;

  std::size_t dim() const { return d; }
  const char* kind() const { return "total_loss"; }
  double evaluate(std::span<const double> x) const {
    double s = 0.0;
    for (double v : x) s -= negative_part(v);
    return s;
  }
  ConjugateValue conjugate(std::span<const double> z) const {
    for (double v : z)
      if (v > 1.0 + detail::kIndicatorTol) return {kInf, 0.0};
    return {};
  }
  ValueRange value_range() const { return {-kInf, 0.0, false, true, false}; }
  std::vector<double> supergradient(std::span<const double> x) const {
    std::vector<double> out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = x[i] <= 0.0 ? 1.0 : 0.0;
    return out;
  }
  // e_i >= 0, -e_i - z_i <= x_i, value = -sum e_i.
  Hypograph append_hypograph(LinearProgram& lp, std::span<const double> x, CapitalVars z) const {
    Hypograph h;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t e = lp.add_variable(0.0, kInf);
      std::vector<std::pair<std::size_t, double>> terms{{e, -1.0}};
      detail::add_capital(terms, z, i);
      h.x_rows.push_back(lp.add_row(std::move(terms), RowSense::kLe, x[i]));
      h.value.add(e, -1.0);
    }
    return h;
  }
  bool polyhedral() const { return true; }
  bool positively_homogeneous() const { return true; }
};

struct EntropicAgg {
  std::size_t d = 1;

  std::size_t dim() const { return d; }
  const char* kind() const { return "entropic"; }
  double evaluate(std::span<const double> x) const {
    double s = 0.0;
    for (double v : x) s -= std::exp(-v - 1.0);
    return s;
  }
  ConjugateValue conjugate(std::span<const double> z) const {
    ConjugateValue out;
    for (double v : z) {
      out.g += xlogx(v);
      out.perspective_slope -= v;
    }
    return out;
  }
  ValueRange value_range() const { return {-kInf, 0.0, false, false, false}; }
  std::vector<double> supergradient(std::span<const double> x) const {
    std::vector<double> out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = std::exp(-x[i] - 1.0);
    return out;
  }
  Hypograph append_hypograph(LinearProgram&, std::span<const double>, CapitalVars) const {
    throw PreconditionError("entropic aggregation has no polyhedral hypograph");
  }
  bool polyhedral() const { return false; }
  bool positively_homogeneous() const { return false; }
};

namespace detail {

// Shared by the plain and the CCP Eisenberg-Noe models.
inline Hypograph payment_hypograph(const PaymentSystem& sys, LinearProgram& lp, std::span<const double> x,
                                   CapitalVars z) {
  Hypograph h;
  const std::size_t d = sys.size();
  const std::size_t first = lp.num_vars();
  for (std::size_t i = 0; i < d; ++i) {
    lp.add_variable(0.0, sys.pbar(i));
    h.value.add(first + i, sys.rel_society(i));
  }
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<std::pair<std::size_t, double>> terms{{first + i, 1.0}};
    for (std::size_t j = 0; j < d; ++j)
      if (j != i && sys.rel(j, i) != 0.0) terms.emplace_back(first + j, -sys.rel(j, i));
    add_capital(terms, z, i);
    h.x_rows.push_back(lp.add_row(std::move(terms), RowSense::kLe, x[i]));
  }
  return h;
}

// g(z) = sum_i c_i(z)^+ with c_i(z) = sum_j l_ij (z_j - z_i), z_0 = 1.
inline ConjugateValue payment_conjugate(const LiabilityNetwork& net, std::span<const double> z) {
  ConjugateValue out;
  const std::size_t n = net.nodes();
  for (std::size_t i = 1; i < n; ++i) {
    double c = net(i, 0) * (1.0 - z[i - 1]);
    for (std::size_t j = 1; j < n; ++j)
      if (j != i) c += net(i, j) * (z[j - 1] - z[i - 1]);
    if (c > 0.0) {
      out.g += c;
      out.perspective_slope += net(i, 0);
    }
  }
  return out;
}

}  // namespace detail

class EisenbergNoe {
 public:
  explicit EisenbergNoe(LiabilityNetwork net) : net_(std::move(net)), sys_((require_valid_network(net_), net_)) {}

  std::size_t dim() const { return sys_.size(); }
  const char* kind() const { return "eisenberg_noe"; }
  const LiabilityNetwork& network() const { return net_; }
  const PaymentSystem& system() const { return sys_; }

  ConjugateValue conjugate(std::span<const double> z) const { return detail::payment_conjugate(net_, z); }
  ValueRange value_range() const { return {0.0, sys_.max_equity(), true, true, true}; }
  Hypograph append_hypograph(LinearProgram& lp, std::span<const double> x, CapitalVars z) const {
    return detail::payment_hypograph(sys_, lp, x, z);
  }
  bool polyhedral() const { return true; }
  bool positively_homogeneous() const { return false; }

 private:
  LiabilityNetwork net_;
  PaymentSystem sys_;
};

// Eisenberg-Noe with a central counterparty. The state has d+1 entries,
// the last one being the CCP's own wealth.
class EisenbergNoeCCP {
 public:
  explicit EisenbergNoeCCP(LiabilityNetwork base)
      : base_(std::move(base)), ccp_(ccp_transform(base_)), sys_(ccp_) {}

  std::size_t dim() const { return sys_.size(); }
  const char* kind() const { return "eisenberg_noe_ccp"; }
  const LiabilityNetwork& base_network() const { return base_; }
  const LiabilityNetwork& network() const { return ccp_; }
  const PaymentSystem& system() const { return sys_; }

  ConjugateValue conjugate(std::span<const double> z) const { return detail::payment_conjugate(ccp_, z); }
  ValueRange value_range() const { return {0.0, sys_.max_equity(), true, true, true}; }
  Hypograph append_hypograph(LinearProgram& lp, std::span<const double> x, CapitalVars z) const {
    return detail::payment_hypograph(sys_, lp, x, z);
  }
  bool polyhedral() const { return true; }
  bool positively_homogeneous() const { return false; }

 private:
  LiabilityNetwork base_;
  LiabilityNetwork ccp_;
  PaymentSystem sys_;
};

// max p^T u subject to A u <= x, u >= 0; A is d x m, stored row-major.
class ResourceAllocation {
 public:
  ResourceAllocation(std::vector<double> profit, std::size_t d, std::vector<double> usage)
      : p_(std::move(profit)), d_(d), a_(std::move(usage)) {
    const std::size_t m = p_.size();
    if (d_ == 0 || m == 0) throw ModelError("resource allocation: need at least one resource and one task");
    if (a_.size() != d_ * m) throw ModelError("resource allocation: usage matrix must be d x m");
    for (double v : p_)
      if (!std::isfinite(v) || v < 0.0) throw ModelError("resource allocation: profits must be nonnegative");
    for (double v : a_)
      if (!std::isfinite(v) || v < 0.0) throw ModelError("resource allocation: usage must be nonnegative");
    bool productive = false;
    for (std::size_t j = 0; j < m; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < d_; ++i) col += a_[i * m + j];
      if (col == 0.0 && p_[j] > 0.0)
        throw ModelError("resource allocation: task " + std::to_string(j) +
                         " has positive profit and uses no resource (unbounded aggregation)");
      if (p_[j] > 0.0) productive = true;
    }
    if (!productive) throw ModelError("resource allocation: all profits vanish (constant aggregation)");
  }

  std::size_t dim() const { return d_; }
  std::size_t tasks() const { return p_.size(); }
  const char* kind() const { return "resource_allocation"; }
  const std::vector<double>& profit() const { return p_; }
  double usage(std::size_t i, std::size_t j) const { return a_[i * p_.size() + j]; }

  ConjugateValue conjugate(std::span<const double> z) const {
    for (std::size_t j = 0; j < p_.size(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < d_; ++i) s += usage(i, j) * z[i];
      if (s < p_[j] - detail::kIndicatorTol * (1.0 + p_[j])) return {kInf, 0.0};
    }
    return {};
  }
  ValueRange value_range() const { return {0.0, kInf, true, false, true}; }
  Hypograph append_hypograph(LinearProgram& lp, std::span<const double> x, CapitalVars z) const {
    Hypograph h;
    const std::size_t m = p_.size();
    const std::size_t first = lp.num_vars();
    for (std::size_t j = 0; j < m; ++j) {
      lp.add_variable(0.0, kInf);
      h.value.add(first + j, p_[j]);
    }
    for (std::size_t i = 0; i < d_; ++i) {
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t j = 0; j < m; ++j)
        if (usage(i, j) != 0.0) terms.emplace_back(first + j, usage(i, j));
      detail::add_capital(terms, z, i);
      h.x_rows.push_back(lp.add_row(std::move(terms), RowSense::kLe, x[i]));
    }
    return h;
  }
  bool polyhedral() const { return true; }
  bool positively_homogeneous() const { return true; }

 private:
  std::vector<double> p_;
  std::size_t d_;
  std::vector<double> a_;
};

// Path formulation of the maximum flow problem; the state holds one
// capacity per arc, path flows are free.
class MaxFlowPaths {
 public:
  using Arc = std::pair<long, long>;

  MaxFlowPaths(std::vector<Arc> arcs, long source, long sink)
      : arcs_(std::move(arcs)), source_(source), sink_(sink) {
    if (source_ == sink_) throw ModelError("max flow: source and sink must differ");
    if (arcs_.empty()) throw ModelError("max flow: arc set is empty");
    if (arcs_.size() > limits::kMaxInstitutions)
      throw ModelError("max flow: more than " + std::to_string(limits::kMaxInstitutions) + " arcs");
    std::map<Arc, std::size_t> seen;
    std::map<long, std::vector<std::size_t>> out;
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
      if (arcs_[a].first == arcs_[a].second) throw ModelError("max flow: self-loop arcs are not allowed");
      if (!seen.emplace(arcs_[a], a).second) throw ModelError("max flow: duplicate arc");
      out[arcs_[a].first].push_back(a);
    }
    std::vector<std::size_t> stack;
    std::map<long, bool> visited;
    enumerate(source_, out, visited, stack);
    if (paths_.empty()) throw ModelError("max flow: no path from source to sink");
    on_path_.assign(arcs_.size(), false);
    for (const auto& p : paths_)
      for (std::size_t a : p) on_path_[a] = true;
  }

  std::size_t dim() const { return arcs_.size(); }
  const char* kind() const { return "max_flow"; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  long source() const { return source_; }
  long sink() const { return sink_; }
  const std::vector<std::vector<std::size_t>>& paths() const { return paths_; }
  bool on_path(std::size_t a) const { return on_path_[a]; }

  ConjugateValue conjugate(std::span<const double> z) const {
    for (const auto& p : paths_) {
      double s = 0.0;
      for (std::size_t a : p) s += z[a];
      if (std::abs(s - 1.0) > tol::kPathSum) return {kInf, 0.0};
    }
    return {};
  }
  ValueRange value_range() const {
    const bool off = std::find(on_path_.begin(), on_path_.end(), false) != on_path_.end();
    return {-kInf, kInf, false, false, off};
  }
  Hypograph append_hypograph(LinearProgram& lp, std::span<const double> x, CapitalVars z) const {
    Hypograph h;
    const std::size_t first = lp.num_vars();
    for (std::size_t k = 0; k < paths_.size(); ++k) {
      lp.add_variable(-kInf, kInf);
      h.value.add(first + k, 1.0);
    }
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(arcs_.size());
    for (std::size_t k = 0; k < paths_.size(); ++k)
      for (std::size_t a : paths_[k]) rows[a].emplace_back(first + k, 1.0);
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
      detail::add_capital(rows[a], z, a);
      h.x_rows.push_back(lp.add_row(std::move(rows[a]), RowSense::kLe, x[a]));
    }
    return h;
  }
  bool polyhedral() const { return true; }
  bool positively_homogeneous() const { return true; }

 private:
  void enumerate(long node, const std::map<long, std::vector<std::size_t>>& out, std::map<long, bool>& visited,
                 std::vector<std::size_t>& stack) {
    if (node == sink_) {
      paths_.push_back(stack);
      if (paths_.size() > limits::kMaxPaths)
        throw ModelError("max flow: more than " + std::to_string(limits::kMaxPaths) + " source-sink paths");
      return;
    }
    visited[node] = true;
    auto it = out.find(node);
    if (it != out.end()) {
      for (std::size_t a : it->second) {
        const long next = arcs_[a].second;
        if (visited[next]) continue;
        stack.push_back(a);
        enumerate(next, out, visited, stack);
        stack.pop_back();
      }
    }
    visited[node] = false;
  }

  std::vector<Arc> arcs_;
  long source_, sink_;
  std::vector<std::vector<std::size_t>> paths_;
  std::vector<bool> on_path_;
};

using AggregationVariant =
    std::variant<TotalPL, TotalLoss, EntropicAgg, EisenbergNoe, EisenbergNoeCCP, ResourceAllocation, MaxFlowPaths>;

// Value of Lambda at x together with a supergradient (empty when the value
// is -inf).
struct AggregateEval {
  double value = 0.0;
  std::vector<double> supergradient;
};

class AggregationModel {
 public:
  template <typename M>
  AggregationModel(M m) : m_(std::move(m)) {}  // NOLINT(google-explicit-constructor)

  const AggregationVariant& variant() const { return m_; }
  template <typename M>
  const M* get_if() const {
    return std::get_if<M>(&m_);
  }

  std::size_t dim() const {
    return std::visit([](const auto& m) { return m.dim(); }, m_);
  }
  std::string kind() const {
    return std::visit([](const auto& m) { return std::string(m.kind()); }, m_);
  }
  bool polyhedral() const {
    return std::visit([](const auto& m) { return m.polyhedral(); }, m_);
  }
  bool positively_homogeneous() const {
    return std::visit([](const auto& m) { return m.positively_homogeneous(); }, m_);
  }
  ValueRange value_range() const {
    return std::visit([](const auto& m) { return m.value_range(); }, m_);
  }

  ExtendedReal evaluate(std::span<const double> x) const { return evaluate_with_supergradient(x, false).value; }

  AggregateEval evaluate_with_supergradient(std::span<const double> x, bool want_gradient = true) const {
    detail::check_state(x, dim());
    return std::visit(
        [&](const auto& m) -> AggregateEval {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, TotalPL> || std::is_same_v<M, TotalLoss> ||
                        std::is_same_v<M, EntropicAgg>) {
            AggregateEval out{m.evaluate(x), {}};
            if (want_gradient) out.supergradient = m.supergradient(x);
            return out;
          } else {
            return lp_evaluate(m, x, want_gradient);
          }
        },
        m_);
  }

  ExtendedReal conjugate_g(std::span<const double> z) const { return conjugate(z).g; }

  ConjugateValue conjugate(std::span<const double> z) const {
    detail::check_conjugate_arg(z, dim());
    return std::visit([&](const auto& m) { return m.conjugate(z); }, m_);
  }

  Hypograph append_hypograph(LinearProgram& lp, std::span<const double> x, CapitalVars z = {}) const {
    detail::check_state(x, dim());
    return std::visit([&](const auto& m) { return m.append_hypograph(lp, x, z); }, m_);
  }

 private:
  template <typename M>
  static AggregateEval lp_evaluate(const M& m, std::span<const double> x, bool want_gradient) {
    LinearProgram lp;
    Hypograph h = m.append_hypograph(lp, x, {});
    lp.add_objective(h.value);
    SolveReport rep = solve_lp(lp);
    if (rep.status == SolveStatus::kInfeasible) return {-kInf, {}};
    if (rep.status != SolveStatus::kOptimal)
      throw NumericError(std::string(m.kind()) + ": aggregation LP ended with status " + to_string(rep.status),
                         "iterations=" + std::to_string(rep.iterations));
    AggregateEval out{rep.objective, {}};
    if (want_gradient) {
      out.supergradient.assign(h.x_rows.size(), 0.0);
      for (std::size_t i = 0; i < h.x_rows.size(); ++i)
        if (h.x_rows[i] != Hypograph::npos) out.supergradient[i] = std::max(rep.duals[h.x_rows[i]], 0.0);
    }
    return out;
  }

  AggregationVariant m_;
};

}  // namespace sysrisk

#endif  // SYSRISK_AGGREGATION_HPP_
