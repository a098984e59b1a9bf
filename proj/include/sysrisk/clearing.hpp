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

// Eisenberg-Noe clearing: Picard iteration from the greatest element, the
// payment LP, and the central-counterparty variant.

#ifndef SYSRISK_CLEARING_HPP_
#define SYSRISK_CLEARING_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sysrisk/common.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/linear_program.hpp"

namespace sysrisk {

enum class ClearingMethod { kFixedPoint, kLp };

inline const char* to_string(ClearingMethod m) { return m == ClearingMethod::kFixedPoint ? "fixed-point" : "lp"; }

struct ClearingResult {
  std::vector<double> payments;
  double society_equity = 0.0;
  std::vector<bool> defaulted;
  ClearingMethod method = ClearingMethod::kFixedPoint;
  std::size_t iterations = 0;
  // CCP clearing only: the LP optimizer before the CCP coordinate repair.
  std::vector<double> lp_payments;
  double lp_objective = 0.0;
};

// Payment system of a network: p-bar and relative liabilities over the
// institutions 1..D (vector index i-1), society excluded.
class PaymentSystem {
 public:
  explicit PaymentSystem(const LiabilityNetwork& net) : d_(net.institutions()) {
    pbar_.resize(d_);
    a_.assign(d_ * d_, 0.0);
    a0_.resize(d_);
    for (std::size_t i = 0; i < d_; ++i) {
      pbar_[i] = net.total_liability(i + 1);
      a0_[i] = net.relative(i + 1, 0);
      for (std::size_t j = 0; j < d_; ++j) a_[i * d_ + j] = net.relative(i + 1, j + 1);
    }
  }

  std::size_t size() const { return d_; }
  double pbar(std::size_t i) const { return pbar_[i]; }
  // a_{ij} between institutions i and j (0-based).
  double rel(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }
  double rel_society(std::size_t i) const { return a0_[i]; }

  // x_i + sum_j a_ji p_j
  double inflow(std::span<const double> x, std::span<const double> p, std::size_t i) const {
    double v = x[i];
    for (std::size_t j = 0; j < d_; ++j) v += rel(j, i) * p[j];
    return v;
  }

  double society_equity(std::span<const double> p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < d_; ++i) s += a0_[i] * p[i];
    return s;
  }

  // p-bar-bar = sum_i a_i0 p-bar_i.
  double max_equity() const { return society_equity(pbar_); }

  double fixed_point_residual(std::span<const double> x, std::span<const double> p) const {
    double r = 0.0;
    for (std::size_t i = 0; i < d_; ++i) r = std::max(r, std::abs(p[i] - std::min(pbar_[i], inflow(x, p, i))));
    return r;
  }

 private:
  std::size_t d_;
  std::vector<double> pbar_;
  std::vector<double> a_;
  std::vector<double> a0_;
};

namespace detail {

inline void check_wealth(const PaymentSystem& sys, std::span<const double> x, const char* what) {
  if (x.size() != sys.size())
    throw ModelError(std::string(what) + ": wealth vector has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(sys.size()));
  for (double v : x)
    if (!std::isfinite(v)) throw ModelError(std::string(what) + ": wealth entries must be finite");
}

inline ClearingResult finish(const PaymentSystem& sys, std::vector<double> p, ClearingMethod method) {
  ClearingResult r;
  r.society_equity = sys.society_equity(p);
  r.defaulted.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r.defaulted[i] = p[i] < sys.pbar(i) - 1e-9 * (1.0 + sys.pbar(i));
  r.payments = std::move(p);
  r.method = method;
  return r;
}

// Monotone iteration from p-bar. Returns nullopt when the decreasing
// sequence leaves the nonnegative orthant: every later iterate stays there,
// and a nonnegative clearing vector would bound the sequence from below.
inline std::optional<ClearingResult> picard(const PaymentSystem& sys, std::span<const double> x) {
  const std::size_t d = sys.size();
  std::vector<double> p(d), next(d);
  double scale = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    p[i] = sys.pbar(i);
    scale = std::max(scale, p[i]);
  }
  const std::size_t cap = 100000;
  for (std::size_t it = 1; it <= cap; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      next[i] = std::min(sys.pbar(i), sys.inflow(x, p, i));
      change = std::max(change, std::abs(next[i] - p[i]));
    }
    p.swap(next);
    for (double v : p)
      if (v < -1e-12 * scale) return std::nullopt;
    if (change < 1e-12) {
      for (double& v : p) v = std::max(v, 0.0);
      auto r = finish(sys, std::move(p), ClearingMethod::kFixedPoint);
      r.iterations = it;
      return r;
    }
  }
  std::ostringstream os;
  os << "iterations=" << cap << ", payments=[";
  for (std::size_t i = 0; i < d; ++i) os << (i ? "," : "") << p[i];
  os << "]";
  throw NumericError("clearing: fixed-point iteration did not converge", os.str());
}

// Builds P(x) into lp; returns the index of the first payment variable.
inline std::size_t append_payment_lp(LinearProgram& lp, const PaymentSystem& sys, std::span<const double> x) {
  const std::size_t d = sys.size();
  const std::size_t first = lp.num_vars();
  for (std::size_t i = 0; i < d; ++i) lp.add_variable(0.0, sys.pbar(i), sys.rel_society(i));
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<std::pair<std::size_t, double>> terms{{first + i, 1.0}};
    for (std::size_t j = 0; j < d; ++j)
      if (j != i && sys.rel(j, i) != 0.0) terms.emplace_back(first + j, -sys.rel(j, i));
    lp.add_row(std::move(terms), RowSense::kLe, x[i]);
  }
  return first;
}

inline std::optional<ClearingResult> payment_lp(const PaymentSystem& sys, std::span<const double> x,
                                               const LpOptions& opt = {}) {
  LinearProgram lp;
  const std::size_t first = append_payment_lp(lp, sys, x);
  SolveReport rep = solve_lp(lp, opt);
  if (rep.status == SolveStatus::kInfeasible) return std::nullopt;
  if (rep.status != SolveStatus::kOptimal)
    throw NumericError("clearing: payment LP ended with status " + std::string(to_string(rep.status)));
  std::vector<double> p(rep.point.begin() + first, rep.point.begin() + first + sys.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], 0.0, sys.pbar(i));
  auto r = finish(sys, std::move(p), ClearingMethod::kLp);
  r.iterations = rep.iterations;
  return r;
}

}  // namespace detail

inline std::optional<ClearingResult> clear_fixed_point(const LiabilityNetwork& net, std::span<const double> x) {
  require_valid_network(net);
  PaymentSystem sys(net);
  detail::check_wealth(sys, x, "clearing");
  return detail::picard(sys, x);
}

inline std::optional<ClearingResult> clear_lp(const LiabilityNetwork& net, std::span<const double> x,
                                             const LpOptions& opt = {}) {
  require_valid_network(net);
  PaymentSystem sys(net);
  detail::check_wealth(sys, x, "clearing");
  return detail::payment_lp(sys, x, opt);
}

// Routes all netted interbank liabilities through a new node d+1.
inline LiabilityNetwork ccp_transform(const LiabilityNetwork& net) {
  require_valid_network(net);
  const std::size_t d = net.institutions();
  const std::size_t n = d + 2;
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 1; i <= d; ++i) {
    double net_out = 0.0;
    for (std::size_t j = 1; j <= d; ++j) net_out += net(i, j) - net(j, i);
    out[i * n + 0] = net(i, 0);
    out[i * n + (d + 1)] = positive_part(net_out);
    out[(d + 1) * n + i] = negative_part(net_out);
  }
  return LiabilityNetwork(n, std::move(out));
}

// Violations of the CCP shape: the base rules for institutions 1..d, no
// direct interbank liabilities, and a CCP that owes nothing to society.
inline std::vector<NetworkViolation> validate_ccp_network(const LiabilityNetwork& net) {
  std::vector<NetworkViolation> out;
  const std::size_t n = net.nodes();
  if (n < 3) {
    out.push_back({"ccp shape", 0, 0, "CCP network needs society, at least one institution and the CCP"});
    return out;
  }
  const std::size_t c = n - 1;
  for (auto& v : validate_network(net))
    if (!(v.rule == "nonzero liability to society" && v.i == c)) out.push_back(v);
  for (std::size_t i = 1; i < c; ++i)
    for (std::size_t j = 1; j < c; ++j)
      if (i != j && net(i, j) != 0.0)
        out.push_back({"ccp shape", i, j, "CCP network has a direct interbank liability"});
  if (net(c, 0) != 0.0) out.push_back({"ccp shape", c, 0, "CCP must not owe society"});
  return out;
}

// Solves P~(x) and replaces the CCP payment by the second fixed-point
// equation evaluated at the LP payments of the institutions.
inline std::optional<ClearingResult> clear_ccp(const LiabilityNetwork& ccp_net, std::span<const double> x) {
  auto violations = validate_ccp_network(ccp_net);
  if (!violations.empty()) throw ModelError("CCP network: " + violations.front().message);
  PaymentSystem sys(ccp_net);
  detail::check_wealth(sys, x, "CCP clearing");
  auto raw = detail::payment_lp(sys, x);
  if (!raw) return std::nullopt;

  const std::size_t c = sys.size() - 1;
  std::vector<double> p = raw->payments;
  p[c] = std::min(sys.pbar(c), sys.inflow(x, p, c));

  const double residual = sys.fixed_point_residual(x, p);
  const double scale = 1.0 + sys.max_equity();
  if (residual > 1e-8 * scale || p[c] < -1e-12) {
    std::ostringstream os;
    os << "fixed-point residual=" << residual << ", ccp payment=" << p[c];
    throw NumericError("CCP clearing: repaired vector is not a clearing vector", os.str());
  }
  p[c] = std::max(p[c], 0.0);
  auto r = detail::finish(sys, std::move(p), ClearingMethod::kLp);
  r.lp_payments = raw->payments;
  r.lp_objective = raw->society_equity;
  r.iterations = raw->iterations;
  return r;
}

}  // namespace sysrisk

#endif  // SYSRISK_CLEARING_HPP_
