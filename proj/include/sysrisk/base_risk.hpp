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

// Univariate convex risk measures on a finite scenario space and their
// minimal penalty functions.

#ifndef SYSRISK_BASE_RISK_HPP_
#define SYSRISK_BASE_RISK_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sysrisk/common.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/linear_program.hpp"

namespace sysrisk {

// rho(Y) = E[-Y] - lambda0.
struct ShiftedExpectation {
  double lambda0 = 0.0;
};

// rho(Y) = log E[exp(-Y)].
struct EntropicRisk {};

// rho(Y) = min_t t + E[(-Y - t)^+] / beta.
struct AverageValueAtRisk {
  double beta = 1.0;
};

using BaseRiskVariant = std::variant<ShiftedExpectation, EntropicRisk, AverageValueAtRisk>;

namespace detail {

inline void check_payoff(std::span<const double> y, const ScenarioSpace& space) {
  if (y.size() != space.size())
    throw ModelError("risk measure: payoff has " + std::to_string(y.size()) + " entries, expected " +
                     std::to_string(space.size()));
  for (double v : y)
    if (!std::isfinite(v)) throw ModelError("risk measure: payoff entries must be finite");
}

// Scenario indices ordered by decreasing loss -Y, ties by index.
inline std::vector<std::size_t> by_loss(std::span<const double> y) {
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  return idx;
}

}  // namespace detail

class BaseRiskMeasure {
 public:
  BaseRiskMeasure(BaseRiskVariant m) : m_(m) {  // NOLINT(google-explicit-constructor)
    if (auto* s = std::get_if<ShiftedExpectation>(&m_); s && !std::isfinite(s->lambda0))
      throw ModelError("shifted expectation: lambda0 must be finite");
    if (auto* a = std::get_if<AverageValueAtRisk>(&m_); a && !(a->beta > 0.0 && a->beta <= 1.0))
      throw ModelError("average value at risk: beta must lie in (0,1]");
  }
  BaseRiskMeasure(ShiftedExpectation m) : BaseRiskMeasure(BaseRiskVariant(m)) {}  // NOLINT
  BaseRiskMeasure(EntropicRisk m) : BaseRiskMeasure(BaseRiskVariant(m)) {}        // NOLINT
  BaseRiskMeasure(AverageValueAtRisk m) : BaseRiskMeasure(BaseRiskVariant(m)) {}  // NOLINT

  const BaseRiskVariant& variant() const { return m_; }
  template <typename M>
  const M* get_if() const {
    return std::get_if<M>(&m_);
  }

  std::string kind() const {
    switch (m_.index()) {
      case 0: return "expectation";
      case 1: return "entropic";
      default: return "avar";
    }
  }

  bool coherent() const { return std::holds_alternative<AverageValueAtRisk>(m_); }
  bool polyhedral() const { return !std::holds_alternative<EntropicRisk>(m_); }

  double rho_zero() const {
    if (auto* s = get_if<ShiftedExpectation>()) return -s->lambda0;
    return 0.0;
  }

  double rho(std::span<const double> y, const ScenarioSpace& space) const {
    detail::check_payoff(y, space);
    const auto pr = space.probs();
    if (auto* s = get_if<ShiftedExpectation>()) {
      double e = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) e -= pr[k] * y[k];
      return e - s->lambda0;
    }
    if (get_if<EntropicRisk>()) {
      double m = -kInf;
      for (double v : y) m = std::max(m, -v);
      double acc = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) acc += pr[k] * std::exp(-y[k] - m);
      return m + std::log(acc);
    }
    return avar(y, space, get_if<AverageValueAtRisk>()->beta);
  }

  bool acceptable(std::span<const double> y, const ScenarioSpace& space) const { return rho(y, space) <= 0.0; }

  ExtendedReal penalty(const Density& s) const {
    const auto pr = s.space().probs();
    if (auto* sh = get_if<ShiftedExpectation>()) {
      for (std::size_t k = 0; k < s.size(); ++k)
        if (std::abs(s[k] - 1.0) > tol::kMeasureEquality) return kInf;
      return sh->lambda0;
    }
    if (get_if<EntropicRisk>()) {
      double h = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) h += pr[k] * xlogx(s[k]);
      return h;
    }
    const double cap = 1.0 / get_if<AverageValueAtRisk>()->beta;
    for (std::size_t k = 0; k < s.size(); ++k)
      if (s[k] > cap * (1.0 + 1e-12)) return kInf;
    return 0.0;
  }

  // A density S attaining rho(Y) = E^S[-Y] - alpha(S).
  Density optimal_density(std::span<const double> y, const ScenarioSpace& space) const {
    detail::check_payoff(y, space);
    const auto pr = space.probs();
    const std::size_t n = y.size();
    if (get_if<ShiftedExpectation>()) return Density::reference(space);
    std::vector<double> dm(n, 0.0);
    if (get_if<EntropicRisk>()) {
      double m = -kInf;
      for (double v : y) m = std::max(m, -v);
      double z = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        dm[k] = std::exp(-y[k] - m);
        z += pr[k] * dm[k];
      }
      for (double& v : dm) v /= z;
      return renormalized(space, std::move(dm));
    }
    // Scenarios with larger losses than the quantile get the full 1/beta;
    // the remaining mass is spread over the tie group at the quantile, so
    // S stays equivalent to P whenever that is possible.
    const double beta = get_if<AverageValueAtRisk>()->beta;
    const auto order = detail::by_loss(y);
    double left = beta;
    std::size_t pos = 0;
    while (pos < n && left > 0.0) {
      const double level = y[order[pos]];
      std::size_t end = pos;
      double group = 0.0;
      while (end < n && std::abs(y[order[end]] - level) <= 1e-12 * (1.0 + std::abs(level))) group += pr[order[end++]];
      const double take = std::min(group, left);
      for (std::size_t j = pos; j < end; ++j) dm[order[j]] = take / (beta * group);
      left -= take;
      pos = end;
    }
    return renormalized(space, std::move(dm));
  }

  // Adds rows/variables so that r is an affine expression with
  // min over the added variables of r = rho(v), for LP-representable
  // measures.
  AffineExpr append_risk(LinearProgram& lp, const std::vector<AffineExpr>& v, const ScenarioSpace& space) const {
    const auto pr = space.probs();
    AffineExpr r;
    if (auto* s = get_if<ShiftedExpectation>()) {
      r.constant = -s->lambda0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        r.constant -= pr[k] * v[k].constant;
        for (const auto& [j, c] : v[k].terms) r.add(j, -pr[k] * c);
      }
      return r;
    }
    if (auto* a = get_if<AverageValueAtRisk>()) {
      const std::size_t t = lp.add_variable(-kInf, kInf);
      r.add(t, 1.0);
      for (std::size_t k = 0; k < v.size(); ++k) {
        const std::size_t sk = lp.add_variable(0.0, kInf);
        r.add(sk, pr[k] / a->beta);
        // -s_k - t - v_k <= 0
        std::vector<std::pair<std::size_t, double>> terms{{sk, -1.0}, {t, -1.0}};
        for (const auto& [j, c] : v[k].terms) terms.emplace_back(j, -c);
        lp.add_row(std::move(terms), RowSense::kLe, v[k].constant);
      }
      return r;
    }
    throw PreconditionError("entropic risk has no linear-programming representation");
  }

 private:
  // Rockafellar-Uryasev objective evaluated at every kink t = -Y_k; the
  // minimum of a convex piecewise-linear function is attained at one.
  static double avar(std::span<const double> y, const ScenarioSpace& space, double beta) {
    const auto pr = space.probs();
    const auto order = detail::by_loss(y);
    double best = kInf;
    double mass = 0.0, weighted = 0.0;  // over scenarios with strictly larger loss
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const double t = -y[order[pos]];
      const double val = t + (weighted - t * mass) / beta;
      best = std::min(best, val);
      mass += pr[order[pos]];
      weighted += pr[order[pos]] * (-y[order[pos]]);
    }
    return best;
  }

  static Density renormalized(const ScenarioSpace& space, std::vector<double> dm) {
    double mass = 0.0;
    for (std::size_t k = 0; k < dm.size(); ++k) mass += space.prob(k) * dm[k];
    for (double& v : dm) v /= mass;
    return Density(space, std::move(dm));
  }

  BaseRiskVariant m_;
};

}  // namespace sysrisk

#endif  // SYSRISK_BASE_RISK_HPP_
