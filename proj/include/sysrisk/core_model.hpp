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

// Finite probability spaces, random wealth vectors, densities, dual
// variables and the liability network data model.

#ifndef SYSRISK_CORE_MODEL_HPP_
#define SYSRISK_CORE_MODEL_HPP_

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sysrisk/common.hpp"

namespace sysrisk {

// Finite probability space with strictly positive scenario masses. The mass
// vector is shared between copies.
class ScenarioSpace {
 public:
  explicit ScenarioSpace(std::vector<double> probs) {
    if (probs.empty()) throw ModelError("scenario space: at least one scenario is required");
    if (probs.size() > limits::kMaxScenarios)
      throw ModelError("scenario space: more than " + std::to_string(limits::kMaxScenarios) +
                       " scenarios");
    double total = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (!std::isfinite(probs[k]) || probs[k] <= 0.0)
        throw ModelError("scenario space: probability of scenario " + std::to_string(k) +
                         " must be strictly positive");
      total += probs[k];
    }
    if (std::abs(total - 1.0) > tol::kProbabilitySum)
      throw ModelError("scenario space: probabilities sum to " + std::to_string(total) +
                       ", expected 1 within 1e-12");
    probs_ = std::make_shared<const std::vector<double>>(std::move(probs));
  }

  static ScenarioSpace uniform(std::size_t n) {
    // Rounding of 1/n can leave the sum a few ulps away from one, which is
    // far inside the accepted tolerance.
    return ScenarioSpace(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const { return probs_->size(); }
  std::span<const double> probs() const { return *probs_; }
  double prob(std::size_t k) const { return (*probs_)[k]; }

  friend bool operator==(const ScenarioSpace& a, const ScenarioSpace& b) {
    return a.probs_ == b.probs_ || *a.probs_ == *b.probs_;
  }

 private:
  std::shared_ptr<const std::vector<double>> probs_;
};

// The random vector X: one row of d institution wealths per scenario.
class WealthProcess {
 public:
  WealthProcess(ScenarioSpace space, std::size_t dim, std::vector<double> values)
      : space_(std::move(space)), dim_(dim), values_(std::move(values)) {
    if (dim_ == 0) throw ModelError("wealth process: at least one institution is required");
    if (dim_ > limits::kMaxInstitutions)
      throw ModelError("wealth process: more than " + std::to_string(limits::kMaxInstitutions) +
                       " institutions");
    if (values_.size() != space_.size() * dim_)
      throw ModelError("wealth process: expected " + std::to_string(space_.size()) +
                       " rows of length " + std::to_string(dim_));
    for (double v : values_)
      if (!std::isfinite(v)) throw ModelError("wealth process: wealth entries must be finite");
  }

  static WealthProcess from_rows(ScenarioSpace space, const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ModelError("wealth process: no rows");
    const std::size_t d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].size() != d)
        throw ModelError("wealth process: row " + std::to_string(k) + " has length " +
                         std::to_string(rows[k].size()) + ", expected " + std::to_string(d));
      flat.insert(flat.end(), rows[k].begin(), rows[k].end());
    }
    return WealthProcess(std::move(space), d, std::move(flat));
  }

  const ScenarioSpace& space() const { return space_; }
  std::size_t scenarios() const { return space_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * dim_, dim_);
  }
  double at(std::size_t k, std::size_t i) const { return values_[k * dim_ + i]; }
  std::span<const double> values() const { return values_; }

  // Essential supremum of |X_i| per institution.
  std::vector<double> sup_norms() const {
    std::vector<double> out(dim_, 0.0);
    for (std::size_t k = 0; k < scenarios(); ++k)
      for (std::size_t i = 0; i < dim_; ++i) out[i] = std::max(out[i], std::abs(at(k, i)));
    return out;
  }

  // X + c for a deterministic vector c.
  WealthProcess shifted(std::span<const double> c) const {
    std::vector<double> v = values_;
    for (std::size_t k = 0; k < scenarios(); ++k)
      for (std::size_t i = 0; i < dim_; ++i) v[k * dim_ + i] += c[i];
    return WealthProcess(space_, dim_, std::move(v));
  }

  WealthProcess scaled(double gamma) const {
    std::vector<double> v = values_;
    for (double& x : v) x *= gamma;
    return WealthProcess(space_, dim_, std::move(v));
  }

 private:
  ScenarioSpace space_;
  std::size_t dim_;
  std::vector<double> values_;
};

// Radon-Nikodym derivative dQ/dP of a probability measure Q << P.
class Density {
 public:
  Density(ScenarioSpace space, std::vector<double> dm) : space_(std::move(space)), dm_(std::move(dm)) {
    if (dm_.size() != space_.size())
      throw ModelError("density: expected " + std::to_string(space_.size()) + " entries");
    double mass = 0.0;
    for (std::size_t k = 0; k < dm_.size(); ++k) {
      if (!std::isfinite(dm_[k]) || dm_[k] < 0.0)
        throw ModelError("density: entry " + std::to_string(k) + " must be finite and nonnegative");
      mass += space_.prob(k) * dm_[k];
    }
    if (std::abs(mass - 1.0) > tol::kDensityMass)
      throw ModelError("density: total mass " + std::to_string(mass) + " differs from 1");
  }

  static Density reference(const ScenarioSpace& space) {
    return Density(space, std::vector<double>(space.size(), 1.0));
  }

  // Density of the measure with scenario masses sigma (sum one).
  static Density from_masses(const ScenarioSpace& space, std::span<const double> sigma) {
    std::vector<double> dm(sigma.size());
    for (std::size_t k = 0; k < dm.size(); ++k) dm[k] = sigma[k] / space.prob(k);
    return Density(space, std::move(dm));
  }

  const ScenarioSpace& space() const { return space_; }
  std::span<const double> dm() const { return dm_; }
  double operator[](std::size_t k) const { return dm_[k]; }
  std::size_t size() const { return dm_.size(); }

  bool equivalent() const {
    return std::all_of(dm_.begin(), dm_.end(), [](double v) { return v > tol::kDensityZero; });
  }

  // Scenario masses Q({omega_k}).
  std::vector<double> masses() const {
    std::vector<double> out(dm_.size());
    for (std::size_t k = 0; k < dm_.size(); ++k) out[k] = space_.prob(k) * dm_[k];
    return out;
  }

 private:
  ScenarioSpace space_;
  std::vector<double> dm_;
};

// Vector probability measure Q, weights w and a society measure S.
// Components of Q with w_i = 0 are carried along but never read.
struct DualVariable {
  std::vector<Density> q;
  std::vector<double> w;
  Density s;

  DualVariable(std::vector<Density> q_in, std::vector<double> w_in, Density s_in)
      : q(std::move(q_in)), w(std::move(w_in)), s(std::move(s_in)) {
    if (q.size() != w.size() || q.empty())
      throw ModelError("dual variable: q and w must have the same nonzero length");
    double wmax = 0.0;
    for (double wi : w) {
      if (!std::isfinite(wi) || wi < 0.0) throw ModelError("dual variable: weights must be nonnegative");
      wmax = std::max(wmax, wi);
    }
    if (wmax <= 0.0) throw ModelError("dual variable: weights must not all vanish");
    for (const Density& qi : q)
      if (!(qi.space() == s.space())) throw ModelError("dual variable: measures live on different spaces");
    if (!s.equivalent()) throw ModelError("dual variable: society measure must be equivalent to P");
  }

  std::size_t dim() const { return w.size(); }
  const ScenarioSpace& space() const { return s.space(); }

  // w_i dQ_i/dP at scenario k.
  double weighted_density(std::size_t i, std::size_t k) const { return w[i] == 0.0 ? 0.0 : w[i] * q[i][k]; }
};

// E^{Q_i}[X_i] for every institution i.
inline std::vector<double> expectation(const WealthProcess& x, std::span<const Density> q) {
  if (q.size() != x.dim())
    throw ModelError("expectation: " + std::to_string(q.size()) + " densities for " +
                     std::to_string(x.dim()) + " institutions");
  std::vector<double> out(x.dim(), 0.0);
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (!(q[i].space() == x.space())) throw ModelError("expectation: density on a different scenario space");
    for (std::size_t k = 0; k < x.scenarios(); ++k) out[i] += x.space().prob(k) * q[i][k] * x.at(k, i);
  }
  return out;
}

// dQ/dS per scenario.
inline std::vector<double> change_of_measure(const Density& q, const Density& s) {
  if (!(q.space() == s.space())) throw ModelError("change of measure: densities on different spaces");
  std::vector<double> out(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (s[k] <= 0.0)
      throw DomainError("change of measure: reference density vanishes at scenario " + std::to_string(k));
    out[k] = q[k] / s[k];
  }
  return out;
}

// Nominal liabilities between society (node 0) and institutions 1..d.
// entry(i, j) is what node i owes node j.
class LiabilityNetwork {
 public:
  LiabilityNetwork(std::size_t nodes, std::vector<double> liab) : nodes_(nodes), liab_(std::move(liab)) {
    if (nodes_ < 2) throw ModelError("liability network: at least society and one institution are required");
    if (liab_.size() != nodes_ * nodes_) throw ModelError("liability network: matrix is not square");
    for (double v : liab_)
      if (!std::isfinite(v) || v < 0.0) throw ModelError("liability network: liabilities must be finite and nonnegative");
  }

  static LiabilityNetwork from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n)
        throw ModelError("liability network: row " + std::to_string(i) + " has length " +
                         std::to_string(rows[i].size()) + ", matrix is not square");
      flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return LiabilityNetwork(n, std::move(flat));
  }

  std::size_t nodes() const { return nodes_; }
  std::size_t institutions() const { return nodes_ - 1; }
  double operator()(std::size_t i, std::size_t j) const { return liab_[i * nodes_ + j]; }
  std::span<const double> data() const { return liab_; }

  // p-bar_i, total liabilities of node i.
  double total_liability(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < nodes_; ++j) s += (*this)(i, j);
    return s;
  }

  // a_ij = l_ij / p-bar_i, zero for a node without liabilities.
  double relative(std::size_t i, std::size_t j) const {
    const double pbar = total_liability(i);
    return pbar > 0.0 ? (*this)(i, j) / pbar : 0.0;
  }

 private:
  std::size_t nodes_;
  std::vector<double> liab_;
};

struct NetworkViolation {
  std::string rule;
  std::size_t i;
  std::size_t j;
  std::string message;
};

// Checks: society owes nothing, every institution owes society something,
// no self-liabilities.
inline std::vector<NetworkViolation> validate_network(const LiabilityNetwork& net) {
  std::vector<NetworkViolation> out;
  const std::size_t n = net.nodes();
  for (std::size_t i = 1; i < n; ++i)
    if (net(0, i) != 0.0)
      out.push_back({"society has liabilities", 0, i,
                     "society has liabilities: l(0," + std::to_string(i) + ") must be 0"});
  for (std::size_t i = 1; i < n; ++i)
    if (!(net(i, 0) > 0.0))
      out.push_back({"nonzero liability to society", i, 0,
                     "nonzero liability to society, node " + std::to_string(i)});
  for (std::size_t i = 0; i < n; ++i)
    if (net(i, i) != 0.0)
      out.push_back({"self-liabilities", i, i, "self-liability at node " + std::to_string(i) + " must be 0"});
  if (net.institutions() > limits::kMaxInstitutions)
    out.push_back({"size limit", n, n, "more than 64 institutions"});
  return out;
}

inline void require_valid_network(const LiabilityNetwork& net) {
  auto v = validate_network(net);
  if (!v.empty()) throw ModelError("liability network: " + v.front().message);
}

}  // namespace sysrisk

#endif  // SYSRISK_CORE_MODEL_HPP_
