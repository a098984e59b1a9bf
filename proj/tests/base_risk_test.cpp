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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sysrisk/base_risk.hpp"
#include "sysrisk/optimizer.hpp"
#include "sysrisk/penalty.hpp"
#include "sysrisk/sampling.hpp"

namespace sysrisk {
namespace {

std::vector<BaseRiskMeasure> Measures() {
  return {ShiftedExpectation{0.3}, ShiftedExpectation{-0.7}, EntropicRisk{}, AverageValueAtRisk{0.5},
          AverageValueAtRisk{0.1}, AverageValueAtRisk{1.0}};
}

struct Instance {
  ScenarioSpace space;
  std::vector<double> y;
};

Instance RandomInstance(Rng& rng, std::size_t max_n = 6) {
  const std::size_t n = 1 + rng() % max_n;
  ScenarioSpace space(dirichlet_masses(rng, n, 1e-3));
  std::vector<double> y(n);
  for (double& v : y) v = 6.0 * (uniform01(rng) - 0.5);
  return {space, y};
}

// min_t t + E[(-Y - t)^+] / beta by ternary search on the convex objective.
double AvarOracle(const std::vector<double>& y, const ScenarioSpace& space, double beta) {
  auto f = [&](double t) {
    double e = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) e += space.prob(k) * positive_part(-y[k] - t);
    return t + e / beta;
  };
  double lo = -*std::max_element(y.begin(), y.end()) - 1.0, hi = -*std::min_element(y.begin(), y.end()) + 1.0;
  for (int it = 0; it < 300; ++it) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (f(a) <= f(b)) hi = b;
    else lo = a;
  }
  return f(0.5 * (lo + hi));
}

TEST(Rho, ConstantPayoff) {
  auto space = ScenarioSpace({0.2, 0.8});
  for (const auto& m : Measures())
    for (double c : {-2.0, 0.0, 1.5}) EXPECT_NEAR(m.rho(std::vector<double>{c, c}, space), m.rho_zero() - c, 1e-12);
}

TEST(Rho, Examples) {
  auto space = ScenarioSpace::uniform(2);
  EXPECT_EQ(BaseRiskMeasure(EntropicRisk{}).rho(std::vector<double>{0.0, 0.0}, space), 0.0);
  BaseRiskMeasure avar = AverageValueAtRisk{0.5};
  EXPECT_NEAR(avar.rho(std::vector<double>{0.0, -2.0}, space), 2.0, 1e-12);
  EXPECT_NEAR(AvarOracle({0.0, -2.0}, space, 0.5), 2.0, 1e-9);
  EXPECT_EQ(BaseRiskMeasure(ShiftedExpectation{0.3}).rho_zero(), -0.3);
  EXPECT_EQ(BaseRiskMeasure(EntropicRisk{}).rho_zero(), 0.0);
  EXPECT_EQ(avar.rho_zero(), 0.0);
}

TEST(Rho, AvarMatchesOneDimensionalMinimization) {
  Rng rng(41);
  for (int t = 0; t < 300; ++t) {
    auto inst = RandomInstance(rng);
    const double beta = 0.05 + 0.95 * uniform01(rng);
    BaseRiskMeasure m = AverageValueAtRisk{beta};
    EXPECT_NEAR(m.rho(inst.y, inst.space), AvarOracle(inst.y, inst.space, beta), 1e-9);
  }
}

TEST(Rho, InvalidParameters) {
  EXPECT_THROW(BaseRiskMeasure(AverageValueAtRisk{0.0}), ModelError);
  EXPECT_THROW(BaseRiskMeasure(AverageValueAtRisk{1.5}), ModelError);
  EXPECT_THROW(BaseRiskMeasure(ShiftedExpectation{kInf}), ModelError);
  BaseRiskMeasure m = EntropicRisk{};
  EXPECT_THROW(m.rho(std::vector<double>{1.0}, ScenarioSpace::uniform(2)), ModelError);
}

TEST(Penalty, Examples) {
  auto space = ScenarioSpace::uniform(2);
  auto p = Density::reference(space);
  Density s(space, {1.8, 0.2});
  EXPECT_EQ(BaseRiskMeasure(EntropicRisk{}).penalty(p), 0.0);
  EXPECT_EQ(BaseRiskMeasure(ShiftedExpectation{0.3}).penalty(p), 0.3);
  EXPECT_EQ(BaseRiskMeasure(ShiftedExpectation{0.3}).penalty(s), kInf);
  EXPECT_EQ(BaseRiskMeasure(AverageValueAtRisk{0.5}).penalty(s), 0.0);
  EXPECT_EQ(BaseRiskMeasure(AverageValueAtRisk{0.6}).penalty(s), kInf);
}

TEST(Acceptable, Examples) {
  auto space = ScenarioSpace::uniform(2);
  EXPECT_TRUE(BaseRiskMeasure(EntropicRisk{}).acceptable(std::vector<double>{0.0, 0.0}, space));
  for (const BaseRiskMeasure& m :
       {BaseRiskMeasure(EntropicRisk{}), BaseRiskMeasure(AverageValueAtRisk{0.3}), BaseRiskMeasure(ShiftedExpectation{0.0})})
    EXPECT_FALSE(m.acceptable(std::vector<double>{-1.0, -1.0}, space));
  EXPECT_TRUE(BaseRiskMeasure(ShiftedExpectation{0.0}).acceptable(std::vector<double>{1.0, 1.0}, space));
}

TEST(Axioms, MonotoneTranslativeConvex) {
  Rng rng(42);
  for (const auto& m : Measures()) {
    for (int t = 0; t < 300; ++t) {
      auto inst = RandomInstance(rng);
      const auto& y = inst.y;
      const std::size_t n = y.size();
      std::vector<double> up(n), other(n), mid(n), shifted(n);
      const double c = 4.0 * (uniform01(rng) - 0.5), g = uniform01(rng);
      for (std::size_t k = 0; k < n; ++k) {
        up[k] = y[k] + 2.0 * uniform01(rng);
        other[k] = 6.0 * (uniform01(rng) - 0.5);
        mid[k] = g * y[k] + (1.0 - g) * other[k];
        shifted[k] = y[k] + c;
      }
      const double r = m.rho(y, inst.space);
      EXPECT_LE(m.rho(up, inst.space), r + 1e-9) << m.kind();
      EXPECT_NEAR(m.rho(shifted, inst.space), r - c, 1e-9) << m.kind();
      EXPECT_LE(m.rho(mid, inst.space), g * r + (1.0 - g) * m.rho(other, inst.space) + 1e-9) << m.kind();
    }
  }
}

TEST(Axioms, AvarIsPositivelyHomogeneous) {
  Rng rng(43);
  for (int t = 0; t < 300; ++t) {
    auto inst = RandomInstance(rng);
    BaseRiskMeasure m = AverageValueAtRisk{0.05 + 0.95 * uniform01(rng)};
    const double g = log_uniform(rng, 0.1, 10.0);
    auto gy = inst.y;
    for (double& v : gy) v *= g;
    EXPECT_NEAR(m.rho(gy, inst.space), g * m.rho(inst.y, inst.space), 1e-9 * (1.0 + g));
  }
}

TEST(Duality, PenaltyBoundsRho) {
  Rng rng(44);
  for (const auto& m : Measures()) {
    for (int t = 0; t < 300; ++t) {
      auto inst = RandomInstance(rng);
      Density s = t % 3 == 0 ? Density::reference(inst.space) : random_density(rng, inst.space);
      const double a = m.penalty(s);
      EXPECT_GE(a, -m.rho_zero() - 1e-12) << m.kind();
      if (is_pos_inf(a)) continue;
      double e = 0.0;
      for (std::size_t k = 0; k < inst.y.size(); ++k) e -= inst.space.prob(k) * s[k] * inst.y[k];
      EXPECT_LE(e - a, m.rho(inst.y, inst.space) + 1e-9) << m.kind();
    }
  }
}

TEST(Duality, OptimalDensityAttainsRho) {
  Rng rng(45);
  for (const auto& m : Measures()) {
    for (int t = 0; t < 200; ++t) {
      auto inst = RandomInstance(rng, 4);
      Density s = m.optimal_density(inst.y, inst.space);
      double e = 0.0;
      for (std::size_t k = 0; k < inst.y.size(); ++k) e -= inst.space.prob(k) * s[k] * inst.y[k];
      EXPECT_NEAR(e - m.penalty(s), m.rho(inst.y, inst.space), 1e-6) << m.kind();
    }
  }
}

TEST(Duality, SimplexSearchRecoversRho) {
  // sup_S E^S[-Y] - alpha(S) over the (capped) simplex, found by mirror
  // descent rather than the closed-form maximizer.
  Rng rng(46);
  for (int t = 0; t < 40; ++t) {
    auto inst = RandomInstance(rng, 4);
    const auto pr = inst.space.probs();
    const std::size_t n = pr.size();
    for (const BaseRiskMeasure& m : {BaseRiskMeasure(EntropicRisk{}), BaseRiskMeasure(AverageValueAtRisk{0.3})}) {
      SimplexOptions opt;
      if (auto* a = m.get_if<AverageValueAtRisk>())
        for (double p : pr) opt.caps.push_back(p / a->beta);
      const bool entropic = m.get_if<EntropicRisk>() != nullptr;
      auto f = [&](std::span<const double> sigma, std::span<double> grad) {
        double v = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          v += sigma[k] * inst.y[k];
          grad[k] = inst.y[k];
          if (entropic) {
            v += sigma[k] * std::log(sigma[k] / pr[k]);
            grad[k] += std::log(sigma[k] / pr[k]) + 1.0;
          }
        }
        return v;
      };
      auto rep = minimize_over_simplex(f, std::vector<double>(pr.begin(), pr.end()), opt);
      EXPECT_NEAR(-rep.objective, m.rho(inst.y, inst.space), 1e-6) << m.kind();
    }
  }
}

TEST(EntropicIdentity, ScaledRelativeEntropy) {
  Rng rng(47);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 6;
    ScenarioSpace space(dirichlet_masses(rng, n, 1e-3));
    const auto q = dirichlet_masses(rng, n, 1e-6);
    const auto s = dirichlet_masses(rng, n, 1e-6);
    const double w = log_uniform(rng, 1e-2, 1e2);
    std::vector<double> wq(n);
    for (std::size_t k = 0; k < n; ++k) wq[k] = w * q[k];
    const double lhs = detail::relative_entropy_masses(wq, s);
    const double rhs = w * detail::relative_entropy_masses(q, s) + w * std::log(w);
    EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + std::abs(rhs)));

    // The same quantity through the perspective of the entropic conjugate.
    AggregationModel agg = EntropicAgg{1};
    EXPECT_NEAR(detail::divergence(agg, wq, s), rhs, 1e-10 * (1.0 + std::abs(rhs)));
  }
}

}  // namespace
}  // namespace sysrisk
