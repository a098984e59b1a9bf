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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sysrisk/clearing.hpp"

namespace sysrisk {
namespace {

LiabilityNetwork TwoBank() { return LiabilityNetwork::from_rows({{0, 0, 0}, {1, 0, 1}, {1, 0, 0}}); }

std::vector<double> RandomWealth(std::mt19937_64& rng, const LiabilityNetwork& net, double lo = 0.0) {
  std::vector<double> x(net.institutions());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::uniform_real_distribution<double>(lo, 2.0 * net.total_liability(i + 1))(rng);
  return x;
}

TEST(ClearFixedPoint, NoDefault) {
  auto r = clear_fixed_point(TwoBank(), std::vector<double>{2.0, 1.0});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->payments, (std::vector<double>{2.0, 1.0}));
  EXPECT_DOUBLE_EQ(r->society_equity, 2.0);
  EXPECT_EQ(r->defaulted, (std::vector<bool>{false, false}));
  EXPECT_EQ(r->method, ClearingMethod::kFixedPoint);
}

TEST(ClearFixedPoint, BothDefault) {
  // p1 = min(2, 1) = 1, p2 = min(1, 0 + 0.5 p1) = 0.5.
  auto r = clear_fixed_point(TwoBank(), std::vector<double>{1.0, 0.0});
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->payments[0], 1.0, 1e-12);
  EXPECT_NEAR(r->payments[1], 0.5, 1e-12);
  EXPECT_NEAR(r->society_equity, 1.0, 1e-12);
  EXPECT_EQ(r->defaulted, (std::vector<bool>{true, true}));
}

TEST(ClearFixedPoint, WealthEqualToLiabilities) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    auto net = oracle::random_network(rng, 1 + rng() % 5);
    std::vector<double> pbar(net.institutions());
    for (std::size_t i = 0; i < pbar.size(); ++i) pbar[i] = net.total_liability(i + 1);
    auto r = clear_fixed_point(net, pbar);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->payments, pbar);
    EXPECT_EQ(r->iterations, 1u);
  }
}

TEST(ClearLp, Examples) {
  auto net = TwoBank();
  auto lp = clear_lp(net, std::vector<double>{1.0, 0.0});
  auto fp = clear_fixed_point(net, std::vector<double>{1.0, 0.0});
  ASSERT_TRUE(lp && fp);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(lp->payments[i], fp->payments[i], 1e-8);
  EXPECT_EQ(lp->method, ClearingMethod::kLp);

  EXPECT_FALSE(clear_lp(net, std::vector<double>{-10.0, 0.0}));
  EXPECT_FALSE(clear_fixed_point(net, std::vector<double>{-10.0, 0.0}));

  auto zero = clear_lp(net, std::vector<double>{0.0, 0.0});
  ASSERT_TRUE(zero);
  EXPECT_NEAR(zero->payments[0], 0.0, 1e-12);
  EXPECT_NEAR(zero->payments[1], 0.0, 1e-12);
  EXPECT_NEAR(zero->society_equity, 0.0, 1e-12);
}

TEST(Clearing, RejectsInvalidInput) {
  auto bad = LiabilityNetwork::from_rows({{0, 0, 0}, {1, 0, 1}, {0, 0, 0}});
  EXPECT_THROW(clear_fixed_point(bad, std::vector<double>{1.0, 1.0}), ModelError);
  EXPECT_THROW(clear_lp(TwoBank(), std::vector<double>{1.0}), ModelError);
}

TEST(Clearing, MethodAgreementOnRandomNetworks) {
  std::mt19937_64 rng(2026);
  for (int t = 0; t < 200; ++t) {
    auto net = oracle::random_network(rng, 1 + rng() % 6);
    auto x = RandomWealth(rng, net);
    auto fp = clear_fixed_point(net, x);
    auto lp = clear_lp(net, x);
    ASSERT_TRUE(fp && lp);
    PaymentSystem sys(net);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_NEAR(fp->payments[i], lp->payments[i], 1e-7);
      EXPECT_GE(lp->payments[i], 0.0);
      EXPECT_LE(lp->payments[i], sys.pbar(i));
    }
    EXPECT_NEAR(fp->society_equity, lp->society_equity, 1e-7);
    EXPECT_LT(sys.fixed_point_residual(x, lp->payments), 1e-8);
    EXPECT_NEAR(lp->society_equity, sys.society_equity(lp->payments), 1e-8);
  }
}

TEST(Clearing, InfeasibilityVerdictsAgree) {
  std::mt19937_64 rng(31);
  int infeasible = 0;
  for (int t = 0; t < 200; ++t) {
    auto net = oracle::random_network(rng, 1 + rng() % 4);
    auto x = RandomWealth(rng, net, -6.0);
    const bool fp = clear_fixed_point(net, x).has_value();
    const bool lp = clear_lp(net, x).has_value();
    EXPECT_EQ(fp, lp);
    infeasible += fp ? 0 : 1;
  }
  EXPECT_GT(infeasible, 0);
}

TEST(Clearing, EquityMonotoneConcaveAndInRange) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    auto net = oracle::random_network(rng, 1 + rng() % 5);
    PaymentSystem sys(net);
    auto x = RandomWealth(rng, net);
    auto y = x;
    for (double& v : y) v += 2.0 * u(rng);
    auto fx = clear_lp(net, x), fy = clear_lp(net, y);
    ASSERT_TRUE(fx && fy);
    EXPECT_LE(fx->society_equity, fy->society_equity + 1e-9);
    EXPECT_GE(fx->society_equity, -1e-12);
    EXPECT_LE(fx->society_equity, sys.max_equity() + 1e-9);

    auto x2 = RandomWealth(rng, net);
    const double g = u(rng);
    std::vector<double> mid(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mid[i] = g * x[i] + (1.0 - g) * x2[i];
    auto f2 = clear_lp(net, x2), fm = clear_lp(net, mid);
    ASSERT_TRUE(f2 && fm);
    EXPECT_GE(fm->society_equity, g * fx->society_equity + (1.0 - g) * f2->society_equity - 1e-8);
  }
}

TEST(CcpTransform, OneWayLiability) {
  auto t = ccp_transform(LiabilityNetwork::from_rows({{0, 0, 0}, {1, 0, 1}, {1, 0, 0}}));
  ASSERT_EQ(t.nodes(), 4u);
  EXPECT_EQ(t(1, 3), 1.0);
  EXPECT_EQ(t(3, 2), 1.0);
  EXPECT_EQ(t(1, 2), 0.0);
  EXPECT_EQ(t(1, 0), 1.0);
  EXPECT_EQ(t(2, 0), 1.0);
  EXPECT_EQ(t(3, 0), 0.0);
}

TEST(CcpTransform, PerfectNetting) {
  auto t = ccp_transform(LiabilityNetwork::from_rows({{0, 0, 0}, {1, 0, 1}, {1, 1, 0}}));
  for (std::size_t i = 1; i <= 2; ++i) {
    EXPECT_EQ(t(i, 3), 0.0);
    EXPECT_EQ(t(3, i), 0.0);
  }
}

TEST(CcpTransform, Conservation) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    auto net = oracle::random_network(rng, 1 + rng() % 6);
    auto t = ccp_transform(net);
    const std::size_t c = t.nodes() - 1;
    double in = 0.0, out = 0.0;
    for (std::size_t i = 1; i < c; ++i) {
      in += t(i, c);
      out += t(c, i);
    }
    EXPECT_NEAR(in - out, 0.0, 1e-10);
    EXPECT_TRUE(validate_ccp_network(t).empty());
  }
}

TEST(ClearCcp, Cascade) {
  auto t = ccp_transform(TwoBank());
  auto r = clear_ccp(t, std::vector<double>{2.0, 1.0, 0.0});
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->payments[0], 2.0, 1e-9);
  EXPECT_NEAR(r->payments[1], 1.0, 1e-9);
  EXPECT_NEAR(r->payments[2], 1.0, 1e-9);
  EXPECT_NEAR(r->society_equity, 2.0, 1e-9);
}

TEST(ClearCcp, ZeroWealth) {
  auto r = clear_ccp(ccp_transform(TwoBank()), std::vector<double>{0.0, 0.0, 0.0});
  ASSERT_TRUE(r);
  for (double p : r->payments) EXPECT_NEAR(p, 0.0, 1e-12);
  EXPECT_NEAR(r->society_equity, 0.0, 1e-12);
}

TEST(ClearCcp, RepairKeepsObjectiveAndClears) {
  std::mt19937_64 rng(123);
  for (int k = 0; k < 100; ++k) {
    auto t = ccp_transform(oracle::random_network(rng, 1 + rng() % 5));
    PaymentSystem sys(t);
    std::vector<double> x(sys.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::uniform_real_distribution<double>(0.0, 2.0 * std::max(sys.pbar(i), 1.0))(rng);
    auto r = clear_ccp(t, x);
    ASSERT_TRUE(r);
    EXPECT_LT(sys.fixed_point_residual(x, r->payments), 1e-8);
    EXPECT_NEAR(r->society_equity, r->lp_objective, 1e-10);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) EXPECT_EQ(r->payments[i], r->lp_payments[i]);
  }
}

TEST(ClearCcp, RejectsNonCcpShape) {
  EXPECT_THROW(clear_ccp(TwoBank(), std::vector<double>{1.0, 1.0}), ModelError);
}

}  // namespace
}  // namespace sysrisk
