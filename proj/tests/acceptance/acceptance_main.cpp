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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   sysrisk_acceptance <path to sysrisk CLI> <samples directory>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sysrisk/checks.hpp"
#include "sysrisk/clearing.hpp"
#include "sysrisk/io.hpp"
#include "sysrisk/penalty.hpp"
#include "sysrisk/region.hpp"
#include "sysrisk/sampling.hpp"
#include "sysrisk/systemic.hpp"

namespace sysrisk {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string g_cli;
std::string g_samples;

std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

SystemicModel LoadSample(const std::string& name, AssumptionPolicy policy = AssumptionPolicy::kEnforce) {
  ModelInput in = load_model(g_samples + "/" + name);
  return SystemicModel(std::move(in.wealth), std::move(in.aggregation), std::move(in.risk), policy);
}

LiabilityNetwork TwoBank() { return LiabilityNetwork::from_rows({{0, 0, 0}, {1, 0, 1}, {1, 0, 0}}); }

Verdict ClearingEquivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2026);
  double worst = 0.0;
  std::size_t failures = 0;
  for (int t = 0; t < 200; ++t) {
    auto net = oracle::random_network(rng, 1 + rng() % 6);
    std::vector<double> x(net.institutions());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::uniform_real_distribution<double>(0.0, 2.0 * net.total_liability(i + 1))(rng);
    auto fp = clear_fixed_point(net, x);
    auto lp = clear_lp(net, x);
    if (!fp || !lp) {
      ++failures;
      continue;
    }
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(fp->payments[i] - lp->payments[i]));
    worst = std::max(worst, std::abs(fp->society_equity - lp->society_equity));
  }
  const double secs = Seconds(start);
  return {failures == 0 && worst <= 1e-7 && secs < 10.0,
          "200 networks, max diff " + Fmt(worst) + ", " + Fmt(secs) + " s"};
}

Verdict ConjugateCorrectness() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    auto net = oracle::random_network(rng, 1 + t % 3);
    AggregationModel agg = EisenbergNoe(net);
    std::vector<double> z(net.institutions());
    for (double& v : z) v = u(rng);
    worst = std::max(worst, std::abs(agg.conjugate(z).g - oracle::en_conjugate_by_vertices(net, z)));
  }
  return {worst <= 1e-9, "500 z, max diff " + Fmt(worst)};
}

Verdict CcpRepair() {
  std::mt19937_64 rng(123);
  double residual = 0.0, objective = 0.0;
  std::size_t failures = 0;
  for (int k = 0; k < 100; ++k) {
    auto t = ccp_transform(oracle::random_network(rng, 1 + rng() % 5));
    PaymentSystem sys(t);
    std::vector<double> x(sys.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::uniform_real_distribution<double>(0.0, 2.0 * std::max(sys.pbar(i), 1.0))(rng);
    auto r = clear_ccp(t, x);
    if (!r) {
      ++failures;
      continue;
    }
    residual = std::max(residual, sys.fixed_point_residual(x, r->payments));
    objective = std::max(objective, std::abs(r->society_equity - r->lp_objective));
  }
  return {failures == 0 && residual <= 1e-8 && objective <= 1e-10,
          "100 instances, residual " + Fmt(residual) + ", objective drift " + Fmt(objective)};
}

// Every aggregation paired with every base measure; pairs violating the
// well-definedness assumption are skipped and listed.
Verdict WeakDuality() {
  auto space = ScenarioSpace({0.2, 0.5, 0.3});
  auto mixed = WealthProcess::from_rows(space, {{0.4, -0.2}, {-0.6, 0.9}, {1.1, 0.3}});
  auto pos = WealthProcess::from_rows(space, {{1.4, 0.8}, {0.4, 1.9}, {2.1, 1.3}});
  auto pos3 = WealthProcess::from_rows(space, {{1.4, 0.8, 0.0}, {0.4, 1.9, 0.2}, {2.1, 1.3, 0.0}});
  struct Agg {
    AggregationModel agg;
    WealthProcess x;
    double lambda0;
  };
  const std::vector<Agg> aggs{
      {TotalPL{2}, mixed, 0.3},
      {TotalLoss{2}, mixed, 0.5},
      {EntropicAgg{2}, mixed, 0.5},
      {EisenbergNoe(TwoBank()), pos, -1.0},
      {EisenbergNoeCCP(TwoBank()), pos3, -1.0},
      {ResourceAllocation({1.0, 1.0}, 2, {1.0, 0.5, 0.5, 1.0}), pos, -1.0},
      {MaxFlowPaths({{0, 1}, {1, 2}}, 0, 2), mixed, 0.3},
  };
  std::size_t pairs = 0, violations = 0, vacuous = 0;
  std::string skipped;
  for (const auto& a : aggs) {
    for (const BaseRiskMeasure& base : {BaseRiskMeasure(ShiftedExpectation{a.lambda0}), BaseRiskMeasure(EntropicRisk{}),
                                        BaseRiskMeasure(AverageValueAtRisk{0.5})}) {
      std::optional<SystemicModel> m;
      try {
        m.emplace(a.x, a.agg, base);
      } catch (const AssumptionError&) {
        skipped += std::string(skipped.empty() ? "" : " ") + a.agg.kind() + "/" + base.kind();
        continue;
      }
      ++pairs;
      auto rep = weak_duality_check(*m, sample_duals(*m, 1000), 1e-9);
      violations += rep.violations;
      vacuous += rep.finite == 0 ? 1 : 0;
    }
  }
  return {pairs > 0 && violations == 0 && vacuous == 0,
          std::to_string(pairs) + " valid pairs x 1000 duals, " + std::to_string(violations) + " violations, " +
              std::to_string(vacuous) + " pairs without finite duals; skipped: " + skipped};
}

Verdict StrongDuality() {
  const auto start = std::chrono::steady_clock::now();
  auto m = LoadSample("entropic_entropic.json", AssumptionPolicy::kWaive);
  const double r = rho_ins(m);
  auto opt = optimize_dual(m);
  const double secs = Seconds(start);
  const double gap = r - opt.value;
  return {gap <= 1e-3 && gap >= -1e-9 && secs < 60.0,
          "rho_ins " + Fmt(r) + ", optimized dual " + Fmt(opt.value) + ", gap " + Fmt(gap) + ", " + Fmt(secs) + " s"};
}

Verdict SensitiveDuality() {
  auto x = WealthProcess::from_rows(ScenarioSpace({0.4, 0.6}), {{0.5, -0.7}, {-0.3, 1.2}});
  const std::vector<SystemicModel> models{
      SystemicModel(x, EntropicAgg{2}, ShiftedExpectation{0.5}),
      SystemicModel(x, TotalLoss{2}, ShiftedExpectation{0.6}),
      SystemicModel(x, MaxFlowPaths({{0, 1}, {1, 2}}, 0, 2), AverageValueAtRisk{0.5}),
      SystemicModel(x, TotalPL{2}, EntropicRisk{}),
  };
  Rng rng(71);
  std::size_t violations = 0, unseparated = 0, members = 0;
  for (const auto& m : models) {
    auto rep = sensitive_duality_check(m, sample_capital(rng, x, 100), sample_duals(m, 1000), 1e-8);
    violations += rep.member_violations;
    unseparated += rep.unseparated;
    members += rep.members;
  }
  return {violations == 0 && unseparated == 0 && members > 0,
          std::to_string(models.size()) + " instances x 100 z (" + std::to_string(members) + " members), " +
              std::to_string(violations) + " member violations, " + std::to_string(unseparated) + " unseparated"};
}

Verdict TotalPlCollapse() {
  double worst = 0.0;
  std::size_t mismatches = 0, unbounded_misses = 0;
  Rng rng(8);
  for (const BaseRiskMeasure& base : {BaseRiskMeasure(EntropicRisk{}), BaseRiskMeasure(ShiftedExpectation{0.3}),
                                      BaseRiskMeasure(AverageValueAtRisk{0.5})}) {
    auto sample = LoadSample("total_pl_entropic.json");
    SystemicModel m(sample.wealth(), TotalPL{2}, base);
    worst = std::max(worst, std::abs(rho_ins(m) - rho_sen(m, std::vector<double>{1.0, 1.0}).value));
    unbounded_misses += rho_sen(m, std::vector<double>{1.0, 0.4}).unbounded ? 0 : 1;
    for (const auto& z : sample_capital(rng, m.wealth(), 500))
      mismatches += r_ins_membership(m, z) == r_sen_membership(m, z) ? 0 : 1;
  }
  return {worst <= 1e-8 && mismatches == 0 && unbounded_misses == 0,
          "max |rho_ins - rho_sen_1| " + Fmt(worst) + ", " + std::to_string(mismatches) +
              " region mismatches over 1500 z"};
}

Verdict NonCoincidence() {
  auto m = LoadSample("total_loss_witness.json");
  const double ins = rho_ins(m), sen = rho_sen(m, std::vector<double>{1.0, 1.0}).value;
  return {std::abs(ins - sen) > 1e-6, "rho_ins " + Fmt(ins) + ", rho_sen_1 " + Fmt(sen)};
}

WealthProcess Perturbed(Rng& rng, const WealthProcess& x, double lo, double hi) {
  std::vector<std::vector<double>> rows(x.scenarios());
  for (std::size_t k = 0; k < x.scenarios(); ++k)
    for (std::size_t i = 0; i < x.dim(); ++i) rows[k].push_back(x.at(k, i) + lo + (hi - lo) * uniform01(rng));
  return WealthProcess::from_rows(x.space(), rows);
}

Verdict Axioms() {
  auto x = WealthProcess::from_rows(ScenarioSpace({0.3, 0.3, 0.4}), {{1.0, 0.4}, {0.2, 1.5}, {0.9, 0.7}});
  const std::vector<SystemicModel> models{
      SystemicModel(x, EntropicAgg{2}, ShiftedExpectation{0.5}),
      SystemicModel(x, EisenbergNoe(TwoBank()), ShiftedExpectation{-1.0}),
      SystemicModel(x, MaxFlowPaths({{0, 1}, {1, 2}}, 0, 2), AverageValueAtRisk{0.5}),
      SystemicModel(x, TotalLoss{2}, ShiftedExpectation{0.5}),
  };
  Rng rng(90);
  std::size_t failures = 0, premises = 0;
  auto mix = [](const std::vector<double>& a, const std::vector<double>& b, double g) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = g * a[i] + (1.0 - g) * b[i];
    return out;
  };
  auto mix_wealth = [](const WealthProcess& a, const WealthProcess& b, double g) {
    std::vector<std::vector<double>> rows(a.scenarios());
    for (std::size_t k = 0; k < a.scenarios(); ++k)
      for (std::size_t i = 0; i < a.dim(); ++i) rows[k].push_back(g * a.at(k, i) + (1.0 - g) * b.at(k, i));
    return WealthProcess::from_rows(a.space(), rows);
  };
  using Member = std::function<bool(const SystemicModel&, const std::vector<double>&)>;
  const Member sen = [](const SystemicModel& m, const std::vector<double>& z) { return r_sen_membership(m, z); };
  const Member ins = [](const SystemicModel& m, const std::vector<double>& z) { return r_ins_membership(m, z); };
  for (const auto& m : models) {
    for (const Member& member : {sen, ins}) {
      const bool sensitive = &member == &sen;
      for (int t = 0; t < 500; ++t) {
        const auto zs = sample_capital(rng, x, 2);
        const auto& z = zs[0];
        // Monotonicity.
        auto up = m.with_wealth(Perturbed(rng, x, 0.0, 1.0));
        if (member(m, z)) {
          ++premises;
          failures += member(up, z) ? 0 : 1;
        }
        // Convexity in (X, z).
        auto other = m.with_wealth(Perturbed(rng, x, -0.5, 0.5));
        if (member(m, z) && member(other, zs[1])) {
          ++premises;
          const double g = uniform01(rng);
          failures += member(m.with_wealth(mix_wealth(x, other.wealth(), g)), mix(z, zs[1], g)) ? 0 : 1;
        }
        // Translativity, for R^sen only.
        if (sensitive) {
          std::vector<double> c{uniform01(rng) - 0.5, uniform01(rng) - 0.5};
          auto shifted = m.with_wealth(x.shifted(c));
          failures += member(m, z) == member(shifted, {z[0] - c[0], z[1] - c[1]}) ? 0 : 1;
        }
      }
    }
  }
  return {failures == 0 && premises > 0,
          std::to_string(models.size()) + " models x 500 triples per property, " + std::to_string(premises) +
              " nonvacuous premises, " + std::to_string(failures) + " failures"};
}

Verdict Coherent() {
  Rng rng(100);
  auto space = ScenarioSpace({0.25, 0.25, 0.5});
  auto x = WealthProcess::from_rows(space, {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
  x = Perturbed(rng, x, -1.0, 1.0);
  const std::vector<SystemicModel> models{
      SystemicModel(x, TotalLoss{2}, AverageValueAtRisk{0.5}, AssumptionPolicy::kWaive),
      SystemicModel(x, TotalPL{2}, AverageValueAtRisk{0.5}),
      SystemicModel(x, MaxFlowPaths({{0, 1}, {1, 2}}, 0, 2), AverageValueAtRisk{0.3}),
      SystemicModel(x, ResourceAllocation({1.0, 1.0}, 2, {1.0, 0.5, 0.5, 1.0}), AverageValueAtRisk{0.7},
                    AssumptionPolicy::kWaive),
  };
  bool ok = true;
  double homogeneity = 0.0, alpha = 0.0;
  std::size_t finite = 0;
  for (const auto& m : models) {
    auto rep = coherent_dual_check(m, sample_duals(m, 400));
    ok = ok && rep.passed;
    finite += rep.finite;
    alpha = std::max(alpha, rep.max_abs_finite);
    for (double e : rep.homogeneity_errors) homogeneity = std::max(homogeneity, e);
  }
  return {ok && finite > 0, "max homogeneity error " + Fmt(homogeneity) + ", " + std::to_string(finite) +
                                " finite penalties with max |alpha| " + Fmt(alpha)};
}

Verdict ModelUncertainty() {
  Rng rng(73);
  auto sample = LoadSample("total_pl_entropic.json");
  SystemicModel m(sample.wealth(), TotalPL{2}, EntropicRisk{});
  std::vector<Density> measures;
  for (int j = 0; j < 50; ++j) measures.push_back(random_density(rng, m.space()));
  auto rep = model_uncertainty_check(m, sample_capital(rng, m.wealth(), 100), measures);
  return {rep.counterexamples.empty() && rep.measures == 50,
          "100 z x " + std::to_string(rep.measures) + " S (" + std::to_string(rep.members) + " members), " +
              std::to_string(rep.counterexamples.size()) + " counterexamples"};
}

Verdict EntropicIdentity() {
  Rng rng(47);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 6;
    const auto q = dirichlet_masses(rng, n, 1e-6);
    const auto s = dirichlet_masses(rng, n, 1e-6);
    const double w = log_uniform(rng, 1e-2, 1e2);
    std::vector<double> wq(n);
    for (std::size_t k = 0; k < n; ++k) wq[k] = w * q[k];
    const double rhs = w * detail::relative_entropy_masses(q, s) + w * std::log(w);
    worst = std::max(worst, std::abs(detail::relative_entropy_masses(wq, s) - rhs) / (1.0 + std::abs(rhs)));
  }
  // alpha^sys for EntropicAgg + EntropicRisk on n = 2 against a 10^5 grid.
  AggregationModel agg = EntropicAgg{2};
  double grid_worst = 0.0;
  int nonfinite = 0;
  for (int t = 0; t < 5; ++t) {
    ScenarioSpace space(dirichlet_masses(rng, 2, 0.05));
    DualVariable dual = sample_dual_uniform(rng, space, 2);
    const auto flat = detail::weighted_masses(dual);
    std::vector<std::vector<double>> m{{flat[0], flat[1]}, {flat[2], flat[3]}};
    const double p1 = space.prob(0), p2 = space.prob(1);
    auto penalty = [&](double s1, double s2) { return s1 * std::log(s1 / p1) + s2 * std::log(s2 / p2); };
    auto g = [&](const std::vector<double>& z) { return agg.conjugate(z).g; };
    const double lib = alpha_sys(agg, EntropicRisk{}, dual).value;
    const double grid = oracle::grid_penalty_n2(penalty, g, m);
    if (!std::isfinite(lib) || !std::isfinite(grid)) ++nonfinite;
    else grid_worst = std::max(grid_worst, std::abs(lib - grid));
  }
  return {worst <= 1e-10 && grid_worst <= 1e-5 && nonfinite == 0,
          "identity max rel error " + Fmt(worst) + " on 1000 draws, grid diff " + Fmt(grid_worst)};
}

std::string Capture(const std::string& command) {
  std::string out;
  FILE* p = popen(command.c_str(), "r");
  if (!p) return "<popen failed>";
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
  const int status = pclose(p);
  return out + "\n<status " + std::to_string(status) + ">";
}

Verdict Determinism() {
  const std::string cli = "'" + g_cli + "'";
  auto model = [](const std::string& name) { return " --model '" + g_samples + "/" + name + "'"; };
  const std::vector<std::string> commands{
      cli + " dual-check" + model("entropic_entropic.json") + " --samples 500 --seed 42",
      cli + " dual-check" + model("eisenberg_noe.json") + " --samples 300 --seed 7",
      cli + " rho-sen" + model("entropic_shifted.json") + " --w 0.3,1",
      cli + " region" + model("entropic_shifted.json") + " --directions 16",
      cli + " clear --network '" + g_samples + "/two_bank_network.json'" + model("eisenberg_noe.json"),
  };
  std::size_t differing = 0, runs = 0;
  for (const auto& c : commands) {
    const std::string reference = Capture(c);
    if (reference.find("\"command\"") == std::string::npos) ++differing;
    for (const char* env : {"", "SYSRISK_THREADS=1 ", "SYSRISK_THREADS=4 ", "SYSRISK_THREADS=7 "}) {
      ++runs;
      differing += Capture(std::string(env) + c) == reference ? 0 : 1;
    }
  }
  return {differing == 0, std::to_string(commands.size()) + " commands, " + std::to_string(runs) +
                              " reruns across thread counts, " + std::to_string(differing) + " differing"};
}

}  // namespace
}  // namespace sysrisk

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: sysrisk_acceptance <sysrisk cli> <samples dir>\n";
    return 1;
  }
  sysrisk::g_cli = argv[1];
  sysrisk::g_samples = argv[2];
  const std::vector<std::pair<const char*, std::function<sysrisk::Verdict()>>> criteria{
      {"clearing equivalence", sysrisk::ClearingEquivalence},
      {"conjugate correctness", sysrisk::ConjugateCorrectness},
      {"CCP repair", sysrisk::CcpRepair},
      {"weak duality", sysrisk::WeakDuality},
      {"strong duality at tiny scale", sysrisk::StrongDuality},
      {"sensitive duality", sysrisk::SensitiveDuality},
      {"TotalPL collapse", sysrisk::TotalPlCollapse},
      {"non-coincidence witness", sysrisk::NonCoincidence},
      {"axiom suite", sysrisk::Axioms},
      {"coherent case", sysrisk::Coherent},
      {"model-uncertainty representation", sysrisk::ModelUncertainty},
      {"entropic identity", sysrisk::EntropicIdentity},
      {"determinism", sysrisk::Determinism},
  };
  int failed = 0;
  for (std::size_t j = 0; j < criteria.size(); ++j) {
    sysrisk::Verdict v;
    try {
      v = criteria[j].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("AC%02zu %s %s: %s\n", j + 1, v.pass ? "PASS" : "FAIL", criteria[j].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
