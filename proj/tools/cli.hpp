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

// sysrisk command line: clear, rho-ins, rho-sen, dual-check, region.
//
// Exit codes: 0 success, 1 validation or usage error, 2 a mathematically
// meaningful negative result (infeasible clearing, empty R^ins, unbounded
// scalarization, failed dual check).

#ifndef SYSRISK_TOOLS_CLI_HPP_
#define SYSRISK_TOOLS_CLI_HPP_

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sysrisk/checks.hpp"
#include "sysrisk/clearing.hpp"
#include "sysrisk/io.hpp"
#include "sysrisk/penalty.hpp"
#include "sysrisk/region.hpp"
#include "sysrisk/sampling.hpp"
#include "sysrisk/systemic.hpp"

namespace sysrisk::cli {

inline constexpr double kDefaultTolLp = tol::kLpFeasibility;
inline constexpr double kDefaultTolScalarization = tol::kScalarization;
inline constexpr double kDefaultTolAlpha = tol::kPenalty;
inline constexpr double kDefaultTolDual = 1e-9;

struct RunConfig {
  std::string command;
  std::string model_path;
  std::string network_path;
  std::string wealth;  // comma separated, clear only
  std::string w;       // comma separated, rho-sen only
  std::size_t directions = 32;
  std::size_t samples = 1000;
  std::uint64_t seed = kDefaultSeed;
  bool optimize = false;
  std::string out;
  double tol_lp = kDefaultTolLp;
  double tol_scalarization = kDefaultTolScalarization;
  double tol_alpha = kDefaultTolAlpha;
  double tol_dual = kDefaultTolDual;
};

// Validation and usage failures; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size() || !std::isfinite(v))
      throw UsageError(std::string(flag) + ": '" + item + "' is not a finite number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

inline Json tolerances_json(const RunConfig& c) {
  return Json{{"lp_feasibility", c.tol_lp},
              {"scalarization", c.tol_scalarization},
              {"alpha", c.tol_alpha},
              {"dual_slack", c.tol_dual}};
}

inline std::string csv_number(double v) {
  if (is_pos_inf(v)) return "+inf";
  if (is_neg_inf(v)) return "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

class Runner {
 public:
  Runner(const RunConfig& c, std::ostream& out) : c_(c), out_(out) {}

  int run() {
    if (c_.command == "clear") return clear();
    if (c_.command == "rho-ins") return rho_ins_cmd();
    if (c_.command == "rho-sen") return rho_sen_cmd();
    if (c_.command == "dual-check") return dual_check();
    if (c_.command == "region") return region();
    throw UsageError("unknown command " + c_.command);
  }

 private:
  std::optional<LiabilityNetwork> network() const {
    if (c_.network_path.empty()) return std::nullopt;
    return load_network(c_.network_path);
  }

  SystemicModel model(AssumptionPolicy policy) const {
    if (c_.model_path.empty()) throw UsageError("--model is required for " + c_.command);
    ModelInput in = load_model(c_.model_path, network());
    return SystemicModel(std::move(in.wealth), std::move(in.aggregation), std::move(in.risk), policy);
  }

  void emit(Json j) {
    j["command"] = c_.command;
    const std::string text = j.dump(2) + "\n";
    if (c_.out.empty() || c_.command == "region") {
      out_ << text;
    } else {
      std::ofstream f(c_.out, std::ios::binary);
      if (!f) throw UsageError("--out: cannot write " + c_.out);
      f << text;
    }
  }

  int clear() {
    if (c_.network_path.empty()) throw UsageError("clear needs --network");
    const LiabilityNetwork net = load_network(c_.network_path);
    std::vector<std::vector<double>> wealth;
    if (!c_.wealth.empty()) {
      wealth.push_back(parse_list(c_.wealth, "--wealth"));
    } else if (!c_.model_path.empty()) {
      const Json j = read_json_file(c_.model_path);
      const WealthProcess x = parse_scenarios(io::Field(c_.model_path, j));
      for (std::size_t k = 0; k < x.scenarios(); ++k) wealth.emplace_back(x.row(k).begin(), x.row(k).end());
    } else {
      throw UsageError("clear needs --wealth or --model");
    }
    for (const auto& x : wealth)
      if (x.size() != net.institutions())
        throw UsageError("--wealth: network has " + std::to_string(net.institutions()) + " institutions, got " +
                         std::to_string(x.size()) + " values");
    LpOptions lp;
    lp.feasibility_tol = c_.tol_lp;
    Json results = Json::array();
    bool infeasible = false;
    double max_delta = 0.0;
    for (std::size_t k = 0; k < wealth.size(); ++k) {
      auto fp = clear_fixed_point(net, wealth[k]);
      auto lpr = clear_lp(net, wealth[k], lp);
      Json r;
      r["scenario"] = k;
      r["wealth"] = to_json(wealth[k]);
      r["fixed_point"] = fp ? to_json(*fp) : Json(nullptr);
      r["lp"] = lpr ? to_json(*lpr) : Json(nullptr);
      if (fp && lpr) {
        double dp = 0.0;
        for (std::size_t i = 0; i < fp->payments.size(); ++i)
          dp = std::max(dp, std::abs(fp->payments[i] - lpr->payments[i]));
        const double de = std::abs(fp->society_equity - lpr->society_equity);
        max_delta = std::max({max_delta, dp, de});
        r["agreement"] = Json{{"payments_max_abs_diff", dp}, {"society_equity_abs_diff", de}};
        r["status"] = "cleared";
      } else {
        r["agreement"] = nullptr;
        // Both methods must reach the same verdict; a split verdict is a solver fault.
        r["status"] = (!fp && !lpr) ? "infeasible" : "method disagreement";
        infeasible = true;
      }
      results.push_back(std::move(r));
    }
    Json out;
    out["results"] = std::move(results);
    out["diagnostics"] = Json{{"institutions", net.institutions()},
                              {"max_method_difference", max_delta},
                              {"tolerances", tolerances_json(c_)}};
    emit(std::move(out));
    return infeasible ? 2 : 0;
  }

  int rho_ins_cmd() {
    const SystemicModel m = model(AssumptionPolicy::kEnforce);
    const std::vector<double> y = aggregate(m);
    std::size_t infeasible = 0;
    for (double v : y) infeasible += is_neg_inf(v) ? 1 : 0;
    const double value = rho_ins(m);
    Json out;
    out["value"] = to_json(value);
    out["status"] = is_pos_inf(value) ? "infeasible" : "ok";
    out["diagnostics"] = Json{{"aggregation", m.aggregation().kind()},
                              {"risk", m.base().kind()},
                              {"scenarios", m.scenarios()},
                              {"infeasible_scenarios", infeasible},
                              {"aggregate", to_json(y)},
                              {"tolerances", tolerances_json(c_)}};
    emit(std::move(out));
    return is_pos_inf(value) ? 2 : 0;
  }

  ScalarizationOptions scalarization_options() const {
    ScalarizationOptions opt;
    opt.tol_scalarization = c_.tol_scalarization;
    return opt;
  }

  static Json scalarization_diagnostics(const ScalarizationResult& r, double tol) {
    Json d;
    d["method"] = r.method;
    d["cross_check_delta"] = to_json(r.cross_check_delta);
    d["cross_check_ok"] = !(r.cross_check_delta > tol);
    d["primary"] = r.primary ? to_json(*r.primary) : Json(nullptr);
    d["lagrangian"] = r.lagrangian ? to_json(*r.lagrangian) : Json(nullptr);
    return d;
  }

  int rho_sen_cmd() {
    if (c_.w.empty()) throw UsageError("rho-sen needs --w");
    const SystemicModel m = model(AssumptionPolicy::kEnforce);
    const std::vector<double> w = parse_list(c_.w, "--w");
    if (w.size() != m.dim())
      throw UsageError("--w: model has " + std::to_string(m.dim()) + " institutions, got " + std::to_string(w.size()));
    const ScalarizationResult r = rho_sen(m, w, scalarization_options());
    Json out;
    out["w"] = to_json(w);
    out["value"] = to_json(r.value);
    out["status"] = r.unbounded ? "unbounded direction" : "ok";
    out["z"] = r.unbounded ? Json(nullptr) : to_json(r.z);
    Json diag = scalarization_diagnostics(r, c_.tol_scalarization);
    diag["tolerances"] = tolerances_json(c_);
    out["diagnostics"] = std::move(diag);
    emit(std::move(out));
    return r.unbounded ? 2 : 0;
  }

  int dual_check() {
    if (c_.samples == 0) throw UsageError("dual-check: nothing to check (--samples 0)");
    // Weak duality does not need the Assumption; it is reported only.
    const SystemicModel m = model(AssumptionPolicy::kWaive);
    const auto duals = sample_duals(m, c_.samples, c_.seed);
    PenaltyOptions popt;
    // Mirror-descent stopping rule scales with the penalty tolerance.
    popt.simplex.rel_improvement = c_.tol_alpha * 1e-5;
    const WeakDualityReport r = weak_duality_check(m, duals, c_.tol_dual, popt);
    const bool passed = r.violations == 0;
    Json out;
    out["samples"] = r.samples;
    out["finite_duals"] = r.finite;
    out["rho_ins"] = to_json(r.rho_ins);
    out["max_dual_value"] = to_json(r.max_dual_value);
    out["min_slack"] = to_json(r.min_slack);
    out["violations"] = r.violations;
    bool ok = passed;
    if (c_.optimize) {
      const DualOptimum o = optimize_dual(m);
      const double best = std::max(o.value, o.certificate_value);
      const double gap = std::isfinite(r.rho_ins) && std::isfinite(best) ? r.rho_ins - best : kInf;
      out["optimized"] = Json{{"value", to_json(o.value)},
                              {"certificate_value", to_json(o.certificate_value)},
                              {"evaluations", o.evaluations},
                              {"gap", to_json(gap)},
                              {"gap_ok", gap <= 1e-3 && gap >= -c_.tol_dual}};
      ok = ok && gap >= -c_.tol_dual;
    }
    out["passed"] = ok;
    out["diagnostics"] = Json{{"seed", c_.seed},
                              {"assumption_holds", m.assumption_holds()},
                              {"boundary_suspect", r.boundary_suspect},
                              {"aggregation", m.aggregation().kind()},
                              {"risk", m.base().kind()},
                              {"tolerances", tolerances_json(c_)}};
    emit(std::move(out));
    return ok ? 0 : 2;
  }

  std::vector<std::vector<double>> region_directions(std::size_t d) const {
    if (c_.directions == 0) throw UsageError("--directions must be positive");
    if (d == 2) return simplex_directions(c_.directions);
    // Coordinate axes, the diagonal, then seeded Dirichlet directions.
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < d && out.size() < c_.directions; ++i) {
      std::vector<double> e(d, 0.0);
      e[i] = 1.0;
      out.push_back(e);
    }
    if (out.size() < c_.directions) out.push_back(std::vector<double>(d, 1.0 / static_cast<double>(d)));
    Rng rng(c_.seed);
    while (out.size() < c_.directions) out.push_back(dirichlet_masses(rng, d));
    return out;
  }

  int region() {
    const SystemicModel m = model(AssumptionPolicy::kEnforce);
    const auto dirs = region_directions(m.dim());
    auto entries = r_sen_outer_approx_detailed(m, dirs, scalarization_options());
    HalfspaceSet set;
    for (const auto& e : entries) set.halfspaces.push_back(e.halfspace);
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), 0);
    if (m.dim() == 2) order = angle_order(set);

    Json hs = Json::array();
    std::size_t failures = 0;
    for (std::size_t j : order) {
      const Halfspace& h = set.halfspaces[j];
      Json e;
      e["w"] = to_json(h.normal);
      e["offset"] = to_json(h.offset);
      e["status"] = h.status;
      e["z"] = h.point.empty() ? Json(nullptr) : to_json(h.point);
      if (!h.message.empty()) e["message"] = h.message;
      e["diagnostics"] = h.status == "error" ? Json(nullptr)
                                              : scalarization_diagnostics(entries[j].result, c_.tol_scalarization);
      failures += h.status == "ok" ? 0 : 1;
      hs.push_back(std::move(e));
    }
    Json out;
    out["halfspaces"] = std::move(hs);
    std::vector<std::vector<double>> poly;
    if (m.dim() == 2) {
      poly = boundary_polyline(set);
      Json p = Json::array();
      for (const auto& z : poly) p.push_back(to_json(z));
      out["polyline"] = std::move(p);
    } else {
      out["polyline"] = nullptr;
    }
    out["diagnostics"] = Json{{"directions", dirs.size()},
                              {"failed_directions", failures},
                              {"seed", c_.seed},
                              {"tolerances", tolerances_json(c_)}};
    if (!c_.out.empty()) {
      write_csv(c_.out + ".halfspaces.csv", set, order);
      if (m.dim() == 2) write_polyline(c_.out + ".polyline.csv", poly);
    }
    emit(std::move(out));
    return failures == entries.size() ? 2 : 0;
  }

  void write_csv(const std::string& path, const HalfspaceSet& set, const std::vector<std::size_t>& order) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("--out: cannot write " + path);
    const std::size_t d = set.halfspaces.front().normal.size();
    for (std::size_t i = 0; i < d; ++i) f << "w" << i + 1 << ",";
    f << "offset,status\n";
    for (std::size_t j : order) {
      const Halfspace& h = set.halfspaces[j];
      for (double v : h.normal) f << csv_number(v) << ",";
      f << csv_number(h.offset) << "," << h.status << "\n";
    }
  }

  void write_polyline(const std::string& path, const std::vector<std::vector<double>>& poly) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("--out: cannot write " + path);
    f << "z1,z2\n";
    for (const auto& z : poly) f << csv_number(z[0]) << "," << csv_number(z[1]) << "\n";
  }

  const RunConfig& c_;
  std::ostream& out_;
};

inline void check_tightening(double value, double def, const char* flag) {
  if (!(value > 0.0) || value > def)
    throw UsageError(std::string(flag) + " may only tighten the default " + csv_number(def) + " (got " +
                     csv_number(value) + ")");
}

// Errors go to `err` as one line; the JSON result goes to `out`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Systemic risk measures: clearing, rho^ins, rho^sen, dual checks and regions", "sysrisk"};
  app.require_subcommand(1);
  RunConfig c;
  auto add_model = [&](CLI::App* s) {
    s->add_option("--model", c.model_path, "model JSON file");
    s->add_option("--network", c.network_path, "liability network JSON file");
  };
  auto add_common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "random seed")->capture_default_str();
    s->add_option("--out", c.out, "output path (region: CSV prefix)");
    s->add_option("--tol-lp", c.tol_lp, "LP feasibility tolerance")->capture_default_str();
    s->add_option("--tol-scalarization", c.tol_scalarization, "scalarization cross-check tolerance")
        ->capture_default_str();
    s->add_option("--tol-alpha", c.tol_alpha, "systemic penalty tolerance")->capture_default_str();
    s->add_option("--tol-dual", c.tol_dual, "weak-duality slack tolerance")->capture_default_str();
  };
  CLI::App* clear = app.add_subcommand("clear", "clearing payments by fixed point and LP");
  add_model(clear);
  clear->add_option("--wealth", c.wealth, "comma-separated wealth vector");
  add_common(clear);
  CLI::App* ins = app.add_subcommand("rho-ins", "insensitive systemic risk");
  add_model(ins);
  add_common(ins);
  CLI::App* sen = app.add_subcommand("rho-sen", "sensitive systemic risk in direction w");
  add_model(sen);
  sen->add_option("--w", c.w, "comma-separated nonnegative weights");
  add_common(sen);
  CLI::App* dual = app.add_subcommand("dual-check", "weak duality on sampled dual variables");
  add_model(dual);
  dual->add_option("--samples", c.samples, "number of sampled duals")->capture_default_str();
  dual->add_flag("--optimize", c.optimize, "also maximize the dual value");
  add_common(dual);
  CLI::App* region = app.add_subcommand("region", "supporting halfspaces of R^sen");
  add_model(region);
  region->add_option("--directions", c.directions, "number of directions")->capture_default_str();
  add_common(region);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  c.command = app.get_subcommands().front()->get_name();
  try {
    check_tightening(c.tol_lp, kDefaultTolLp, "--tol-lp");
    check_tightening(c.tol_scalarization, kDefaultTolScalarization, "--tol-scalarization");
    check_tightening(c.tol_alpha, kDefaultTolAlpha, "--tol-alpha");
    check_tightening(c.tol_dual, kDefaultTolDual, "--tol-dual");
    return Runner(c, out).run();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const AssumptionError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"sysrisk"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sysrisk::cli

#endif  // SYSRISK_TOOLS_CLI_HPP_
