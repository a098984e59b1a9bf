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

// JSON model and network files.
//
// Model file:
//   {"scenarios": [{"prob": p, "wealth": [x_1, ..., x_d]}, ...],
//    "aggregation": {"kind": "total_pl" | "total_loss" | "entropic" |
//                    "eisenberg_noe" | "eisenberg_noe_ccp" |
//                    "resource_allocation" | "max_flow", ...},
//    "risk": {"kind": "expectation" | "entropic" | "avar",
//             "lambda0": ..., "beta": ...}}
// Network file: {"liabilities": [[...], ...]}, row and column 0 = society.
//
// Errors are InputError with a "<file>: <location>: <problem>" message.

#ifndef SYSRISK_IO_HPP_
#define SYSRISK_IO_HPP_

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sysrisk/aggregation.hpp"
#include "sysrisk/base_risk.hpp"
#include "sysrisk/clearing.hpp"
#include "sysrisk/common.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/systemic.hpp"

namespace sysrisk {

using Json = nlohmann::json;

class InputError : public ModelError {
 public:
  using ModelError::ModelError;
};

namespace io {

// Field path for error messages, e.g. scenarios[2].wealth.
class Field {
 public:
  Field(std::string file, const Json& j, std::string path = "") : file_(std::move(file)), j_(&j), path_(std::move(path)) {}

  const Json& json() const { return *j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& problem) const {
    throw InputError(file_ + ": field '" + (path_.empty() ? "<root>" : path_) + "': " + problem);
  }

  bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

  Field at(const char* key) const {
    if (!j_->is_object()) fail("must be an object");
    auto it = j_->find(key);
    if (it == j_->end()) Field(file_, *j_, join(key)).fail("is missing");
    return Field(file_, *it, join(key));
  }

  Field at(std::size_t idx) const { return Field(file_, (*j_)[idx], path_ + "[" + std::to_string(idx) + "]"); }

  std::size_t size() const {
    if (!j_->is_array()) fail("must be an array");
    return j_->size();
  }

  double number() const {
    if (!j_->is_number()) fail("must be a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("must be finite");
    return v;
  }

  long integer() const {
    if (!j_->is_number_integer()) fail("must be an integer");
    return j_->get<long>();
  }

  std::string string() const {
    if (!j_->is_string()) fail("must be a string");
    return j_->get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }

  std::vector<std::vector<double>> matrix() const {
    std::vector<std::vector<double>> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).numbers();
    return out;
  }

 private:
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  std::string file_;
  const Json* j_;
  std::string path_;
};

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline const char* network_assumption(const std::string& rule) {
  if (rule == "society has liabilities") return "assumption (i)";
  if (rule == "nonzero liability to society") return "assumption (ii)";
  if (rule == "self-liabilities") return "assumption (iii)";
  return "size limit";
}

}  // namespace io

inline Json parse_json_text(const std::string& text, const std::string& name) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::string what = e.what();
    const auto colon = what.rfind(": ");
    throw InputError(name + ": " + io::line_column(text, e.byte > 0 ? e.byte - 1 : 0) +
                     ": malformed JSON (" + (colon == std::string::npos ? what : what.substr(colon + 2)) + ")");
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

inline LiabilityNetwork parse_network(const io::Field& f) {
  const io::Field rows = f.at("liabilities");
  auto m = rows.matrix();
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i].size() != m.size()) rows.at(i).fail("matrix is not square (row has " + std::to_string(m[i].size()) +
                                                 " entries, expected " + std::to_string(m.size()) + ")");
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m[i][j] < 0.0) rows.at(i).at(j).fail("liabilities must be nonnegative");
  if (m.size() < 2) rows.fail("needs society and at least one institution");
  LiabilityNetwork net = LiabilityNetwork::from_rows(m);
  auto violations = validate_network(net);
  if (!violations.empty()) {
    const NetworkViolation& v = violations.front();
    rows.at(v.i).at(v.j).fail("violates " + std::string(io::network_assumption(v.rule)) + ": " + v.message);
  }
  return net;
}

inline LiabilityNetwork load_network(const std::string& path) {
  const Json j = read_json_file(path);
  return parse_network(io::Field(path, j));
}

inline BaseRiskMeasure parse_risk(const io::Field& f) {
  const std::string kind = f.at("kind").string();
  if (kind == "expectation") return ShiftedExpectation{f.has("lambda0") ? f.at("lambda0").number() : 0.0};
  if (kind == "entropic") return EntropicRisk{};
  if (kind == "avar") {
    const double beta = f.at("beta").number();
    if (!(beta > 0.0 && beta <= 1.0)) f.at("beta").fail("must lie in (0, 1]");
    return AverageValueAtRisk{beta};
  }
  f.at("kind").fail("unknown risk measure '" + kind + "' (expected expectation, entropic or avar)");
}

// `network` stands in for an inline "liabilities" payload.
inline AggregationModel parse_aggregation(const io::Field& f, std::size_t d,
                                          const std::optional<LiabilityNetwork>& network = std::nullopt) {
  const std::string kind = f.at("kind").string();
  auto net = [&]() -> LiabilityNetwork {
    if (f.has("liabilities")) return parse_network(f);
    if (network) return *network;
    f.fail("needs a liability matrix (inline \"liabilities\" or --network)");
  };
  auto dim_check = [&](std::size_t expected) {
    if (expected != d)
      f.fail(kind + " expects wealth vectors of length " + std::to_string(expected) + ", the scenarios have " +
             std::to_string(d));
  };
  try {
    if (kind == "total_pl") return TotalPL{d};
    if (kind == "total_loss") return TotalLoss{d};
    if (kind == "entropic") return EntropicAgg{d};
    if (kind == "eisenberg_noe") {
      LiabilityNetwork n = net();
      dim_check(n.institutions());
      return EisenbergNoe(n);
    }
    if (kind == "eisenberg_noe_ccp") {
      LiabilityNetwork n = net();
      dim_check(n.institutions() + 1);
      return EisenbergNoeCCP(n);
    }
    if (kind == "resource_allocation") {
      const std::vector<double> profit = f.at("profit").numbers();
      const auto usage = f.at("usage").matrix();
      if (usage.size() != d) f.at("usage").fail("needs one row per institution (" + std::to_string(d) + ")");
      std::vector<double> flat;
      for (std::size_t i = 0; i < usage.size(); ++i) {
        if (usage[i].size() != profit.size())
          f.at("usage").at(i).fail("needs one entry per task (" + std::to_string(profit.size()) + ")");
        flat.insert(flat.end(), usage[i].begin(), usage[i].end());
      }
      return ResourceAllocation(profit, d, flat);
    }
    if (kind == "max_flow") {
      const io::Field arcs = f.at("arcs");
      std::vector<MaxFlowPaths::Arc> list;
      for (std::size_t a = 0; a < arcs.size(); ++a) {
        const io::Field arc = arcs.at(a);
        if (arc.size() != 2) arc.fail("an arc is a pair [from, to]");
        list.emplace_back(arc.at(std::size_t{0}).integer(), arc.at(std::size_t{1}).integer());
      }
      MaxFlowPaths mf(list, f.at("source").integer(), f.at("sink").integer());
      dim_check(mf.dim());
      return mf;
    }
  } catch (const InputError&) {
    throw;
  } catch (const ModelError& e) {
    f.fail(e.what());
  }
  f.at("kind").fail("unknown aggregation '" + kind + "'");
}

inline WealthProcess parse_scenarios(const io::Field& f) {
  const io::Field sc = f.at("scenarios");
  const std::size_t n = sc.size();
  if (n == 0) sc.fail("needs at least one scenario");
  if (n > limits::kMaxScenarios) sc.fail("more than " + std::to_string(limits::kMaxScenarios) + " scenarios");
  std::vector<double> probs(n);
  std::vector<std::vector<double>> rows(n);
  for (std::size_t k = 0; k < n; ++k) {
    probs[k] = sc.at(k).at("prob").number();
    if (probs[k] <= 0.0) sc.at(k).at("prob").fail("must be positive");
    rows[k] = sc.at(k).at("wealth").numbers();
    if (rows[k].size() != rows[0].size())
      sc.at(k).at("wealth").fail("has " + std::to_string(rows[k].size()) + " entries, scenario 0 has " +
                                 std::to_string(rows[0].size()));
  }
  try {
    return WealthProcess::from_rows(ScenarioSpace(probs), rows);
  } catch (const ModelError& e) {
    sc.fail(e.what());
  }
}

struct ModelInput {
  WealthProcess wealth;
  AggregationModel aggregation;
  BaseRiskMeasure risk;
};

inline ModelInput parse_model(const Json& j, const std::string& name,
                              const std::optional<LiabilityNetwork>& network = std::nullopt) {
  const io::Field root(name, j);
  if (!j.is_object()) root.fail("must be an object");
  WealthProcess x = parse_scenarios(root);
  AggregationModel agg = parse_aggregation(root.at("aggregation"), x.dim(), network);
  BaseRiskMeasure risk = [&]() -> BaseRiskMeasure {
    try {
      return parse_risk(root.at("risk"));
    } catch (const InputError&) {
      throw;
    } catch (const ModelError& e) {
      root.at("risk").fail(e.what());
    }
  }();
  return {std::move(x), std::move(agg), std::move(risk)};
}

inline ModelInput load_model(const std::string& path, const std::optional<LiabilityNetwork>& network = std::nullopt) {
  return parse_model(read_json_file(path), path, network);
}

// Extended reals: +-inf become the strings "+inf" / "-inf".
inline Json to_json(double v) {
  if (is_pos_inf(v)) return "+inf";
  if (is_neg_inf(v)) return "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

inline Json to_json(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(to_json(x));
  return out;
}

inline Json to_json(const SolveReport& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["objective"] = to_json(r.objective);
  j["dual_bound"] = to_json(r.dual_bound);
  j["gap"] = to_json(r.gap);
  j["primal_residual"] = to_json(r.primal_residual);
  j["complementarity_residual"] = to_json(r.complementarity_residual);
  j["boundary_suspect"] = r.boundary_suspect;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json to_json(const ClearingResult& r) {
  Json j;
  j["payments"] = to_json(r.payments);
  j["society_equity"] = to_json(r.society_equity);
  Json d = Json::array();
  for (bool b : r.defaulted) d.push_back(b);
  j["defaulted"] = d;
  j["method"] = to_string(r.method);
  j["iterations"] = r.iterations;
  return j;
}

}  // namespace sysrisk

#endif  // SYSRISK_IO_HPP_
