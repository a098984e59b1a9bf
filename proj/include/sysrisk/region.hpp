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

// Outer approximation of R^sen by supporting halfspaces w^T z >= rho^sen_w.

#ifndef SYSRISK_REGION_HPP_
#define SYSRISK_REGION_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sysrisk/parallel.hpp"
#include "sysrisk/systemic.hpp"

namespace sysrisk {

struct RegionEntry {
  Halfspace halfspace;
  ScalarizationResult result;  // empty method when the direction failed
};

// One halfspace per direction, in input order. A failing direction becomes
// an "error" entry instead of aborting the sweep.
inline std::vector<RegionEntry> r_sen_outer_approx_detailed(const SystemicModel& m,
                                                            const std::vector<std::vector<double>>& directions,
                                                            const ScalarizationOptions& opt = {},
                                                            std::size_t threads = thread_count()) {
  if (directions.empty()) throw PreconditionError("region: no directions given");
  for (const auto& w : directions) detail::check_weights(w, m.dim());
  m.require_assumption();
  return parallel_map(
      directions.size(),
      [&](std::size_t j) {
        RegionEntry e;
        e.halfspace.normal = directions[j];
        try {
          e.result = rho_sen(m, directions[j], opt);
          if (e.result.unbounded) {
            e.halfspace.status = "unbounded direction";
            e.halfspace.offset = -kInf;
          } else {
            e.halfspace.status = "ok";
            e.halfspace.offset = e.result.value;
            e.halfspace.point = e.result.z;
          }
        } catch (const std::exception& ex) {
          e.halfspace.status = "error";
          e.halfspace.offset = -kInf;
          e.halfspace.message = ex.what();
        }
        return e;
      },
      threads);
}

inline HalfspaceSet r_sen_outer_approx(const SystemicModel& m, const std::vector<std::vector<double>>& directions,
                                       const ScalarizationOptions& opt = {}) {
  HalfspaceSet out;
  for (auto& e : r_sen_outer_approx_detailed(m, directions, opt)) out.halfspaces.push_back(std::move(e.halfspace));
  return out;
}

// Halfspaces in order of increasing direction angle atan2(w2, w1).
inline std::vector<std::size_t> angle_order(const HalfspaceSet& set) {
  std::vector<std::size_t> idx(set.halfspaces.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& na = set.halfspaces[a].normal;
    const auto& nb = set.halfspaces[b].normal;
    return std::atan2(na[1], na[0]) < std::atan2(nb[1], nb[0]);
  });
  return idx;
}

// d = 2 boundary polyline: the minimizers of the finite directions, ordered
// by direction angle.
inline std::vector<std::vector<double>> boundary_polyline(const HalfspaceSet& set) {
  std::vector<std::vector<double>> out;
  for (std::size_t j : angle_order(set)) {
    const Halfspace& h = set.halfspaces[j];
    if (h.normal.size() != 2) throw PreconditionError("region: the polyline needs d = 2");
    if (h.status == "ok" && !h.point.empty()) out.push_back(h.point);
  }
  return out;
}

// z lies in every halfspace of the set (up to `slack`).
inline bool in_outer_approx(const HalfspaceSet& set, std::span<const double> z, double slack = 0.0) {
  for (const Halfspace& h : set.halfspaces) {
    if (h.status != "ok") continue;
    if (dot(h.normal, z) < h.offset - slack) return false;
  }
  return true;
}

}  // namespace sysrisk

#endif  // SYSRISK_REGION_HPP_
