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

// Dense two-phase primal simplex for small linear programs
//
//   maximize c^T x  subject to  a_i^T x (<=|>=|=) b_i,  lo <= x <= hi.
//
// Pivoting uses Dantzig's rule and falls back to Bland's rule after a run of
// degenerate pivots, so the method terminates and is deterministic. Row
// duals are reported as derivatives of the optimal value with respect to b.

#ifndef SYSRISK_LINEAR_PROGRAM_HPP_
#define SYSRISK_LINEAR_PROGRAM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sysrisk/common.hpp"

namespace sysrisk {

enum class RowSense { kLe, kGe, kEq };

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationCap };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationCap: return "iteration-cap";
  }
  return "unknown";
}

// Outcome of any of the numerical kernels. Fields that do not apply to a
// kernel stay at their defaults.
struct SolveReport {
  SolveStatus status = SolveStatus::kOptimal;
  std::vector<double> point;
  double objective = 0.0;
  std::size_t iterations = 0;
  double primal_residual = 0.0;
  double complementarity_residual = 0.0;
  // LP: upper bound on the optimum built from the row multipliers.
  double dual_bound = kInf;
  // Lagrangian scalarization: dual lower bound and gap estimate.
  double gap = 0.0;
  bool boundary_suspect = false;
  std::vector<double> duals;
  std::string note;
};

// Sparse affine expression sum_j coef_j x_j + constant.
struct AffineExpr {
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;

  void add(std::size_t var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
  }
  double eval(const std::vector<double>& x) const {
    double v = constant;
    for (const auto& [j, c] : terms) v += c * x[j];
    return v;
  }
};

class LinearProgram {
 public:
  struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    RowSense sense;
    double rhs;
  };

  std::size_t add_variable(double lo, double hi, double obj = 0.0) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi || lo == kInf || hi == -kInf)
      throw ModelError("linear program: inconsistent variable bounds");
    if (!std::isfinite(obj)) throw ModelError("linear program: objective coefficients must be finite");
    lo_.push_back(lo);
    hi_.push_back(hi);
    obj_.push_back(obj);
    return lo_.size() - 1;
  }

  std::size_t add_row(std::vector<std::pair<std::size_t, double>> terms, RowSense sense, double rhs) {
    if (!std::isfinite(rhs)) throw ModelError("linear program: row right-hand sides must be finite");
    for (const auto& [j, c] : terms) {
      if (j >= lo_.size()) throw ModelError("linear program: row references an unknown variable");
      if (!std::isfinite(c)) throw ModelError("linear program: row coefficients must be finite");
    }
    rows_.push_back(Row{std::move(terms), sense, rhs});
    return rows_.size() - 1;
  }

  // Row expr (sense) rhs where expr may carry a constant.
  std::size_t add_row(const AffineExpr& expr, RowSense sense, double rhs) {
    return add_row(expr.terms, sense, rhs - expr.constant);
  }

  void set_objective(std::size_t j, double c) { obj_[j] = c; }
  void add_objective(std::size_t j, double c) { obj_[j] += c; }
  void add_objective(const AffineExpr& e, double scale = 1.0) {
    for (const auto& [j, c] : e.terms) obj_[j] += scale * c;
    obj_constant_ += scale * e.constant;
  }
  void set_rhs(std::size_t row, double rhs) { rows_[row].rhs = rhs; }

  std::size_t num_vars() const { return lo_.size(); }
  std::size_t num_rows() const { return rows_.size(); }
  const std::vector<double>& lower() const { return lo_; }
  const std::vector<double>& upper() const { return hi_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_constant() const { return obj_constant_; }
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<double> lo_, hi_, obj_;
  double obj_constant_ = 0.0;
  std::vector<Row> rows_;
};

struct LpOptions {
  double feasibility_tol = tol::kLpFeasibility;
  std::size_t max_iterations = 1000000;
  std::size_t degenerate_run_before_bland = 50;
};

namespace detail {

// How an original variable is expressed through nonnegative columns:
// x = offset + sign * y_pos (- y_neg when split).
struct VarMap {
  double offset = 0.0;
  double sign = 1.0;
  std::size_t pos = 0;
  long neg = -1;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double& cost(std::size_t j) { return at(m_, j); }
  double cost(std::size_t j) const { return at(m_, j); }
  double& value() { return at(m_, n_); }

  void pivot(std::size_t r, std::size_t c) {
    const std::size_t w = n_ + 1;
    double* pr = &t_[r * w];
    const double inv = 1.0 / pr[c];
    for (std::size_t j = 0; j < w; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* pi = &t_[i * w];
      const double f = pi[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j)
        if (pr[j] != 0.0) pi[j] -= f * pr[j];
      pi[c] = 0.0;
    }
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

 private:
  std::size_t m_, n_;
  std::vector<double> t_;
};

}  // namespace detail

// Solves the program; status kIterationCap raises NumericError instead of
// being returned.
inline SolveReport solve_lp(const LinearProgram& lp, const LpOptions& opt = {}) {
  using detail::VarMap;
  const std::size_t nv = lp.num_vars();
  const auto& lo = lp.lower();
  const auto& hi = lp.upper();

  // Column layout: transformed structural columns first.
  std::vector<VarMap> vmap(nv);
  std::size_t ny = 0;
  struct BoundRow {
    std::size_t col;
    double cap;
  };
  std::vector<BoundRow> bound_rows;
  for (std::size_t j = 0; j < nv; ++j) {
    VarMap& v = vmap[j];
    if (std::isfinite(lo[j])) {
      v.offset = lo[j];
      v.pos = ny++;
      if (std::isfinite(hi[j])) bound_rows.push_back({v.pos, hi[j] - lo[j]});
    } else if (std::isfinite(hi[j])) {
      v.offset = hi[j];
      v.sign = -1.0;
      v.pos = ny++;
    } else {
      v.pos = ny++;
      v.neg = static_cast<long>(ny++);
    }
  }

  // Normalized rows: dense over structural columns.
  const std::size_t m_orig = lp.num_rows();
  const std::size_t m = m_orig + bound_rows.size();
  std::vector<std::vector<double>> a(m, std::vector<double>(ny, 0.0));
  std::vector<double> b(m, 0.0);
  std::vector<RowSense> sense(m, RowSense::kLe);
  std::vector<double> row_sign(m, 1.0);
  for (std::size_t i = 0; i < m_orig; ++i) {
    const auto& row = lp.rows()[i];
    double rhs = row.rhs;
    for (const auto& [j, c] : row.terms) {
      const VarMap& v = vmap[j];
      rhs -= c * v.offset;
      a[i][v.pos] += c * v.sign;
      if (v.neg >= 0) a[i][static_cast<std::size_t>(v.neg)] -= c;
    }
    b[i] = rhs;
    sense[i] = row.sense;
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    a[m_orig + k][bound_rows[k].col] = 1.0;
    b[m_orig + k] = bound_rows[k].cap;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      b[i] = -b[i];
      for (double& v : a[i]) v = -v;
      row_sign[i] = -1.0;
      if (sense[i] == RowSense::kLe) sense[i] = RowSense::kGe;
      else if (sense[i] == RowSense::kGe) sense[i] = RowSense::kLe;
    }
  }

  // Slack/surplus columns for inequality rows, artificials for >= and =.
  std::size_t ncols = ny;
  std::vector<long> slack_col(m, -1);
  for (std::size_t i = 0; i < m; ++i)
    if (sense[i] != RowSense::kEq) slack_col[i] = static_cast<long>(ncols++);
  const std::size_t first_art = ncols;
  std::vector<std::size_t> unit_col(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (sense[i] == RowSense::kLe) unit_col[i] = static_cast<std::size_t>(slack_col[i]);
    else unit_col[i] = ncols++;
  }

  detail::Tableau tab(m, ncols);
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < ny; ++j) tab.at(i, j) = a[i][j];
    if (slack_col[i] >= 0) tab.at(i, static_cast<std::size_t>(slack_col[i])) = sense[i] == RowSense::kGe ? -1.0 : 1.0;
    tab.at(i, unit_col[i]) = 1.0;
    tab.rhs(i) = b[i];
    basis[i] = unit_col[i];
  }
  a.clear();

  SolveReport rep;
  std::size_t iterations = 0;
  const double piv_eps = 1e-9;
  const double rc_eps = 1e-10;

  auto run = [&](std::size_t allowed_cols) -> SolveStatus {
    std::size_t degenerate_run = 0;
    while (true) {
      if (iterations >= opt.max_iterations) return SolveStatus::kIterationCap;
      const bool bland = degenerate_run >= opt.degenerate_run_before_bland;
      long enter = -1;
      double best = -rc_eps;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        const double r = tab.cost(j);
        if (r < best) {
          enter = static_cast<long>(j);
          if (bland) break;
          best = r;
        }
      }
      if (enter < 0) return SolveStatus::kOptimal;
      const std::size_t c = static_cast<std::size_t>(enter);
      long leave = -1;
      double best_ratio = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        const double t = tab.at(i, c);
        if (t <= piv_eps) continue;
        const double ratio = std::max(tab.rhs(i), 0.0) / t;
        const double slack = 1e-12 * (1.0 + std::abs(best_ratio));
        if (leave < 0 || ratio < best_ratio - slack ||
            (ratio <= best_ratio + slack && basis[i] < basis[static_cast<std::size_t>(leave)])) {
          if (leave < 0 || ratio < best_ratio - slack) best_ratio = ratio;
          leave = static_cast<long>(i);
        }
      }
      if (leave < 0) return SolveStatus::kUnbounded;
      degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;
      tab.pivot(static_cast<std::size_t>(leave), c);
      basis[static_cast<std::size_t>(leave)] = c;
      ++iterations;
    }
  };

  auto cap_error = [&](const char* phase) {
    std::ostringstream os;
    os << phase << ", iterations=" << iterations << ", rows=" << m << ", cols=" << ncols;
    throw NumericError("linear program: iteration cap reached", os.str());
  };

  // Phase 1: maximize -sum(artificials).
  double bscale = 1.0;
  for (double v : b) bscale = std::max(bscale, 1.0 + v);
  if (first_art < ncols) {
    for (std::size_t j = 0; j <= ncols; ++j) tab.cost(j) = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < first_art) continue;
      for (std::size_t j = 0; j <= ncols; ++j) tab.cost(j) -= tab.at(i, j);
    }
    for (std::size_t j = first_art; j < ncols; ++j) tab.cost(j) = 0.0;
    SolveStatus s = run(ncols);
    if (s == SolveStatus::kIterationCap) cap_error("phase 1");
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= first_art) infeas += std::max(tab.rhs(i), 0.0);
    if (infeas > opt.feasibility_tol * bscale) {
      rep.status = SolveStatus::kInfeasible;
      rep.iterations = iterations;
      rep.objective = -kInf;
      rep.primal_residual = infeas;
      return rep;
    }
    // Drive remaining artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < first_art) continue;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (std::abs(tab.at(i, j)) > piv_eps) {
          tab.rhs(i) = 0.0;
          tab.pivot(i, j);
          basis[i] = j;
          break;
        }
      }
    }
  }

  // Phase 2 objective row: r_j = c_B^T T_j - c_j.
  std::vector<double> cy(ncols, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    const VarMap& v = vmap[j];
    const double c = lp.objective()[j];
    cy[v.pos] += c * v.sign;
    if (v.neg >= 0) cy[static_cast<std::size_t>(v.neg)] -= c;
  }
  for (std::size_t j = 0; j <= ncols; ++j) {
    double r = j < ncols ? -cy[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cy[basis[i]];
      if (cb != 0.0) r += cb * tab.at(i, j);
    }
    tab.cost(j) = r;
  }
  SolveStatus s = run(first_art);
  if (s == SolveStatus::kIterationCap) cap_error("phase 2");
  rep.iterations = iterations;
  if (s == SolveStatus::kUnbounded) {
    rep.status = SolveStatus::kUnbounded;
    rep.objective = kInf;
    return rep;
  }

  std::vector<double> y(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i) y[basis[i]] = std::max(tab.rhs(i), 0.0);
  rep.point.assign(nv, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    const VarMap& v = vmap[j];
    double x = v.offset + v.sign * y[v.pos];
    if (v.neg >= 0) x -= y[static_cast<std::size_t>(v.neg)];
    rep.point[j] = x;
  }
  rep.objective = lp.objective_constant();
  for (std::size_t j = 0; j < nv; ++j) rep.objective += lp.objective()[j] * rep.point[j];

  rep.duals.assign(m_orig, 0.0);
  for (std::size_t i = 0; i < m_orig; ++i) rep.duals[i] = row_sign[i] * tab.cost(unit_col[i]);

  // Residuals and the dual bound in the original space.
  double pres = 0.0, cres = 0.0;
  std::vector<double> reduced(lp.objective());
  double bound = lp.objective_constant();
  for (std::size_t i = 0; i < m_orig; ++i) {
    const auto& row = lp.rows()[i];
    double ax = 0.0;
    for (const auto& [j, c] : row.terms) {
      ax += c * rep.point[j];
      reduced[j] -= rep.duals[i] * c;
    }
    const double gap = row.rhs - ax;
    double viol = 0.0;
    if (row.sense == RowSense::kLe) viol = -gap;
    else if (row.sense == RowSense::kGe) viol = gap;
    else viol = std::abs(gap);
    pres = std::max(pres, viol);
    cres = std::max(cres, std::abs(rep.duals[i] * gap));
    bound += rep.duals[i] * row.rhs;
  }
  for (std::size_t j = 0; j < nv; ++j) {
    pres = std::max({pres, lo[j] - rep.point[j], rep.point[j] - hi[j]});
    const double d = reduced[j];
    if (std::abs(d) <= 1e-11) continue;
    const double lim = d > 0.0 ? hi[j] : lo[j];
    if (!std::isfinite(lim)) {
      bound = kInf;
      break;
    }
    bound += d * lim;
    cres = std::max(cres, std::abs(d * (rep.point[j] - lim)));
  }
  rep.primal_residual = pres;
  rep.complementarity_residual = cres;
  rep.dual_bound = bound;
  rep.status = SolveStatus::kOptimal;
  return rep;
}

}  // namespace sysrisk

#endif  // SYSRISK_LINEAR_PROGRAM_HPP_
