// Copyright 2026 The Corridor Signal Authors
//
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

#include "corridor/milp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace corridor::milp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kRatioTieTol = 1e-12;
constexpr std::int64_t kMaxPivots = 200000;

struct LpOutcome {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> values;  // structural variables, original coordinates
  std::int64_t pivots = 0;
};

// Dense tableau for
//   minimize c'y  s.t.  A'y (+/- slack) (+ artificial) = b',  0 <= y <= U
// where y = x - lower. Rows are sign-normalized so that b' >= 0; a row whose
// slack enters with coefficient +1 starts with the slack basic, every other
// row gets an artificial.
class BoundedSimplex {
 public:
  BoundedSimplex(const MilpProblem& problem, const std::vector<double>& lower,
                 const std::vector<double>& upper)
      : problem_(problem), lower_(lower) {
    n_ = problem.num_variables();
    m_ = static_cast<int>(problem.constraints.size());
    build(upper);
  }

  LpOutcome run(double feasibility_tol) {
    LpOutcome out;
    if (bounds_infeasible_) return out;

    // Phase I: minimize the sum of artificials.
    if (first_artificial_ < num_cols_) {
      std::vector<double> cost(num_cols_, 0.0);
      for (int j = first_artificial_; j < num_cols_; ++j) cost[j] = 1.0;
      compute_reduced_costs(cost);
      if (iterate() == SolveStatus::kUnbounded) {
        throw SolverError("phase I reported unbounded; numerical breakdown");
      }
      double infeasibility = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (basis_[r] >= first_artificial_) infeasibility += value_[r];
      }
      if (infeasibility > feasibility_tol) {
        out.pivots = pivots_;
        out.status = SolveStatus::kInfeasible;
        return out;
      }
      drive_out_artificials();
    }

    // Phase II.
    std::vector<double> cost(num_cols_, 0.0);
    const double sign = problem_.sense == Sense::kMaximize ? -1.0 : 1.0;
    for (int j = 0; j < n_; ++j) cost[j] = sign * problem_.objective[j];
    compute_reduced_costs(cost);
    const SolveStatus status = iterate();
    out.pivots = pivots_;
    if (status == SolveStatus::kUnbounded) {
      out.status = SolveStatus::kUnbounded;
      return out;
    }
    refine_basic_values();
    out.values.resize(n_);
    for (int j = 0; j < n_; ++j) out.values[j] = lower_[j] + column_value(j);
    out.status = SolveStatus::kOptimal;
    return out;
  }

 private:
  double& at(int r, int c) { return tableau_[static_cast<std::size_t>(r) * num_cols_ + c]; }

  void build(const std::vector<double>& upper) {
    for (int j = 0; j < n_; ++j) {
      const double span = upper[j] - lower_[j];
      if (span < -1e-12) bounds_infeasible_ = true;
    }
    // Column layout: structurals, slacks, artificials.
    std::vector<int> slack_col(m_, -1);
    int cols = n_;
    for (int r = 0; r < m_; ++r) {
      if (problem_.constraints[r].relation != Relation::kEqual) slack_col[r] = cols++;
    }
    std::vector<double> rhs(m_);
    std::vector<double> row_sign(m_, 1.0);
    std::vector<bool> needs_artificial(m_, true);
    for (int r = 0; r < m_; ++r) {
      const Constraint& c = problem_.constraints[r];
      double b = c.rhs;
      for (int j = 0; j < n_; ++j) b -= c.coefficients[j] * lower_[j];
      if (b < 0.0) row_sign[r] = -1.0;
      rhs[r] = row_sign[r] * b;
      if (slack_col[r] >= 0) {
        const double slack_coef = (c.relation == Relation::kLessEqual ? 1.0 : -1.0) * row_sign[r];
        needs_artificial[r] = slack_coef < 0.0;
      }
    }
    first_artificial_ = cols;
    std::vector<int> art_col(m_, -1);
    for (int r = 0; r < m_; ++r) {
      if (needs_artificial[r]) art_col[r] = cols++;
    }
    num_cols_ = cols;

    upper_.assign(num_cols_, kInf);
    for (int j = 0; j < n_; ++j) upper_[j] = std::max(0.0, upper[j] - lower_[j]);
    at_upper_.assign(num_cols_, false);
    row_of_.assign(num_cols_, -1);
    tableau_.assign(static_cast<std::size_t>(m_) * num_cols_, 0.0);
    original_ = tableau_;
    basis_.assign(m_, -1);
    value_.assign(m_, 0.0);
    rhs_ = rhs;

    for (int r = 0; r < m_; ++r) {
      const Constraint& c = problem_.constraints[r];
      for (int j = 0; j < n_; ++j) at(r, j) = row_sign[r] * c.coefficients[j];
      if (slack_col[r] >= 0) {
        at(r, slack_col[r]) = (c.relation == Relation::kLessEqual ? 1.0 : -1.0) * row_sign[r];
      }
      if (art_col[r] >= 0) {
        at(r, art_col[r]) = 1.0;
        basis_[r] = art_col[r];
      } else {
        basis_[r] = slack_col[r];
      }
      row_of_[basis_[r]] = r;
      value_[r] = rhs[r];
    }
    original_ = tableau_;
  }

  double column_value(int j) const {
    if (row_of_[j] >= 0) return value_[row_of_[j]];
    return at_upper_[j] ? upper_[j] : 0.0;
  }

  void compute_reduced_costs(const std::vector<double>& cost) {
    cost_ = cost;
    reduced_ = cost;
    for (int r = 0; r < m_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &tableau_[static_cast<std::size_t>(r) * num_cols_];
      for (int j = 0; j < num_cols_; ++j) reduced_[j] -= cb * row[j];
    }
  }

  bool may_enter(int j) const {
    if (row_of_[j] >= 0) return false;
    if (frozen_artificials_ && j >= first_artificial_) return false;
    if (upper_[j] <= 0.0) return false;
    return true;
  }

  SolveStatus iterate() {
    while (true) {
      if (pivots_ > kMaxPivots) throw SolverError("simplex pivot limit exceeded");
      // Bland: first improving column.
      int enter = -1;
      for (int j = 0; j < num_cols_; ++j) {
        if (!may_enter(j)) continue;
        if ((!at_upper_[j] && reduced_[j] < -kCostTol) || (at_upper_[j] && reduced_[j] > kCostTol)) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return SolveStatus::kOptimal;
      const double dir = at_upper_[enter] ? -1.0 : 1.0;

      double best = upper_[enter];
      int leave_row = -1;
      int leave_index = enter;
      bool leave_at_upper = false;
      for (int r = 0; r < m_; ++r) {
        const double alpha = dir * at(r, enter);
        double limit;
        bool hits_upper;
        if (alpha > kPivotTol) {
          limit = std::max(0.0, value_[r]) / alpha;
          hits_upper = false;
        } else if (alpha < -kPivotTol && std::isfinite(upper_[basis_[r]])) {
          limit = std::max(0.0, upper_[basis_[r]] - value_[r]) / -alpha;
          hits_upper = true;
        } else {
          continue;
        }
        const double tie = kRatioTieTol * std::max(1.0, limit);
        const bool better = !std::isfinite(best) || limit < best - tie;
        if (better || (limit <= best + tie && basis_[r] < leave_index)) {
          best = limit;
          leave_row = r;
          leave_index = basis_[r];
          leave_at_upper = hits_upper;
        }
      }
      if (!std::isfinite(best)) return SolveStatus::kUnbounded;

      for (int r = 0; r < m_; ++r) value_[r] -= dir * best * at(r, enter);
      ++pivots_;
      if (leave_row < 0) {
        at_upper_[enter] = !at_upper_[enter];
        continue;
      }
      const double entering_value = (at_upper_[enter] ? upper_[enter] : 0.0) + dir * best;
      const int leaving = basis_[leave_row];
      at_upper_[leaving] = leave_at_upper;
      row_of_[leaving] = -1;
      pivot(leave_row, enter);
      value_[leave_row] = entering_value;
    }
  }

  void pivot(int r, int j) {
    double* prow = &tableau_[static_cast<std::size_t>(r) * num_cols_];
    const double piv = prow[j];
    for (int c = 0; c < num_cols_; ++c) prow[c] /= piv;
    prow[j] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tableau_[static_cast<std::size_t>(i) * num_cols_];
      const double f = row[j];
      if (f == 0.0) continue;
      for (int c = 0; c < num_cols_; ++c) row[c] -= f * prow[c];
      row[j] = 0.0;
    }
    const double f = reduced_[j];
    if (f != 0.0) {
      for (int c = 0; c < num_cols_; ++c) reduced_[c] -= f * prow[c];
      reduced_[j] = 0.0;
    }
    basis_[r] = j;
    row_of_[j] = r;
    at_upper_[j] = false;
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < first_artificial_) continue;
      int best = -1;
      double best_mag = 1e-7;
      for (int j = 0; j < first_artificial_; ++j) {
        if (row_of_[j] >= 0) continue;
        const double mag = std::abs(at(r, j));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best < 0) {
        value_[r] = 0.0;  // redundant row
        continue;
      }
      const double entering_value = at_upper_[best] ? upper_[best] : 0.0;
      const int leaving = basis_[r];
      row_of_[leaving] = -1;
      at_upper_[leaving] = false;
      pivot(r, best);
      value_[r] = entering_value;
      ++pivots_;
    }
    for (int j = first_artificial_; j < num_cols_; ++j) {
      upper_[j] = 0.0;
      if (row_of_[j] >= 0) value_[row_of_[j]] = 0.0;
    }
    frozen_artificials_ = true;
  }

  // Recomputes basic values from the original columns to shed drift from the
  // tableau updates. Leaves the tableau values in place if the basis matrix
  // is numerically singular.
  void refine_basic_values() {
    if (m_ == 0) return;
    std::vector<double> mat(static_cast<std::size_t>(m_) * m_);
    std::vector<double> rhs = rhs_;
    for (int r = 0; r < m_; ++r) {
      for (int k = 0; k < m_; ++k) {
        mat[static_cast<std::size_t>(r) * m_ + k] = original_[static_cast<std::size_t>(r) * num_cols_ + basis_[k]];
      }
      for (int j = 0; j < num_cols_; ++j) {
        if (row_of_[j] >= 0) continue;
        const double v = at_upper_[j] ? upper_[j] : 0.0;
        if (v != 0.0) rhs[r] -= original_[static_cast<std::size_t>(r) * num_cols_ + j] * v;
      }
    }
    std::vector<int> perm(m_);
    for (int i = 0; i < m_; ++i) perm[i] = i;
    for (int col = 0; col < m_; ++col) {
      int p = col;
      double mag = 0.0;
      for (int r = col; r < m_; ++r) {
        const double v = std::abs(mat[static_cast<std::size_t>(r) * m_ + col]);
        if (v > mag) {
          mag = v;
          p = r;
        }
      }
      if (mag < 1e-12) return;
      if (p != col) {
        for (int k = 0; k < m_; ++k) std::swap(mat[static_cast<std::size_t>(p) * m_ + k], mat[static_cast<std::size_t>(col) * m_ + k]);
        std::swap(rhs[p], rhs[col]);
      }
      for (int r = col + 1; r < m_; ++r) {
        const double f = mat[static_cast<std::size_t>(r) * m_ + col] / mat[static_cast<std::size_t>(col) * m_ + col];
        if (f == 0.0) continue;
        for (int k = col; k < m_; ++k) mat[static_cast<std::size_t>(r) * m_ + k] -= f * mat[static_cast<std::size_t>(col) * m_ + k];
        rhs[r] -= f * rhs[col];
      }
    }
    std::vector<double> sol(m_);
    for (int r = m_ - 1; r >= 0; --r) {
      double s = rhs[r];
      for (int k = r + 1; k < m_; ++k) s -= mat[static_cast<std::size_t>(r) * m_ + k] * sol[k];
      sol[r] = s / mat[static_cast<std::size_t>(r) * m_ + r];
    }
    for (int k = 0; k < m_; ++k) {
      double v = sol[k];
      const int j = basis_[k];
      // Snap round-off just outside a bound back onto it.
      if (v < 0.0 && v > -1e-9) v = 0.0;
      if (std::isfinite(upper_[j]) && v > upper_[j] && v < upper_[j] + 1e-9) v = upper_[j];
      value_[k] = v;
    }
  }

  const MilpProblem& problem_;
  const std::vector<double>& lower_;
  int n_ = 0;
  int m_ = 0;
  int num_cols_ = 0;
  int first_artificial_ = 0;
  bool bounds_infeasible_ = false;
  bool frozen_artificials_ = false;
  std::vector<double> tableau_;
  std::vector<double> original_;
  std::vector<double> rhs_;
  std::vector<double> upper_;
  std::vector<bool> at_upper_;
  std::vector<int> basis_;
  std::vector<int> row_of_;
  std::vector<double> value_;
  std::vector<double> cost_;
  std::vector<double> reduced_;
  std::int64_t pivots_ = 0;
};

double objective_value(const MilpProblem& problem, const std::vector<double>& values) {
  double obj = 0.0;
  for (int j = 0; j < problem.num_variables(); ++j) obj += problem.objective[j] * values[j];
  return obj;
}

// Objective oriented so that larger is better.
double oriented(const MilpProblem& problem, double objective) {
  return problem.sense == Sense::kMaximize ? objective : -objective;
}

LpOutcome solve_with_bounds(const MilpProblem& problem, const std::vector<double>& lower,
                            const std::vector<double>& upper, const MilpOptions& options) {
  BoundedSimplex simplex(problem, lower, upper);
  LpOutcome out = simplex.run(options.feasibility_tol);
  if (out.status == SolveStatus::kOptimal) {
    for (int j = 0; j < problem.num_variables(); ++j) {
      out.values[j] = std::clamp(out.values[j], lower[j], upper[j]);
    }
    const double violation = max_violation(problem, out.values);
    // Binaries may sit fractionally inside [0, 1] in a relaxation; only the
    // linear rows and bounds are checked here.
    double row_violation = 0.0;
    for (const Constraint& c : problem.constraints) {
      double lhs = 0.0;
      for (int j = 0; j < problem.num_variables(); ++j) lhs += c.coefficients[j] * out.values[j];
      const double scale = 1.0 + std::abs(c.rhs);
      double v = 0.0;
      if (c.relation == Relation::kLessEqual) v = lhs - c.rhs;
      if (c.relation == Relation::kGreaterEqual) v = c.rhs - lhs;
      if (c.relation == Relation::kEqual) v = std::abs(lhs - c.rhs);
      row_violation = std::max(row_violation, v / scale);
    }
    (void)violation;
    if (row_violation > options.feasibility_tol) {
      std::ostringstream msg;
      msg << "LP solution violates constraints by " << row_violation << " after refinement";
      throw SolverError(msg.str());
    }
  }
  return out;
}

std::vector<int> binary_indices(const MilpProblem& problem) {
  std::vector<int> idx;
  for (int j = 0; j < problem.num_variables(); ++j) {
    if (problem.variables[j].is_binary) idx.push_back(j);
  }
  return idx;
}

void base_bounds(const MilpProblem& problem, std::vector<double>& lower, std::vector<double>& upper) {
  const int n = problem.num_variables();
  lower.resize(n);
  upper.resize(n);
  for (int j = 0; j < n; ++j) {
    lower[j] = problem.variables[j].lower;
    upper[j] = problem.variables[j].upper;
  }
}

MilpSolution to_solution(const MilpProblem& problem, LpOutcome&& lp) {
  MilpSolution s;
  s.status = lp.status;
  s.stats.pivots = lp.pivots;
  if (lp.status == SolveStatus::kOptimal) {
    s.values = std::move(lp.values);
    s.objective = objective_value(problem, s.values);
  }
  return s;
}

}  // namespace

int MilpProblem::num_binaries() const {
  int count = 0;
  for (const Variable& v : variables) count += v.is_binary ? 1 : 0;
  return count;
}

int MilpProblem::add_continuous(std::string name, double lower, double upper, double cost) {
  variables.push_back({std::move(name), lower, upper, false});
  objective.push_back(cost);
  for (Constraint& c : constraints) c.coefficients.push_back(0.0);
  return num_variables() - 1;
}

int MilpProblem::add_binary(std::string name, double cost) {
  variables.push_back({std::move(name), 0.0, 1.0, true});
  objective.push_back(cost);
  for (Constraint& c : constraints) c.coefficients.push_back(0.0);
  return num_variables() - 1;
}

void MilpProblem::add_constraint(const Terms& terms, Relation relation, double rhs, std::string name) {
  Constraint c;
  c.coefficients.assign(variables.size(), 0.0);
  for (const auto& [index, coef] : terms) c.coefficients.at(index) += coef;
  c.relation = relation;
  c.rhs = rhs;
  c.name = std::move(name);
  constraints.push_back(std::move(c));
}

void MilpProblem::check() const {
  const std::size_t n = variables.size();
  if (objective.size() != n) throw std::invalid_argument("objective length does not match variable count");
  for (const Variable& v : variables) {
    if (v.is_binary) {
      if (v.lower < 0.0 || v.upper > 1.0 || v.lower > v.upper) {
        throw std::invalid_argument("binary variable " + v.name + " must have bounds within {0,1}");
      }
    } else if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      throw std::invalid_argument("continuous variable " + v.name + " needs finite bounds");
    } else if (v.lower > v.upper) {
      throw std::invalid_argument("continuous variable " + v.name + " has crossed bounds");
    }
  }
  for (const Constraint& c : constraints) {
    if (c.coefficients.size() != n) throw std::invalid_argument("constraint " + c.name + " has wrong width");
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("constraint " + c.name + " has non-finite rhs");
    for (double a : c.coefficients) {
      if (!std::isfinite(a)) throw std::invalid_argument("constraint " + c.name + " has non-finite coefficient");
    }
  }
  if (!(big_m > 0.0)) throw std::invalid_argument("big_m must be positive");
}

std::string status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

MilpSolution solve_lp(const MilpProblem& problem, const MilpOptions& options) {
  problem.check();
  std::vector<double> lower, upper;
  base_bounds(problem, lower, upper);
  return to_solution(problem, solve_with_bounds(problem, lower, upper, options));
}

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options) {
  problem.check();
  const std::vector<int> binaries = binary_indices(problem);
  if (binaries.size() > 64) throw std::invalid_argument("solve_milp supports at most 64 binaries");

  std::vector<double> root_lower, root_upper;
  base_bounds(problem, root_lower, root_upper);

  struct Node {
    std::vector<double> lower;
    std::vector<double> upper;
  };
  std::vector<Node> stack;
  stack.push_back({root_lower, root_upper});

  MilpSolution best;
  best.status = SolveStatus::kInfeasible;
  double best_value = -std::numeric_limits<double>::infinity();
  SolverStats stats;

  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (++stats.nodes > options.node_limit) {
      throw SolverError("branch and bound node limit exceeded");
    }
    LpOutcome lp = solve_with_bounds(problem, node.lower, node.upper, options);
    stats.pivots += lp.pivots;
    if (lp.status == SolveStatus::kInfeasible) continue;
    if (lp.status == SolveStatus::kUnbounded) {
      MilpSolution out;
      out.status = SolveStatus::kUnbounded;
      out.stats = stats;
      return out;
    }
    const double value = oriented(problem, objective_value(problem, lp.values));
    if (best.optimal() && value <= best_value + options.gap) continue;

    int branch = -1;
    for (int j : binaries) {
      const double frac = std::abs(lp.values[j] - std::round(lp.values[j]));
      if (frac > options.integrality_tol) {
        branch = j;
        break;
      }
    }
    if (branch < 0) {
      // Integral: fix binaries exactly and re-solve.
      std::vector<double> lo = node.lower, hi = node.upper;
      for (int j : binaries) lo[j] = hi[j] = std::round(lp.values[j]);
      LpOutcome fixed = solve_with_bounds(problem, lo, hi, options);
      stats.pivots += fixed.pivots;
      if (fixed.status != SolveStatus::kOptimal) continue;
      const double fixed_value = oriented(problem, objective_value(problem, fixed.values));
      if (!best.optimal() || fixed_value > best_value) {
        best_value = fixed_value;
        best.status = SolveStatus::kOptimal;
        best.values = std::move(fixed.values);
        best.objective = objective_value(problem, best.values);
      }
      continue;
    }
    Node one{node.lower, node.upper};
    one.lower[branch] = 1.0;
    Node zero{std::move(node.lower), std::move(node.upper)};
    zero.upper[branch] = 0.0;
    stack.push_back(std::move(one));
    stack.push_back(std::move(zero));
  }
  best.stats = stats;
  return best;
}

MilpSolution enumerate_oracle(const MilpProblem& problem, const MilpOptions& options) {
  problem.check();
  const std::vector<int> binaries = binary_indices(problem);
  if (binaries.size() > 16) throw std::invalid_argument("enumerate_oracle refuses more than 16 binaries");
  std::vector<double> lower, upper;
  base_bounds(problem, lower, upper);

  MilpSolution best;
  best.status = SolveStatus::kInfeasible;
  double best_value = -std::numeric_limits<double>::infinity();
  SolverStats stats;
  const std::uint32_t combos = 1u << binaries.size();
  for (std::uint32_t mask = 0; mask < combos; ++mask) {
    std::vector<double> lo = lower, hi = upper;
    bool possible = true;
    for (std::size_t k = 0; k < binaries.size(); ++k) {
      const double v = (mask >> k) & 1u ? 1.0 : 0.0;
      const int j = binaries[k];
      if (v < lower[j] || v > upper[j]) possible = false;
      lo[j] = hi[j] = v;
    }
    if (!possible) continue;
    ++stats.nodes;
    LpOutcome lp = solve_with_bounds(problem, lo, hi, options);
    stats.pivots += lp.pivots;
    if (lp.status == SolveStatus::kUnbounded) {
      MilpSolution out;
      out.status = SolveStatus::kUnbounded;
      out.stats = stats;
      return out;
    }
    if (lp.status != SolveStatus::kOptimal) continue;
    const double value = oriented(problem, objective_value(problem, lp.values));
    if (!best.optimal() || value > best_value) {
      best_value = value;
      best.status = SolveStatus::kOptimal;
      best.values = std::move(lp.values);
      best.objective = objective_value(problem, best.values);
    }
  }
  best.stats = stats;
  return best;
}

MilpSolution solve_milp_lexicographic(const MilpProblem& problem,
                                      const std::vector<std::vector<double>>& tie_breaks,
                                      const MilpOptions& options) {
  MilpSolution solution = solve_milp(problem, options);
  if (!solution.optimal() || tie_breaks.empty()) return solution;
  MilpProblem staged = problem;
  SolverStats stats = solution.stats;
  for (const std::vector<double>& next : tie_breaks) {
    const double opt = objective_value(staged, solution.values);
    const double slack = 1e-9 * std::max(1.0, std::abs(opt));
    Constraint hold;
    hold.coefficients = staged.objective;
    hold.name = "lexicographic_hold";
    if (staged.sense == Sense::kMaximize) {
      hold.relation = Relation::kGreaterEqual;
      hold.rhs = opt - slack;
    } else {
      hold.relation = Relation::kLessEqual;
      hold.rhs = opt + slack;
    }
    staged.constraints.push_back(std::move(hold));
    staged.objective = next;
    MilpSolution refined = solve_milp(staged, options);
    stats.nodes += refined.stats.nodes;
    stats.pivots += refined.stats.pivots;
    if (!refined.optimal()) break;  // keep the previous stage
    solution = std::move(refined);
  }
  solution.objective = objective_value(problem, solution.values);
  solution.stats = stats;
  return solution;
}

double max_violation(const MilpProblem& problem, const std::vector<double>& values) {
  double worst = 0.0;
  const int n = problem.num_variables();
  for (int j = 0; j < n; ++j) {
    const Variable& v = problem.variables[j];
    worst = std::max(worst, v.lower - values[j]);
    worst = std::max(worst, values[j] - v.upper);
    if (v.is_binary) worst = std::max(worst, std::abs(values[j] - std::round(values[j])));
  }
  for (const Constraint& c : problem.constraints) {
    double lhs = 0.0;
    for (int j = 0; j < n; ++j) lhs += c.coefficients[j] * values[j];
    switch (c.relation) {
      case Relation::kLessEqual:
        worst = std::max(worst, lhs - c.rhs);
        break;
      case Relation::kGreaterEqual:
        worst = std::max(worst, c.rhs - lhs);
        break;
      case Relation::kEqual:
        worst = std::max(worst, std::abs(lhs - c.rhs));
        break;
    }
  }
  return worst;
}

std::string to_lp_text(const MilpProblem& problem) {
  std::ostringstream out;
  out.precision(17);
  auto name = [&](int j) {
    std::string s = problem.variables[j].name.empty() ? "x" + std::to_string(j) : problem.variables[j].name;
    for (char& ch : s) {
      if (ch == ' ' || ch == ':' || ch == '+' || ch == '-') ch = '_';
    }
    return s;
  };
  auto expr = [&](const std::vector<double>& coefs) {
    std::ostringstream e;
    e.precision(17);
    bool any = false;
    for (std::size_t j = 0; j < coefs.size(); ++j) {
      if (coefs[j] == 0.0) continue;
      e << (coefs[j] < 0 ? " - " : " + ") << std::abs(coefs[j]) << " " << name(static_cast<int>(j));
      any = true;
    }
    if (!any) e << " 0";
    return e.str();
  };
  out << "\\ corridor milp, big_m = " << problem.big_m << "\n";
  out << (problem.sense == Sense::kMaximize ? "Maximize\n" : "Minimize\n");
  out << " obj:" << expr(problem.objective) << "\n";
  out << "Subject To\n";
  for (std::size_t r = 0; r < problem.constraints.size(); ++r) {
    const Constraint& c = problem.constraints[r];
    const char* rel = c.relation == Relation::kLessEqual ? "<=" : c.relation == Relation::kGreaterEqual ? ">=" : "=";
    out << " " << (c.name.empty() ? "c" + std::to_string(r) : c.name + "_" + std::to_string(r)) << ":"
        << expr(c.coefficients) << " " << rel << " " << c.rhs << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < problem.num_variables(); ++j) {
    if (problem.variables[j].is_binary) continue;
    out << " " << problem.variables[j].lower << " <= " << name(j) << " <= " << problem.variables[j].upper << "\n";
  }
  out << "Binaries\n";
  for (int j = 0; j < problem.num_variables(); ++j) {
    if (problem.variables[j].is_binary) out << " " << name(j) << "\n";
  }
  out << "End\n";
  return out.str();
}

}  // namespace corridor::milp
