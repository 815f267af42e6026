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

// A small dense solver for linear programs with binary variables.
//
// LPs are solved with a two-phase bounded-variable primal simplex using
// Bland's rule for both the entering and the leaving variable, so the method
// terminates on degenerate problems. Binaries are handled by depth-first
// branch and bound: the lowest-index fractional binary is branched on and the
// 0-branch is explored first. Every reported optimum is re-solved with the
// binaries fixed and checked against the original constraints.

#ifndef CORRIDOR_MILP_H_
#define CORRIDOR_MILP_H_

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace corridor::milp {

enum class Relation { kLessEqual, kGreaterEqual, kEqual };
enum class Sense { kMaximize, kMinimize };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  bool is_binary = false;
};

struct Constraint {
  std::vector<double> coefficients;  // one per variable
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

using Terms = std::vector<std::pair<int, double>>;

struct MilpProblem {
  std::vector<Variable> variables;
  Sense sense = Sense::kMaximize;
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  double big_m = 1e4;

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_binaries() const;

  // Builders. Coefficient vectors of existing constraints are widened when
  // variables are added after them.
  int add_continuous(std::string name, double lower, double upper, double cost = 0.0);
  int add_binary(std::string name, double cost = 0.0);
  void add_constraint(const Terms& terms, Relation relation, double rhs, std::string name = {});

  // Throws std::invalid_argument describing the first structural problem.
  void check() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded };

struct SolverStats {
  std::int64_t nodes = 0;
  std::int64_t pivots = 0;
};

struct MilpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> values;
  SolverStats stats;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct MilpOptions {
  std::int64_t node_limit = 1'000'000;
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  double gap = 1e-6;
};

// Raised for numerical breakdown and exhausted node budgets.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string status_name(SolveStatus status);

// Solves the continuous relaxation (binaries relaxed to [0, 1]).
MilpSolution solve_lp(const MilpProblem& problem, const MilpOptions& options = {});

// Globally optimal within options.gap. At most 64 binaries.
MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

// Tries every binary assignment with solve_lp. At most 16 binaries.
MilpSolution enumerate_oracle(const MilpProblem& problem, const MilpOptions& options = {});

// Optimizes the problem objective, then each further objective in turn while
// holding the previous optima (within a relative tolerance of 1e-9). The
// returned objective value is that of the problem's own objective.
MilpSolution solve_milp_lexicographic(const MilpProblem& problem,
                                      const std::vector<std::vector<double>>& tie_breaks,
                                      const MilpOptions& options = {});

// Largest violation of any constraint, variable bound or binary integrality.
double max_violation(const MilpProblem& problem, const std::vector<double>& values);

// LP-format style text dump for cross-checking with external solvers.
std::string to_lp_text(const MilpProblem& problem);

}  // namespace corridor::milp

#endif  // CORRIDOR_MILP_H_
