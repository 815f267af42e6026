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

#include <cmath>
#include <limits>
#include <random>

#include "corridor/milp.h"
#include "doctest.h"

namespace corridor::milp {
namespace {

MilpProblem textbook(bool x_binary) {
  // max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6.
  MilpProblem p;
  const int x = x_binary ? p.add_binary("x", 3.0) : p.add_continuous("x", 0.0, 100.0, 3.0);
  const int y = p.add_continuous("y", 0.0, 100.0, 2.0);
  p.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::kLessEqual, 4.0);
  p.add_constraint({{x, 1.0}, {y, 3.0}}, Relation::kLessEqual, 6.0);
  return p;
}

// Random mixed problem; x = 0 satisfies every <= row, so most instances are
// feasible, while the occasional >= or = row exercises infeasibility.
MilpProblem random_problem(std::mt19937_64& rng, int binaries, int rows) {
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_real_distribution<double> rhs(0.0, 12.0);
  std::uniform_int_distribution<int> kind(0, 9);
  MilpProblem p;
  p.sense = kind(rng) < 7 ? Sense::kMaximize : Sense::kMinimize;
  const int continuous = 3;
  for (int j = 0; j < continuous; ++j) p.add_continuous("c" + std::to_string(j), 0.0, 5.0, coef(rng));
  for (int j = 0; j < binaries; ++j) p.add_binary("b" + std::to_string(j), coef(rng));
  for (int r = 0; r < rows; ++r) {
    Terms terms;
    for (int j = 0; j < p.num_variables(); ++j) {
      if (kind(rng) < 5) terms.push_back({j, coef(rng)});
    }
    if (terms.empty()) terms.push_back({0, 1.0});
    const int k = kind(rng);
    const Relation rel = k < 8 ? Relation::kLessEqual : (k == 8 ? Relation::kGreaterEqual : Relation::kEqual);
    p.add_constraint(terms, rel, rel == Relation::kLessEqual ? rhs(rng) : rhs(rng) * 0.2);
  }
  return p;
}

TEST_CASE("box-bounded LP") {
  MilpProblem p;
  p.add_continuous("x", 0.0, 1.0, 1.0);
  const MilpSolution s = solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.values[0] == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(1.0));
}

TEST_CASE("single binding constraint") {
  MilpProblem p;
  const int x = p.add_continuous("x", 0.0, 10.0, 1.0);
  const int y = p.add_continuous("y", 0.0, 10.0, 1.0);
  p.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::kLessEqual, 1.0);
  CHECK(solve_lp(p).objective == doctest::Approx(1.0));
}

TEST_CASE("textbook LP optimum at (4, 0)") {
  const MilpSolution s = solve_lp(textbook(false));
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(12.0));
  CHECK(s.values[0] == doctest::Approx(4.0));
  CHECK(s.values[1] == doctest::Approx(0.0));
}

TEST_CASE("LP objective respects a hand dual bound") {
  // y = (3, 0) is dual feasible for the textbook LP: 3*4 + 0*6 = 12 bounds it.
  const MilpSolution s = solve_lp(textbook(false));
  CHECK(s.objective <= 12.0 + 1e-9);
}

TEST_CASE("binary textbook variant matches the oracle") {
  const MilpProblem p = textbook(true);
  const MilpSolution a = solve_milp(p);
  const MilpSolution b = enumerate_oracle(p);
  REQUIRE(a.optimal());
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
  // x = 1 leaves y <= 5/3, so 3 + 10/3.
  CHECK(a.objective == doctest::Approx(3.0 + 10.0 / 3.0));
}

TEST_CASE("binaries fixed by bounds reduce to the LP") {
  MilpProblem p = textbook(true);
  p.variables[0].lower = 1.0;
  p.variables[0].upper = 1.0;
  CHECK(solve_milp(p).objective == doctest::Approx(solve_lp(p).objective));
}

TEST_CASE("oracle without binaries equals the LP and takes the best branch with one") {
  const MilpProblem lp = textbook(false);
  CHECK(enumerate_oracle(lp).objective == doctest::Approx(solve_lp(lp).objective));
  MilpProblem p;
  const int b = p.add_binary("b", 0.0);
  const int x = p.add_continuous("x", 0.0, 10.0, 1.0);
  p.add_constraint({{x, 1.0}, {b, -3.0}}, Relation::kLessEqual, 2.0);
  CHECK(enumerate_oracle(p).objective == doctest::Approx(5.0));
}

TEST_CASE("infeasible status and infinite bounds") {
  MilpProblem inf;
  const int x = inf.add_continuous("x", 0.0, 1.0, 1.0);
  inf.add_constraint({{x, 1.0}}, Relation::kGreaterEqual, 2.0);
  CHECK(solve_lp(inf).status == SolveStatus::kInfeasible);
  CHECK(solve_milp(inf).status == SolveStatus::kInfeasible);

  // Continuous variables need finite bounds, so no valid problem is unbounded.
  MilpProblem unb;
  unb.add_continuous("y", 0.0, std::numeric_limits<double>::infinity(), 1.0);
  CHECK_THROWS_AS(unb.check(), std::invalid_argument);
}

TEST_CASE("oracle refuses more than 16 binaries") {
  MilpProblem p;
  for (int j = 0; j < 17; ++j) p.add_binary("b" + std::to_string(j), 1.0);
  CHECK_THROWS(enumerate_oracle(p));
}

TEST_CASE("malformed problems are rejected") {
  MilpProblem p;
  p.add_continuous("x", 1.0, 0.0, 1.0);
  CHECK_THROWS_AS(p.check(), std::invalid_argument);
}

TEST_CASE("branch and bound equals enumeration on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nb(0, 12);
  std::uniform_int_distribution<int> nr(1, 30);
  int optimal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const MilpProblem p = random_problem(rng, nb(rng), nr(rng));
    const MilpSolution a = solve_milp(p);
    const MilpSolution b = enumerate_oracle(p);
    INFO("trial " << trial);
    REQUIRE(a.status == b.status);
    if (!a.optimal()) continue;
    ++optimal;
    CHECK(std::abs(a.objective - b.objective) <= 1e-6);
    CHECK(max_violation(p, a.values) <= 1e-7);
    for (int j = 0; j < p.num_variables(); ++j) {
      if (p.variables[j].is_binary) CHECK((a.values[j] == 0.0 || a.values[j] == 1.0));
    }
  }
  CHECK(optimal >= 50);
}

TEST_CASE("solves are bit-for-bit deterministic") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const MilpProblem p = random_problem(rng, 8, 12);
    const MilpSolution a = solve_milp(p);
    const MilpSolution b = solve_milp(p);
    CHECK(a.status == b.status);
    CHECK(a.values == b.values);
    CHECK(a.stats.nodes == b.stats.nodes);
  }
}

TEST_CASE("lexicographic tie-break keeps the primary optimum") {
  // max x + y with x + y <= 1; prefer larger x among the optima.
  MilpProblem p;
  const int x = p.add_continuous("x", 0.0, 1.0, 1.0);
  const int y = p.add_continuous("y", 0.0, 1.0, 1.0);
  p.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::kLessEqual, 1.0);
  const MilpSolution s = solve_milp_lexicographic(p, {{1.0, 0.0}});
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(s.values[x] == doctest::Approx(1.0));
}

TEST_CASE("LP text dump names every variable") {
  const std::string text = to_lp_text(textbook(true));
  CHECK(text.find('x') != std::string::npos);
  CHECK(text.find('y') != std::string::npos);
}

}  // namespace
}  // namespace corridor::milp
