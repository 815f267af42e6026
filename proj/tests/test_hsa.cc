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
#include <memory>
#include <random>
#include <stdexcept>

#include "corridor/hsa.h"
#include "doctest.h"

namespace corridor {
namespace {

std::shared_ptr<const SignalPlan> single_plan(Strategy s) {
  auto plan = std::make_shared<SignalPlan>();
  plan->strategy = s;
  plan->cycle_length = 100.0;
  IntersectionTiming t;
  t.green = {0.5};
  t.offset = {0.3};
  t.inbound = {centered_window(0.3, 0.5, 100.0)};  // [5, 55)
  if (s == Strategy::kGwc) t.outbound = {centered_window(0.5, 0.4, 100.0)};  // [30, 70)
  t.scenario = {s == Strategy::kMfc ? "t_c" : ""};
  plan->intersections.push_back(t);
  return plan;
}

TEST_CASE("masked policy zeroes masked actions and renormalizes") {
  const std::vector<double> z{1.0, 2.0, 3.0, 0.5};
  const ActionMask m{1, 0, 1, 0};
  const std::vector<double> p = masked_policy(z, m);
  CHECK(p[1] == 0.0);
  CHECK(p[3] == 0.0);
  const double denom = std::exp(1.0) + std::exp(3.0);
  CHECK(p[0] == doctest::Approx(std::exp(1.0) / denom).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(std::exp(3.0) / denom).epsilon(1e-14));
  CHECK_THROWS_AS(masked_policy(z, ActionMask{0, 0, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(masked_policy(z, ActionMask{1, 1}), std::invalid_argument);
}

TEST_CASE("masked policy is exact on random inputs") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> z(kNumPhases);
    ActionMask m(kNumPhases);
    for (int k = 0; k < kNumPhases; ++k) {
      z[k] = normal(rng);
      m[k] = bit(rng);
    }
    m[trial % kNumPhases] = 1;
    const std::vector<double> p = masked_policy(z, m);
    double denom = 0.0;
    for (int k = 0; k < kNumPhases; ++k) {
      if (m[k]) denom += std::exp(z[k]);
    }
    for (int k = 0; k < kNumPhases; ++k) {
      if (!m[k]) {
        REQUIRE(p[k] == 0.0);
      } else {
        REQUIRE(std::abs(p[k] - std::exp(z[k]) / denom) <= 1e-12);
      }
    }
  }
}

TEST_CASE("sampling never returns a masked action") {
  std::mt19937_64 rng(1);
  const std::vector<double> p = masked_policy({5.0, -1.0, 0.0}, {0, 1, 1});
  for (int k = 0; k < 1000; ++k) CHECK(choose(p, ActionMode::kSample, rng).action != 0);
  CHECK(choose({0.2, 0.5, 0.3}, ActionMode::kArgmax, rng).action == 1);
  CHECK(choose({0.4, 0.4, 0.2}, ActionMode::kArgmax, rng).action == 0);
}

TEST_CASE("PAC leaves every phase open") {
  StrategyAssignment a;
  CHECK(feasible_phases(0, 12.0, a) == ActionMask(kNumPhases, 1));
}

TEST_CASE("MFC restricts the inbound window to inbound through phases") {
  StrategyAssignment a{Strategy::kMfc, single_plan(Strategy::kMfc)};
  CHECK(feasible_phases(0, 10.0, a) == ActionMask{1, 1, 0, 0, 0, 0, 0, 0});
  CHECK(feasible_phases(0, 60.0, a) == ActionMask(kNumPhases, 1));
}

TEST_CASE("GWC restricts both bands") {
  StrategyAssignment a{Strategy::kGwc, single_plan(Strategy::kGwc)};
  CHECK(feasible_phases(0, 10.0, a) == ActionMask{1, 1, 0, 0, 0, 0, 0, 0});
  CHECK(feasible_phases(0, 40.0, a) == ActionMask{1, 0, 0, 0, 0, 0, 0, 0});
  CHECK(feasible_phases(0, 60.0, a) == ActionMask{1, 0, 1, 0, 0, 0, 0, 0});
  CHECK(feasible_phases(0, 80.0, a) == ActionMask(kNumPhases, 1));
}

TEST_CASE("coordinated strategies need a plan") {
  StrategyAssignment a{Strategy::kMfc, nullptr};
  CHECK_THROWS(feasible_phases(0, 0.0, a));
}

}  // namespace
}  // namespace corridor
