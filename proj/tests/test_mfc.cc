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

#include <algorithm>
#include <cmath>
#include <random>

#include "corridor/mfc.h"
#include "doctest.h"
#include "support/mfc_instances.h"

namespace corridor {
namespace {

IntersectionSpec node(int id) {
  IntersectionSpec s;
  s.id = id;
  return s;
}

MfcInput single(double entry, double queue, int lanes, int cycles) {
  CorridorSpec spec;
  IntersectionSpec s = node(1);
  s.lanes_coordinated = lanes;
  s.branch_min = 0.0;
  s.branch_max = 0.0;
  spec.intersections.push_back(s);
  spec.entry_inflow = entry;
  spec.horizon_cycles = cycles;
  MfcInput in = MfcInput::from_spec(spec);
  in.initial_queues[0] = queue;
  return in;
}

TEST_CASE("abundant demand saturates a single approach") {
  const MfcInput in = single(0.5, 30.0, 1, 1);
  const CycleLengthResult r = optimize_cycle_length(in);
  REQUIRE(r.first_cycle.size() == 1);
  CHECK(r.first_cycle[0].q_out == doctest::Approx(0.3));
  CHECK(r.first_cycle[0].g == doctest::Approx(0.6));
  CHECK(r.first_cycle[0].x == doctest::Approx(1.0));
}

TEST_CASE("zero demand picks the shortest cycle") {
  const MfcInput in = single(0.0, 0.0, 2, 1);
  const CycleLengthResult r = optimize_cycle_length(in);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.z == doctest::Approx(1.0 / in.corridor.cycle_min));
}

TEST_CASE("downstream inflow is the turn-ratio share of upstream outflow") {
  CorridorSpec spec;
  spec.intersections = {node(1), node(2)};
  spec.intersections[1].turn_ratio = 0.8;
  spec.entry_inflow = 0.4;
  MfcInput in = MfcInput::from_spec(spec);
  const CycleLengthResult r = optimize_cycle_length(in);
  CHECK(r.first_cycle[1].q_in == doctest::Approx(0.8 * r.first_cycle[0].q_out).epsilon(1e-9));
}

TEST_CASE("light demand leaves no queue") {
  const MfcInput in = single(0.01, 0.0, 2, 3);
  const GreenSplitResult r = optimize_green_splits(in, 1.0 / 60.0);
  for (const MfcCell& c : r.cells[0]) {
    CHECK(c.x == doctest::Approx(0.0));
    CHECK(c.l_next == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("persistent oversaturation grows the queue by the surplus each cycle") {
  // Capacity 0.6 * 0.5 * 1 = 0.3 veh/s against 0.5 veh/s: +0.2 * 60 / 1 = 12 veh/lane per cycle.
  const MfcInput in = single(0.5, 0.0, 1, 3);
  const GreenSplitResult r = optimize_green_splits(in, 1.0 / 60.0);
  REQUIRE(r.cells[0].size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(r.cells[0][k].g == doctest::Approx(0.6));
    CHECK(r.cells[0][k].l_next == doctest::Approx(12.0 * (k + 1)).epsilon(1e-9));
  }
}

TEST_CASE("storage too small for the demand floor is infeasible") {
  // 12 veh/lane per cycle against 40 veh/lane of storage fails in cycle 4.
  const MfcInput in = single(0.5, 0.0, 1, 4);
  try {
    optimize_green_splits(in, 1.0 / 60.0);
    FAIL("expected an infeasible program");
  } catch (const InfeasibleError& e) {
    CHECK(e.intersection() == 1);
    CHECK(e.cycle() == 4);
  }
}

TEST_CASE("supply and demand splits") {
  IntersectionSpec s = node(1);
  s.lanes_coordinated = 2;
  s.sat_flow = 0.5;
  MfcCell c;
  c.q_b = 0.2;
  c.l = 5.0;
  CHECK(compute_supply_demand_splits(s, c, 0.01).t_c == doctest::Approx(0.3));

  s.lanes_coordinated = 1;
  s.turn_ratio = 1.0;
  c = MfcCell{};
  c.q_out = 0.3;
  c.g = 0.8;
  const SupplyDemandSplits sp = compute_supply_demand_splits(s, c, 0.01);
  CHECK(sp.t_s == doctest::Approx(0.6));
  CHECK(sp.t_u == doctest::Approx(0.2));
}

TEST_CASE("flow scenario labels") {
  CHECK(classify_scenario({0.3, 0.6, 0.2}, 0.8) == FlowScenario::k11);
  CHECK(classify_scenario({0.3, 0.6, 0.2}, 1.0) == FlowScenario::k12);
  CHECK(classify_scenario({0.5, 0.2, 0.0}, 0.8) == FlowScenario::k22);
  CHECK(classify_scenario({0.1, 0.2, 0.0}, 0.8) == FlowScenario::k21);
  CHECK(scenario_label(FlowScenario::k21) == "2.1");
}

TEST_CASE("offset arithmetic") {
  OffsetTerms t;
  t.tz = 0.3;
  t.g = 0.5;
  t.g_prev = 0.4;
  CHECK(optimal_offset(FlowScenario::k11, t) == doctest::Approx(0.25));
  CHECK(optimal_offset(FlowScenario::k12, t) == doctest::Approx(0.25));

  OffsetTerms u;
  u.f = 0.5;
  u.t_s = 0.2;
  u.t_c = 0.1;
  u.g = 0.5;
  u.g_prev = 0.5;
  u.tz = 0.3;
  CHECK(optimal_offset(FlowScenario::k21, u) == doctest::Approx(0.3));

  CHECK(clamp_offset(1.2, 0.0, 1.0) == 1.0);
  CHECK(normalize_offset(clamp_offset(1.2, 0.0, 1.0)) == 0.0);
  CHECK(normalize_offset(-0.25) == doctest::Approx(0.75));
}

TEST_CASE("plan windows are centered on the offset") {
  MfcSolution sol;
  sol.z = 0.01;
  sol.cells.assign(2, std::vector<MfcCell>(1));
  sol.cells[0][0].g = 0.5;
  sol.cells[1][0].g = 0.5;
  sol.cells[1][0].offset = 0.25;
  const SignalPlan plan = build_mfc_plan(sol, 1000.0);
  CHECK(plan.strategy == Strategy::kMfc);
  CHECK(plan.cycle_length == doctest::Approx(100.0));
  CHECK(plan.intersections[1].inbound[0].start == doctest::Approx(0.0));
  CHECK(plan.intersections[1].inbound[0].length == doctest::Approx(50.0));
  CHECK(plan.in_inbound_window(1, 1000.0));
  CHECK(plan.in_inbound_window(1, 1049.0));
  CHECK_FALSE(plan.in_inbound_window(1, 1051.0));

  MfcSolution wrap;
  wrap.z = 1.0 / 60.0;
  wrap.cells.assign(1, std::vector<MfcCell>(1));
  wrap.cells[0][0].g = 0.2;
  const SignalPlan p2 = build_mfc_plan(wrap, 0.0);
  CHECK(p2.intersections[0].inbound[0].start == doctest::Approx(54.0));
  CHECK(p2.intersections[0].inbound[0].length == doctest::Approx(12.0));
  CHECK(p2.in_inbound_window(0, 5.0));
  CHECK(p2.in_inbound_window(0, 55.0));
  CHECK_FALSE(p2.in_inbound_window(0, 30.0));
}

TEST_CASE("green-split optimum equals enumeration on random instances") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const testing::MfcInstance inst = testing::random_mfc_instance(rng);
    const milp::MilpProblem p = build_green_split_problem(inst.input, inst.z).problem;
    const milp::MilpSolution a = milp::solve_milp(p);
    const milp::MilpSolution b = milp::enumerate_oracle(p);
    INFO("trial " << trial);
    REQUIRE(a.status == b.status);
    if (a.optimal()) CHECK(std::abs(a.objective - b.objective) <= 1e-6);
  }
}

TEST_CASE("outflow collapses to the min of capacity and demand at every optimum") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const testing::MfcInstance inst = testing::random_mfc_instance(rng);
    GreenSplitResult r;
    try {
      r = optimize_green_splits(inst.input, inst.z);
    } catch (const InfeasibleError&) {
      continue;
    }
    for (int i = 0; i < inst.input.corridor.size(); ++i) {
      const IntersectionSpec& s = inst.input.corridor.intersections[i];
      const double n = s.lanes_coordinated;
      for (const MfcCell& c : r.cells[i]) {
        const double expected = std::min(c.g * s.sat_flow * n, c.l * n * inst.z + c.q_in + c.q_b);
        CHECK(std::abs(c.q_out - expected) <= 1e-6);
        CHECK(c.l_next * s.stop_headway <= s.link_length + 1e-6);
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("relaxing the maximum green never lowers the objective") {
  std::mt19937_64 rng(17);
  int pairs = 0;
  for (int trial = 0; trial < 60 && pairs < 20; ++trial) {
    testing::MfcInstance inst = testing::random_mfc_instance(rng);
    GreenSplitResult tight;
    try {
      tight = optimize_green_splits(inst.input, inst.z);
    } catch (const InfeasibleError&) {
      continue;
    }
    for (IntersectionSpec& s : inst.input.corridor.intersections) s.green_max = std::min(1.0, s.green_max + 0.1);
    const GreenSplitResult loose = optimize_green_splits(inst.input, inst.z);
    CHECK(loose.objective >= tight.objective - 1e-6);
    ++pairs;
  }
  CHECK(pairs == 20);
}

TEST_CASE("scenario labels are invariant under common flow scaling") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    IntersectionSpec s = node(2);
    s.lanes_coordinated = 1 + static_cast<int>(u(rng) * 2.0);
    s.turn_ratio = u(rng) < 0.2 ? 1.0 : 0.5 + 0.5 * u(rng);
    s.sat_flow = 0.4 + 0.2 * u(rng);
    MfcCell c;
    c.g = 0.1 + 0.6 * u(rng);
    c.l = 10.0 * u(rng);
    c.q_b = 0.2 * u(rng);
    c.q_in = 0.6 * u(rng);
    const double z = 1.0 / (60.0 + 60.0 * u(rng));
    const double n = s.lanes_coordinated;
    c.q_out = std::min(c.g * s.sat_flow * n, c.l * n * z + c.q_in + c.q_b);
    const FlowScenario base = classify_scenario(compute_supply_demand_splits(s, c, z), s.turn_ratio);

    const double k = 0.5 + 2.0 * u(rng);
    IntersectionSpec s2 = s;
    s2.sat_flow *= k;
    MfcCell c2 = c;
    c2.q_b *= k;
    c2.q_in *= k;
    c2.q_out *= k;
    c2.l *= k;
    CHECK(classify_scenario(compute_supply_demand_splits(s2, c2, z), s2.turn_ratio) == base);
  }
}

TEST_CASE("full pipeline fills offsets within their bounds") {
  CorridorSpec spec;
  for (int i = 1; i <= 4; ++i) spec.intersections.push_back(node(i));
  spec.entry_inflow = 0.5;
  MfcInput in = MfcInput::from_spec(spec);
  const MfcSolution sol = solve_mfc(in);
  CHECK(sol.cycle_length() >= spec.cycle_min - 1e-9);
  CHECK(sol.cycle_length() <= spec.cycle_max + 1e-9);
  for (int i = 1; i < spec.size(); ++i) {
    for (const MfcCell& c : sol.cells[i]) {
      CHECK(c.offset_clamped >= spec.intersections[i].offset_min - 1e-12);
      CHECK(c.offset_clamped <= spec.intersections[i].offset_max + 1e-12);
      CHECK(c.offset >= 0.0);
      CHECK(c.offset < 1.0);
    }
  }
  const SignalPlan plan = build_mfc_plan(sol, 0.0);
  CHECK_NOTHROW(plan.check());
  CHECK(plan.num_cycles() == spec.horizon_cycles);
}

}  // namespace
}  // namespace corridor
