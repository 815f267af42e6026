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

#include <random>
#include <stdexcept>
#include <vector>

#include "corridor/backpressure.h"
#include "corridor/mesosim.h"
#include "doctest.h"
#include "support/sim_fixtures.h"

namespace corridor {
namespace {

TEST_CASE("metrics CSV layout is pinned") {
  CHECK(metrics_csv_header() ==
        "# corridor-metrics v1\n"
        "corridor_thru,corridor_stop,corridor_speed,network_thru,avg_tt,in_tt,out_tt,oth_tt,total_reward,"
        "avg_tt_defined\n");
  EpisodeMetrics m;
  const std::string row = metrics_csv_row(m);
  CHECK(row.back() == '\n');
}

TEST_CASE("zero demand leaves the network empty") {
  Simulator sim = testing::make_simulator(3, 0.0, 0.0, 5);
  for (int k = 0; k < 400; ++k) sim.step(backpressure_actions(sim));
  CHECK(sim.counters().entered == 0);
  CHECK(sim.in_network() == 0);
  const EpisodeMetrics m = metrics_from(sim.counters());
  CHECK(m.corridor_thru == 0);
  CHECK_FALSE(m.avg_tt_defined);
}

TEST_CASE("vehicles are conserved and storage is respected") {
  Simulator sim = testing::make_simulator(3, 0.5, 0.1, 11);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> phase(0, kNumPhases - 1);
  for (int k = 0; k < 2000; ++k) {
    std::vector<int> a(3);
    for (int& p : a) p = phase(rng);
    sim.step(a);
    const SimCounters& c = sim.counters();
    REQUIRE(c.entered == c.exited + sim.in_network());
    for (int i = 0; i < 3; ++i) {
      for (int ap = 0; ap < kNumApproaches; ++ap) {
        REQUIRE(sim.link_occupancy(i, Approach(ap)) <= sim.link_capacity(i, Approach(ap)));
      }
    }
  }
  CHECK(sim.counters().entered > 0);
}

TEST_CASE("link capacity follows lanes and headway") {
  Simulator sim = testing::make_simulator(1, 0.0, 0.0, 1);
  const IntersectionSpec& s = sim.corridor().intersections[0];
  CHECK(sim.link_capacity(0, Approach::kInbound) ==
        static_cast<int>((s.lanes_coordinated + 2) * s.link_length / s.stop_headway));
}

TEST_CASE("same seed gives the same run") {
  auto run = [](std::uint64_t seed) {
    Simulator sim = testing::make_simulator(2, 0.4, 0.1, seed);
    for (int k = 0; k < 600; ++k) sim.step(backpressure_actions(sim));
    return sim.counters();
  };
  const SimCounters a = run(21);
  const SimCounters b = run(21);
  CHECK(a.entered == b.entered);
  CHECK(a.exited == b.exited);
  CHECK(a.corridor_tt == b.corridor_tt);
  CHECK(a.reward_sum == b.reward_sum);
  const SimCounters c = run(22);
  CHECK((c.entered != a.entered || c.exited != a.exited || c.reward_sum != a.reward_sum));
}

TEST_CASE("phase changes pass through one all-red step") {
  Simulator sim = testing::make_simulator(1, 0.3, 0.1, 2);
  sim.step({0});
  sim.step({0});
  CHECK(sim.effective_phase(0) == 0);
  sim.step({4});
  CHECK(sim.effective_phase(0) == -1);
  for (int m = 0; m < kNumMovements; ++m) CHECK(sim.released_last_step()[0][m] == 0);
  sim.step({0});
  CHECK(sim.effective_phase(0) == 4);
  sim.step({4});
  CHECK(sim.effective_phase(0) == 4);
}

TEST_CASE("bad phase ids throw") {
  Simulator sim = testing::make_simulator(2, 0.1, 0.0, 2);
  CHECK_THROWS_AS(sim.step({0, 8}), std::invalid_argument);
  CHECK_THROWS_AS(sim.step({0}), std::invalid_argument);
}

TEST_CASE("observation and reward are consistent with queues") {
  Simulator sim = testing::make_simulator(1, 0.5, 0.0, 9);
  for (int k = 0; k < 60; ++k) sim.step({4});
  CHECK(sim.normalized_observation(0).size() == static_cast<std::size_t>(kObservationSize));
  double queues = 0.0;
  double waits = 0.0;
  for (int m = 0; m < kNumMovements; ++m) {
    queues += sim.queue(0, Movement(m));
    waits += sim.head_wait(0, Movement(m));
  }
  CHECK(queues > 0.0);
  CHECK(sim.reward(0) == doctest::Approx(-(queues + sim.options().kappa * waits)));
  CHECK(sim.observe(0).queue[index_of(Movement::kInboundThrough)] ==
        sim.queue(0, Movement::kInboundThrough));
}

TEST_CASE("window arithmetic on counters") {
  Simulator sim = testing::make_simulator(2, 0.4, 0.1, 4);
  for (int k = 0; k < 200; ++k) sim.step(backpressure_actions(sim));
  const SimCounters mid = sim.counters();
  for (int k = 0; k < 200; ++k) sim.step(backpressure_actions(sim));
  const SimCounters w = sim.counters() - mid;
  CHECK(w.steps == 200);
  CHECK(w.entered == sim.counters().entered - mid.entered);
}

}  // namespace
}  // namespace corridor
