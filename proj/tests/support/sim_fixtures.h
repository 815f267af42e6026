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

// Small corridors and demand profiles for simulator tests.

#ifndef CORRIDOR_TESTS_SIM_FIXTURES_H_
#define CORRIDOR_TESTS_SIM_FIXTURES_H_

#include <cstdint>

#include "corridor/mesosim.h"
#include "corridor/model.h"

namespace corridor::testing {

inline CorridorSpec small_corridor(int n) {
  CorridorSpec spec;
  for (int i = 0; i < n; ++i) {
    IntersectionSpec s;
    s.id = i + 1;
    spec.intersections.push_back(s);
  }
  return spec;
}

inline DemandRates uniform_rates(int n, double entry, double cross) {
  DemandRates r;
  r.inbound_entry = entry;
  r.outbound_entry = entry;
  r.cross.assign(n, {cross, cross});
  return r;
}

inline Simulator make_simulator(int n, double entry, double cross, std::uint64_t seed, double duration = 3600.0) {
  Simulator sim(small_corridor(n), default_phase_table(),
                DemandProfile::constant(uniform_rates(n, entry, cross), DemandLevel::kMedium, duration, seed));
  sim.reset(seed);
  return sim;
}

}  // namespace corridor::testing

#endif  // CORRIDOR_TESTS_SIM_FIXTURES_H_
