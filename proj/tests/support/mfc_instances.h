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

// Seeded random max-flow instances for oracle and property tests.

#ifndef CORRIDOR_TESTS_MFC_INSTANCES_H_
#define CORRIDOR_TESTS_MFC_INSTANCES_H_

#include <algorithm>
#include <random>

#include "corridor/mfc.h"

namespace corridor::testing {

struct MfcInstance {
  MfcInput input;
  double z = 0.0;
};

// n <= 3 intersections, t_T <= 3 cycles and at most `max_binaries` binaries
// in the green-split program.
inline MfcInstance random_mfc_instance(std::mt19937_64& rng, int max_binaries = 12) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(1, 3);
  while (true) {
    MfcInstance inst;
    CorridorSpec& spec = inst.input.corridor;
    const int n = small(rng);
    spec.horizon_cycles = small(rng);
    spec.cycle_min = 40.0 + 30.0 * u(rng);
    spec.cycle_max = spec.cycle_min + 60.0 * u(rng);
    spec.entry_inflow = 0.7 * u(rng);
    for (int i = 0; i < n; ++i) {
      IntersectionSpec s;
      s.id = i + 1;
      s.link_length = 150.0 + 250.0 * u(rng);
      s.lanes_coordinated = 1 + static_cast<int>(u(rng) * 2.0);
      s.free_flow_tt = 15.0 + 20.0 * u(rng);
      s.turn_ratio = u(rng) < 0.2 ? 1.0 : 0.6 + 0.4 * u(rng);
      s.sat_flow = 0.4 + 0.2 * u(rng);
      s.green_min = 0.1 + 0.1 * u(rng);
      s.green_max = 0.5 + 0.2 * u(rng);
      s.branch_min = 0.0;
      s.branch_max = 0.25 * u(rng);
      spec.intersections.push_back(s);
    }
    inst.input = MfcInput::from_spec(spec);
    for (int i = 0; i < n; ++i) {
      inst.input.initial_queues[i] = 0.6 * u(rng) * spec.intersections[i].storage_per_lane();
    }
    inst.z = 1.0 / (spec.cycle_min + (spec.cycle_max - spec.cycle_min) * u(rng));
    if (build_green_split_problem(inst.input, inst.z).problem.num_binaries() <= max_binaries) return inst;
  }
}

}  // namespace corridor::testing

#endif  // CORRIDOR_TESTS_MFC_INSTANCES_H_
