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

#include "corridor/backpressure.h"

#include <limits>

namespace corridor {

double movement_pressure(const Simulator& sim, int i, Movement m) {
  const int idx = index_of(m);
  const Approach a = static_cast<Approach>(idx / 2);
  const Turn t = static_cast<Turn>(idx % 2);
  const IntersectionSpec& spec = sim.corridor().intersections[i];
  double downstream = 0.0;
  const auto [j, b] = sim.downstream(i, a, t);
  if (j >= 0) {
    const Approach next = static_cast<Approach>(b);
    for (int k = 0; k < kNumTurns; ++k) {
      const Turn tk = static_cast<Turn>(k);
      downstream += sim.turn_share(j, next, tk) * sim.queue(j, next, tk);
    }
  }
  return spec.sat_flow * spec.lanes(m) * (sim.queue(i, m) - downstream);
}

std::array<double, kNumPhases> phase_pressures(const Simulator& sim, int i) {
  std::array<double, kNumMovements> mp{};
  for (int m = 0; m < kNumMovements; ++m) mp[m] = movement_pressure(sim, i, static_cast<Movement>(m));
  std::array<double, kNumPhases> out{};
  const PhaseTable& table = sim.phase_table();
  for (int p = 0; p < kNumPhases; ++p) {
    if (!table.phases[p].conflict_free) {
      out[p] = -std::numeric_limits<double>::infinity();
      continue;
    }
    for (int m = 0; m < kNumMovements; ++m) {
      if (table.phases[p].serves(static_cast<Movement>(m))) out[p] += mp[m];
    }
  }
  return out;
}

int max_pressure_phase(const std::array<double, kNumPhases>& pressures) {
  int best = 0;
  for (int p = 1; p < kNumPhases; ++p) {
    if (pressures[p] > pressures[best]) best = p;
  }
  return best;
}

std::vector<int> backpressure_actions(const Simulator& sim) {
  std::vector<int> actions(sim.size());
  for (int i = 0; i < sim.size(); ++i) actions[i] = max_pressure_phase(phase_pressures(sim, i));
  return actions;
}

}  // namespace corridor
