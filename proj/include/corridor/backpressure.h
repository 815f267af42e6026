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

// Max-pressure baseline. A movement's pressure is its saturation capacity
// (q_s times lanes) times the gap between its own queue and the queue it
// feeds, the latter averaged over the downstream approach's turn shares.
// Movements leaving the network feed an empty queue.

#ifndef CORRIDOR_BACKPRESSURE_H_
#define CORRIDOR_BACKPRESSURE_H_

#include <array>
#include <vector>

#include "corridor/mesosim.h"

namespace corridor {

double movement_pressure(const Simulator& sim, int i, Movement m);
std::array<double, kNumPhases> phase_pressures(const Simulator& sim, int i);

// Highest-pressure phase; ties go to the lowest phase index.
int max_pressure_phase(const std::array<double, kNumPhases>& pressures);

std::vector<int> backpressure_actions(const Simulator& sim);

}  // namespace corridor

#endif  // CORRIDOR_BACKPRESSURE_H_
