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

// Two-way green-wave coordination in the multi-band style.
//
// Each link i (from intersection i-1 to i) carries an inbound band b_i and an
// outbound band bb_i. w_j / wb_j locate the band center inside the inbound /
// outbound green of intersection j, measured from the start of that green, so
// a band of width b fits when b/2 <= w <= g - b/2 at both ends of its link.
// Inbound and outbound greens of an intersection share their center. Going
// around link i inbound and coming back outbound must close on an integer
// number of cycles:
//
//   (w_{i-1} - w_i) + (wb_i - wb_{i-1}) + 2 t_i z
//       + (g_i - g_{i-1}) / 2 + (gb_{i-1} - gb_i) / 2 = m_i.
//
// All quantities other than z are cycle fractions.

#ifndef CORRIDOR_GWC_H_
#define CORRIDOR_GWC_H_

#include <vector>

#include "corridor/milp.h"
#include "corridor/model.h"
#include "corridor/plan.h"

namespace corridor {

struct GwcInput {
  CorridorSpec corridor;
  // Fixed green splits per intersection; ignored when splits are free.
  std::vector<double> inbound_green;
  std::vector<double> outbound_green;
  bool free_splits = false;

  // Fixed splits equal to each intersection's maximum green.
  static GwcInput from_spec(const CorridorSpec& spec);
  void check() const;
};

struct GwcSolution {
  double z = 0.0;
  double objective = 0.0;  // total bandwidth, cycle fractions
  std::vector<double> g, g_bar;
  std::vector<double> b, b_bar;  // per link, index i for link (i-1 -> i); b[0] unused
  std::vector<double> w, w_bar;
  std::vector<double> phi, phi_bar;  // relative offsets per link, unreduced
  std::vector<int> loop_integer;     // m_i per link
  std::vector<double> offsets;       // absolute, mod 1, intersection 1 at 0
  bool fallback = false;             // zero-bandwidth synchronized plan
  milp::SolverStats stats;

  double cycle_length() const { return 1.0 / z; }
};

struct GwcVariables {
  int z = -1;
  std::vector<int> g, g_bar, w, w_bar, b, b_bar;  // b indices valid for links
  std::vector<std::vector<int>> loop_bits;         // binary expansion of m_i
  std::vector<int> loop_base;                      // lowest admissible m_i
};

struct GwcProblem {
  milp::MilpProblem problem;
  GwcVariables vars;
  bool empty_loop_range = false;  // some m_i has no admissible integer
};

GwcProblem build_gwc_problem(const GwcInput& input);

// Ties in bandwidth go to the shorter cycle. Never fails for a valid input:
// an infeasible program yields the zero-bandwidth synchronized plan.
GwcSolution optimize_gwc(const GwcInput& input, const milp::MilpOptions& options = {});

// Single repeated cycle; both inbound and outbound windows are filled.
SignalPlan gwc_plan(const GwcSolution& solution, double epoch);

// Demand-proportional coordinated split: the critical coordinated flow ratio
// over the sum of critical ratios of the four approach groups, clamped to the
// green bounds.
struct ApproachFlows {
  double coordinated_through = 0.0;  // max of inbound / outbound, veh/s
  double coordinated_left = 0.0;
  double cross_through = 0.0;
  double cross_left = 0.0;
};
double proportional_split(const IntersectionSpec& spec, const ApproachFlows& flows);

}  // namespace corridor

#endif  // CORRIDOR_GWC_H_
