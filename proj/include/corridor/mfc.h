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

// Max-flow coordination: a single-cycle MILP picks the common cycle length,
// a multi-cycle MILP with that cycle fixed picks green splits while tracking
// residual queues, and offsets follow in closed form from the resulting
// flow pattern at each intersection.
//
// Queues l are vehicles per lane; flows are veh/s summed over the
// coordinated lanes. The queue term of the outflow bound is l*n*z so that it
// matches the per-lane queue recursion.

#ifndef CORRIDOR_MFC_H_
#define CORRIDOR_MFC_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "corridor/milp.h"
#include "corridor/model.h"
#include "corridor/plan.h"

namespace corridor {

struct MfcInput {
  CorridorSpec corridor;
  std::vector<double> initial_queues;  // l_i(1), veh/lane
  double entry_inflow = 0.0;           // q_1^in, veh/s
  int horizon_cycles = 1;

  // Empty queues, entry inflow and horizon taken from the corridor.
  static MfcInput from_spec(const CorridorSpec& spec);
  void check() const;
};

struct MfcOptions {
  milp::MilpOptions milp;
  double big_m = 1e4;
};

enum class FlowScenario { k11, k12, k21, k22 };
std::string scenario_label(FlowScenario s);

// Per intersection, per cycle.
struct MfcCell {
  double q_out = 0.0;
  double q_in = 0.0;
  double q_b = 0.0;
  double g = 0.0;
  double x = 0.0;
  double l = 0.0;       // queue at the start of the cycle
  double l_next = 0.0;  // queue at the start of the next cycle
  double t_c = 0.0;
  double t_s = 0.0;
  double t_u = 0.0;
  FlowScenario scenario = FlowScenario::k11;
  double offset_optimal = 0.0;  // relative to intersection i-1
  double offset_clamped = 0.0;
  double offset = 0.0;          // clamped, mod 1
};

struct MfcSolution {
  double z = 0.0;
  double objective = 0.0;  // green-split objective over the horizon
  double cycle_objective = 0.0;
  std::vector<std::vector<MfcCell>> cells;  // [i][k]
  milp::SolverStats stats;

  double cycle_length() const { return 1.0 / z; }
};

// Variable indices of a built MFC program. l[i][k] is -1 where the queue is
// a constant (k = 0) and z is -1 once fixed.
struct MfcVariables {
  int z = -1;
  std::vector<std::vector<int>> q_out, q_in, q_b, g, x, l;
};

struct MfcProblem {
  milp::MilpProblem problem;
  MfcVariables vars;
  // Rows of the storage constraints, per intersection, used to locate the
  // binding intersection when a program is infeasible.
  std::vector<std::vector<int>> storage_rows;
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, int intersection, int cycle)
      : std::runtime_error(what), intersection_(intersection), cycle_(cycle) {}
  int intersection() const { return intersection_; }  // 1-based, 0 if unknown
  int cycle() const { return cycle_; }                // 1-based, 0 if unknown

 private:
  int intersection_;
  int cycle_;
};

MfcProblem build_cycle_length_problem(const MfcInput& input, double big_m = 1e4);
MfcProblem build_green_split_problem(const MfcInput& input, double z, double big_m = 1e4);

struct CycleLengthResult {
  double z = 0.0;
  double objective = 0.0;
  std::vector<MfcCell> first_cycle;  // per intersection
  milp::SolverStats stats;
};

// Ties in total outflow go to the shorter cycle, then to larger total green.
CycleLengthResult optimize_cycle_length(const MfcInput& input, const MfcOptions& options = {});

struct GreenSplitResult {
  double objective = 0.0;
  std::vector<std::vector<MfcCell>> cells;  // flows, g, x and queues filled
  milp::SolverStats stats;
};

// Ties in total outflow go to larger total green.
GreenSplitResult optimize_green_splits(const MfcInput& input, double z, const MfcOptions& options = {});

struct SupplyDemandSplits {
  double t_c = 0.0;
  double t_s = 0.0;
  double t_u = 0.0;
};

SupplyDemandSplits compute_supply_demand_splits(const IntersectionSpec& spec, const MfcCell& cell, double z);

// t_u below this is treated as zero (fully saturated).
inline constexpr double kSaturationTol = 1e-9;

FlowScenario classify_scenario(const SupplyDemandSplits& splits, double turn_ratio);

struct OffsetTerms {
  double tz = 0.0;      // t_i * z
  double g = 0.0;       // g_i(k)
  double g_prev = 0.0;  // g_{i-1}(k)
  double g_next = 0.0;  // g_i(k+1)
  double f = 1.0;
  double t_s = 0.0;
  double t_c = 0.0;
  double q_b = 0.0;
  double q_s = 0.5;
  int lanes = 1;
};

double optimal_offset(FlowScenario scenario, const OffsetTerms& terms);
double clamp_offset(double optimal, double lower, double upper);
double normalize_offset(double offset);

// Fills t_c/t_s/t_u, labels and offsets of every cell.
void compute_offsets(const CorridorSpec& corridor, double z, std::vector<std::vector<MfcCell>>& cells);

// Full pipeline: cycle length, green splits, offsets.
MfcSolution solve_mfc(const MfcInput& input, const MfcOptions& options = {});

SignalPlan build_mfc_plan(const MfcSolution& solution, double epoch);

}  // namespace corridor

#endif  // CORRIDOR_MFC_H_
