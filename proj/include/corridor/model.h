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

// Static corridor geometry, flow parameters, phase table and demand.
//
// Units used throughout the library:
//   flows            veh/s (saturation flow is veh/s per lane)
//   queues           veh per lane inside the optimizers, vehicles in the
//                    simulator
//   green / offsets  fractions of the cycle
//   lengths          meters
//   times            seconds

#ifndef CORRIDOR_MODEL_H_
#define CORRIDOR_MODEL_H_

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace corridor {

inline constexpr int kNumMovements = 8;
inline constexpr int kNumPhases = 8;

// The eight signal-controlled movements. "Cross" approaches are the two legs
// of the side street; inbound is the coordinated direction of travel from
// intersection 1 towards intersection n.
enum class Movement : int {
  kInboundThrough = 0,
  kInboundLeft = 1,
  kOutboundThrough = 2,
  kOutboundLeft = 3,
  kInboundCrossThrough = 4,
  kInboundCrossLeft = 5,
  kOutboundCrossThrough = 6,
  kOutboundCrossLeft = 7,
};

std::string_view movement_name(Movement m);
std::optional<Movement> parse_movement(std::string_view name);

inline constexpr int index_of(Movement m) { return static_cast<int>(m); }

// True when the two movements cannot be green at the same time.
bool movements_conflict(Movement a, Movement b);

using MovementSet = std::bitset<kNumMovements>;

struct Phase {
  MovementSet movements;
  bool conflict_free = true;

  bool serves(Movement m) const { return movements.test(index_of(m)); }
};

struct PhaseTable {
  std::array<Phase, kNumPhases> phases;

  // Recomputes every phase's conflict_free flag from the conflict matrix.
  void refresh_conflict_flags();
  bool covers_all_movements() const;
};

// p1 = {in-T, out-T}, p2 = {in-T, in-L}, p3 = {out-T, out-L},
// p4 = {in-L, out-L}, p5..p8 the same pattern on the cross street.
PhaseTable default_phase_table();

struct CrossTurnShares {
  double through = 0.6;
  double left = 0.2;
  double right = 0.2;
};

struct IntersectionSpec {
  int id = 0;
  double link_length = 300.0;      // L_i, inbound link from i-1 (m)
  int lanes_coordinated = 2;       // n_i
  double free_flow_tt = 25.0;      // t_i, from i-1 (s)
  double turn_ratio = 0.9;         // f_i, share continuing inbound through
  double outbound_turn_ratio = 0.9;
  double left_share = 0.5;         // share of turning traffic that turns left
  double sat_flow = 0.5;           // q_s,i (veh/s/lane)
  double stop_headway = 7.5;       // h (m/veh)
  double green_min = 0.1;
  double green_max = 0.6;
  double branch_min = 0.0;         // q_b,i bounds (veh/s)
  double branch_max = 0.2;
  double offset_min = -1.0;        // cycle fractions
  double offset_max = 1.0;
  int cross_lanes = 1;
  CrossTurnShares cross_turns;

  // Lanes serving each controlled movement (the approach lane set U_i
  // grouped by movement). Left turns get one lane.
  int lanes(Movement m) const;
  double free_flow_speed() const { return link_length / free_flow_tt; }
  double storage_per_lane() const { return link_length / stop_headway; }
};

struct CorridorSpec {
  std::vector<IntersectionSpec> intersections;
  double cycle_min = 60.0;
  double cycle_max = 120.0;
  int horizon_cycles = 3;
  double entry_inflow = 0.5;  // q_1^in
  double cross_link_length = 250.0;
  double cross_free_flow_tt = 20.0;

  int size() const { return static_cast<int>(intersections.size()); }
};

struct ValidationError {
  int intersection = -1;  // -1 for corridor-level fields
  std::string field;
  std::string message;
};

// Returns every violated invariant; empty means the corridor is valid.
std::vector<ValidationError> validate(const CorridorSpec& spec);
std::string format_errors(const std::vector<ValidationError>& errors);

enum class DemandLevel : int { kLow = 0, kMedium = 1, kHigh = 2 };

std::string_view demand_level_name(DemandLevel level);
std::optional<DemandLevel> parse_demand_level(std::string_view name);

// External arrival rates for every origin approach (veh/s).
struct DemandRates {
  double inbound_entry = 0.0;   // corridor end at intersection 1
  double outbound_entry = 0.0;  // corridor end at intersection n
  // Per intersection: {inbound-cross approach, outbound-cross approach}.
  std::vector<std::array<double, 2>> cross;

  double total() const;
};

struct DemandSegment {
  double start = 0.0;
  double end = 0.0;
  DemandLevel level = DemandLevel::kMedium;
  DemandRates rates;
};

struct DemandProfile {
  std::vector<DemandSegment> segments;
  std::uint64_t seed = 1;

  // Segment covering t; times past the last segment use the last one.
  const DemandSegment& segment_at(double t) const;
  double duration() const { return segments.empty() ? 0.0 : segments.back().end; }

  // Single-level profile over [0, duration).
  static DemandProfile constant(const DemandRates& rates, DemandLevel level,
                                double duration, std::uint64_t seed);
};

std::vector<ValidationError> validate(const DemandProfile& profile,
                                      int num_intersections);

}  // namespace corridor

#endif  // CORRIDOR_MODEL_H_
