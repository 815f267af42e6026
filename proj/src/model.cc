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

#include "corridor/model.h"

#include <cmath>
#include <sstream>

namespace corridor {
namespace {

constexpr std::array<std::string_view, kNumMovements> kMovementNames = {
    "inbound_through",       "inbound_left",
    "outbound_through",      "outbound_left",
    "inbound_cross_through", "inbound_cross_left",
    "outbound_cross_through", "outbound_cross_left",
};

bool is_cross(Movement m) { return index_of(m) >= 4; }
bool is_left(Movement m) { return index_of(m) % 2 == 1; }

// Direction within the street pair: 0 = inbound side, 1 = outbound side.
int side(Movement m) { return (index_of(m) / 2) % 2; }

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string_view movement_name(Movement m) { return kMovementNames[index_of(m)]; }

std::optional<Movement> parse_movement(std::string_view name) {
  for (int i = 0; i < kNumMovements; ++i) {
    if (kMovementNames[i] == name) return static_cast<Movement>(i);
  }
  return std::nullopt;
}

bool movements_conflict(Movement a, Movement b) {
  if (a == b) return false;
  // Anything on the main street crosses anything on the side street.
  if (is_cross(a) != is_cross(b)) return true;
  // Same street: a left turn crosses the opposing through movement. Same-side
  // pairs and the two opposing lefts run together.
  if (side(a) == side(b)) return false;
  return is_left(a) != is_left(b);
}

void PhaseTable::refresh_conflict_flags() {
  for (Phase& phase : phases) {
    phase.conflict_free = true;
    for (int a = 0; a < kNumMovements; ++a) {
      for (int b = a + 1; b < kNumMovements; ++b) {
        if (phase.movements.test(a) && phase.movements.test(b) &&
            movements_conflict(static_cast<Movement>(a), static_cast<Movement>(b))) {
          phase.conflict_free = false;
        }
      }
    }
  }
}

bool PhaseTable::covers_all_movements() const {
  MovementSet all;
  for (const Phase& phase : phases) all |= phase.movements;
  return all.all();
}

PhaseTable default_phase_table() {
  using M = Movement;
  auto set = [](std::initializer_list<M> ms) {
    MovementSet s;
    for (M m : ms) s.set(index_of(m));
    return s;
  };
  PhaseTable table;
  table.phases[0].movements = set({M::kInboundThrough, M::kOutboundThrough});
  table.phases[1].movements = set({M::kInboundThrough, M::kInboundLeft});
  table.phases[2].movements = set({M::kOutboundThrough, M::kOutboundLeft});
  table.phases[3].movements = set({M::kInboundLeft, M::kOutboundLeft});
  table.phases[4].movements = set({M::kInboundCrossThrough, M::kOutboundCrossThrough});
  table.phases[5].movements = set({M::kInboundCrossThrough, M::kInboundCrossLeft});
  table.phases[6].movements = set({M::kOutboundCrossThrough, M::kOutboundCrossLeft});
  table.phases[7].movements = set({M::kInboundCrossLeft, M::kOutboundCrossLeft});
  table.refresh_conflict_flags();
  return table;
}

int IntersectionSpec::lanes(Movement m) const {
  switch (m) {
    case Movement::kInboundThrough:
    case Movement::kOutboundThrough:
      return lanes_coordinated;
    case Movement::kInboundCrossThrough:
    case Movement::kOutboundCrossThrough:
      return cross_lanes;
    default:
      return 1;
  }
}

std::vector<ValidationError> validate(const CorridorSpec& spec) {
  std::vector<ValidationError> errors;
  auto fail = [&](int id, std::string field, std::string message) {
    errors.push_back({id, std::move(field), std::move(message)});
  };

  if (!finite(spec.cycle_min) || !finite(spec.cycle_max) || spec.cycle_min <= 0.0) {
    fail(-1, "cycle_min", "cycle bounds must be finite and positive");
  } else if (spec.cycle_min > spec.cycle_max) {
    fail(-1, "cycle_min", "cycle bounds inverted");
  }
  if (spec.horizon_cycles < 1) fail(-1, "horizon_cycles", "horizon must be at least one cycle");
  if (!finite(spec.entry_inflow) || spec.entry_inflow < 0.0) {
    fail(-1, "entry_inflow", "entry inflow must be finite and non-negative");
  }
  if (!finite(spec.cross_link_length) || spec.cross_link_length <= 0.0) {
    fail(-1, "cross_link_length", "cross link length must be positive");
  }
  if (!finite(spec.cross_free_flow_tt) || spec.cross_free_flow_tt <= 0.0) {
    fail(-1, "cross_free_flow_tt", "cross travel time must be positive");
  }
  if (spec.intersections.empty()) fail(-1, "intersections", "corridor has no intersections");

  for (std::size_t k = 0; k < spec.intersections.size(); ++k) {
    const IntersectionSpec& s = spec.intersections[k];
    const int id = s.id;
    if (s.id != static_cast<int>(k) + 1) {
      fail(id, "id", "intersections must be numbered 1..n in inbound order");
    }
    if (!finite(s.link_length) || s.link_length <= 0.0) fail(id, "link_length", "link length must be positive");
    if (s.lanes_coordinated <= 0) fail(id, "lanes_coordinated", "lane count must be positive");
    if (s.cross_lanes <= 0) fail(id, "cross_lanes", "lane count must be positive");
    if (!finite(s.free_flow_tt) || s.free_flow_tt <= 0.0) fail(id, "free_flow_tt", "travel time must be positive");
    if (!finite(s.turn_ratio) || s.turn_ratio <= 0.0 || s.turn_ratio > 1.0) {
      fail(id, "turn_ratio", "turn ratio must be in (0,1]");
    }
    if (!finite(s.outbound_turn_ratio) || s.outbound_turn_ratio <= 0.0 || s.outbound_turn_ratio > 1.0) {
      fail(id, "outbound_turn_ratio", "turn ratio must be in (0,1]");
    }
    if (!finite(s.left_share) || s.left_share < 0.0 || s.left_share > 1.0) {
      fail(id, "left_share", "left share must be in [0,1]");
    }
    if (!finite(s.sat_flow) || s.sat_flow <= 0.0) fail(id, "sat_flow", "saturation flow must be positive");
    if (!finite(s.stop_headway) || s.stop_headway <= 0.0) fail(id, "stop_headway", "stop headway must be positive");
    if (!finite(s.green_min) || !finite(s.green_max) || s.green_min < 0.0 || s.green_max > 1.0 ||
        s.green_min > s.green_max) {
      fail(id, "green_min", "green bounds must satisfy 0 <= g_min <= g_max <= 1");
    }
    if (!finite(s.branch_min) || !finite(s.branch_max) || s.branch_min < 0.0 ||
        s.branch_min > s.branch_max) {
      fail(id, "branch_min", "branch flow bounds must satisfy 0 <= min <= max");
    }
    if (!finite(s.offset_min) || !finite(s.offset_max) || s.offset_min > s.offset_max) {
      fail(id, "offset_min", "offset bounds inverted");
    }
    const CrossTurnShares& c = s.cross_turns;
    if (!finite(c.through) || !finite(c.left) || !finite(c.right) || c.through < 0.0 ||
        c.left < 0.0 || c.right < 0.0 || std::abs(c.through + c.left + c.right - 1.0) > 1e-9) {
      fail(id, "cross_turns", "cross turn shares must be non-negative and sum to 1");
    }
  }
  return errors;
}

std::string format_errors(const std::vector<ValidationError>& errors) {
  std::ostringstream out;
  for (const ValidationError& e : errors) {
    if (e.intersection >= 0) {
      out << "intersection " << e.intersection << ": ";
    }
    out << e.field << ": " << e.message << "\n";
  }
  return out.str();
}

std::string_view demand_level_name(DemandLevel level) {
  switch (level) {
    case DemandLevel::kLow:
      return "low";
    case DemandLevel::kMedium:
      return "medium";
    case DemandLevel::kHigh:
      return "high";
  }
  return "medium";
}

std::optional<DemandLevel> parse_demand_level(std::string_view name) {
  if (name == "low") return DemandLevel::kLow;
  if (name == "medium") return DemandLevel::kMedium;
  if (name == "high") return DemandLevel::kHigh;
  return std::nullopt;
}

double DemandRates::total() const {
  double sum = inbound_entry + outbound_entry;
  for (const auto& c : cross) sum += c[0] + c[1];
  return sum;
}

const DemandSegment& DemandProfile::segment_at(double t) const {
  for (const DemandSegment& s : segments) {
    if (t < s.end) return s;
  }
  return segments.back();
}

DemandProfile DemandProfile::constant(const DemandRates& rates, DemandLevel level,
                                      double duration, std::uint64_t seed) {
  DemandProfile profile;
  profile.seed = seed;
  profile.segments.push_back({0.0, duration, level, rates});
  return profile;
}

std::vector<ValidationError> validate(const DemandProfile& profile, int num_intersections) {
  std::vector<ValidationError> errors;
  if (profile.segments.empty()) {
    errors.push_back({-1, "segments", "demand profile is empty"});
    return errors;
  }
  double expected_start = 0.0;
  for (const DemandSegment& s : profile.segments) {
    if (std::abs(s.start - expected_start) > 1e-9) {
      errors.push_back({-1, "segments", "segments must be contiguous from t=0"});
    }
    if (!(s.end > s.start)) errors.push_back({-1, "segments", "segment end must exceed start"});
    expected_start = s.end;
    const DemandRates& r = s.rates;
    bool ok = finite(r.inbound_entry) && finite(r.outbound_entry) && r.inbound_entry >= 0.0 &&
              r.outbound_entry >= 0.0;
    for (const auto& c : r.cross) ok = ok && finite(c[0]) && finite(c[1]) && c[0] >= 0.0 && c[1] >= 0.0;
    if (!ok) errors.push_back({-1, "rates", "arrival rates must be finite and non-negative"});
    if (static_cast<int>(r.cross.size()) != num_intersections) {
      errors.push_back({-1, "rates", "cross rates must list every intersection"});
    }
  }
  return errors;
}

}  // namespace corridor
