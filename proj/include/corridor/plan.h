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

// Coordinated signal plans shared by the MFC and GWC optimizers and the
// signal agents.
//
// Offsets are center-of-green referenced and absolute: intersection 1 has
// offset 0 and intersection i's coordinated green is centered at
// epoch + (k-1)C + offset_i(k)C. Windows are stored relative to the start of
// their cycle and may wrap across the cycle boundary.

#ifndef CORRIDOR_PLAN_H_
#define CORRIDOR_PLAN_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace corridor {

enum class Strategy { kPac = 0, kMfc = 1, kGwc = 2 };

std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

// [start, start + length) seconds within a cycle of length C, taken mod C.
struct Window {
  double start = 0.0;
  double length = 0.0;

  bool contains(double time_in_cycle, double cycle) const;
};

// Builds the wrapped window of a green of split `green` centered at `offset`
// (both cycle fractions).
Window centered_window(double offset, double green, double cycle);

struct IntersectionTiming {
  std::vector<double> green;          // per cycle, coordinated (inbound) split
  std::vector<double> offset;         // per cycle, absolute, in [0, 1)
  std::vector<Window> inbound;        // per cycle
  std::vector<Window> outbound;       // per cycle; empty for MFC
  std::vector<std::string> scenario;  // per cycle MFC flow scenario labels
};

struct SignalPlan {
  Strategy strategy = Strategy::kMfc;
  double cycle_length = 90.0;
  double epoch = 0.0;
  std::vector<IntersectionTiming> intersections;

  int num_cycles() const;
  // Cycle index used at absolute time t: cycles past the planned horizon
  // repeat the last one.
  int cycle_at(double t) const;
  bool in_inbound_window(int i, double t) const;
  bool in_outbound_window(int i, double t) const;

  // Throws std::invalid_argument on inconsistent shapes or out-of-range data.
  void check() const;
};

std::string plan_to_json(const SignalPlan& plan);
SignalPlan plan_from_json(const std::string& text);

// Human-readable tables: cycle, splits, offsets, labels.
std::string plan_summary(const SignalPlan& plan);

}  // namespace corridor

#endif  // CORRIDOR_PLAN_H_
