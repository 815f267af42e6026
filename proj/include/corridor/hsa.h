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

// Hybrid signal agent: the coordination strategy in force narrows the phases
// an intersection may pick, and a shared policy network chooses among the
// rest.

#ifndef CORRIDOR_HSA_H_
#define CORRIDOR_HSA_H_

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "corridor/mlp.h"
#include "corridor/model.h"
#include "corridor/plan.h"

namespace corridor {

using ActionMask = std::vector<int>;  // 1 = allowed

struct StrategyAssignment {
  Strategy strategy = Strategy::kPac;
  std::shared_ptr<const SignalPlan> plan;  // required for MFC and GWC

  void check() const;
};

// Phases allowed at intersection i (0-based) at absolute time t.
ActionMask feasible_phases(int i, double t, const StrategyAssignment& assignment,
                           const PhaseTable& table = default_phase_table());

inline constexpr double kMaskedLogit = -1e9;

// softmax(logits + log mask) with masked entries exactly zero. Throws
// std::invalid_argument for an all-zero mask or mismatched sizes.
std::vector<double> masked_policy(const std::vector<double>& logits, const ActionMask& mask);

enum class ActionMode { kSample, kArgmax };

struct ActionChoice {
  int action = 0;
  double log_prob = 0.0;
  std::vector<double> probs;
};

// Draws (or argmaxes) from a probability vector; zero-probability entries
// are never returned. Ties in argmax go to the lowest index.
ActionChoice choose(std::vector<double> probs, ActionMode mode, std::mt19937_64& rng);

ActionChoice select_action(const Mlp& policy, const std::vector<double>& observation, const ActionMask& mask,
                           ActionMode mode, std::mt19937_64& rng);

// One policy per strategy, shared by every intersection.
struct HsaPolicies {
  std::array<std::shared_ptr<const Mlp>, 3> by_strategy;

  const Mlp& policy_for(Strategy s) const;
};

ActionChoice select_action(const HsaPolicies& policies, Strategy strategy, const std::vector<double>& observation,
                           const ActionMask& mask, ActionMode mode, std::mt19937_64& rng);

}  // namespace corridor

#endif  // CORRIDOR_HSA_H_
