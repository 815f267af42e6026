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

// Scenario files: a JSON document describing the corridor, its demand and
// every tunable the tools use. Unknown keys are rejected so that a typo
// never silently falls back to a default.
//
// Top-level keys (all optional except "corridor"):
//   corridor  corridor fields, "count", "defaults" and "intersections"
//   phases    eight lists of movement names
//   demand    "levels" {low, medium, high} and a "schedule" of level names
//   sim       simulator options
//   episode   {"duration", "warmup"} of single-strategy episodes
//   hsa       {"reward_scale", "evaluation_mode"}
//   hlc       {"weights", "reward_scale", "warmup", "step", "measurement"}
//   ppo       overrides for signal-agent training
//   hlc_ppo   overrides for coordinator training

#ifndef CORRIDOR_SCENARIO_H_
#define CORRIDOR_SCENARIO_H_

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "corridor/corridor_env.h"
#include "corridor/hlc.h"
#include "corridor/ppo.h"
#include "json.hpp"

namespace corridor {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  CorridorSpec corridor;
  PhaseTable phases = default_phase_table();
  std::array<DemandRates, 3> levels;  // low, medium, high
  std::vector<DemandLevel> schedule;  // one level per high-level step
  SimOptions sim;
  double episode = 3600.0;
  double warmup = 600.0;
  double hsa_reward_scale = 0.002;
  ActionMode evaluation_mode = ActionMode::kSample;
  HlcRewardWeights hlc_weights = HlcRewardWeights::group(2);
  double hlc_reward_scale = 1e-4;
  double hlc_warmup = 1200.0;
  double hlc_step = 3600.0;
  double hlc_measurement = 600.0;
  nlohmann::json ppo = nlohmann::json::object();      // validated overrides
  nlohmann::json hlc_ppo = nlohmann::json::object();

  CorridorEnvConfig env_config(Strategy strategy) const;
  // Uses the scenario's schedule; throws ScenarioError when it is empty.
  HlcEnvConfig hlc_config() const;
  // Presets with the scenario's overrides applied on top.
  PpoConfig hsa_ppo_config(bool desk) const;
  PpoConfig hlc_ppo_config(bool desk) const;
};

// Throws ScenarioError naming the offending key.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

// The "corridor" section alone. Intersections are written out in full, so
// parsing the result gives back the same spec.
nlohmann::json corridor_to_json(const CorridorSpec& spec);
CorridorSpec corridor_from_json(const nlohmann::json& doc);

// Applies {"clip": .., "hidden": [..], "lr_schedule": [[steps, lr], ..], ..}.
void apply_ppo_overrides(PpoConfig& config, const nlohmann::json& overrides);
nlohmann::json ppo_config_json(const PpoConfig& config);

}  // namespace corridor

#endif  // CORRIDOR_SCENARIO_H_
