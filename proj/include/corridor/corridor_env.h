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

// The corridor as a multi-agent environment for one coordination strategy,
// plus the measurement-to-plan glue shared with the high-level coordinator.
//
// An episode starts with a warm-up under max-pressure control. At its end
// the strategy's plan is computed from what was measured during the warm-up
// and the agents take over; rewards and metrics cover the remainder only.

#ifndef CORRIDOR_CORRIDOR_ENV_H_
#define CORRIDOR_CORRIDOR_ENV_H_

#include <array>
#include <memory>
#include <random>
#include <vector>

#include "corridor/env.h"
#include "corridor/gwc.h"
#include "corridor/hsa.h"
#include "corridor/mesosim.h"
#include "corridor/mfc.h"

namespace corridor {

struct CoordinationOptions {
  MfcOptions mfc;
  milp::MilpOptions gwc;
};

// Optimizer inputs estimated from a measurement window of `seconds`
// ending at the simulator's current state.
MfcInput measure_mfc_input(const Simulator& sim, const SimCounters& window, double seconds);
GwcInput measure_gwc_input(const Simulator& sim, const SimCounters& window, double seconds);

// Plan for the strategy starting at the simulator clock; PAC gets none. An
// MFC program that stays infeasible after relaxing the branch inflows falls
// back to a plan without windows (no restriction).
std::shared_ptr<const SignalPlan> coordination_plan(Strategy strategy, const Simulator& sim, const SimCounters& window,
                                                    double seconds, const CoordinationOptions& options = {});

struct CorridorEnvConfig {
  CorridorSpec corridor;
  PhaseTable phases = default_phase_table();
  std::array<DemandRates, 3> levels;  // low, medium, high
  std::vector<DemandLevel> level_pool{DemandLevel::kLow, DemandLevel::kMedium, DemandLevel::kHigh};
  SimOptions sim;
  double episode = 3600.0;
  double warmup = 600.0;
  Strategy strategy = Strategy::kPac;
  CoordinationOptions coordination;
  double reward_scale = 1.0;  // applied to agent rewards handed to the trainer

  void check() const;
};

class CorridorEnv : public Environment {
 public:
  explicit CorridorEnv(CorridorEnvConfig config);

  int num_agents() const override { return sim_.size(); }
  int observation_size() const override { return kObservationSize; }
  int num_actions() const override { return kNumPhases; }
  void reset(std::uint64_t seed) override;
  std::vector<double> observation(int agent) const override;
  ActionMask mask(int agent) const override;
  EnvStep step(const std::vector<int>& actions) override;

  // Uses this level instead of drawing one from the pool on the next reset.
  void force_level(DemandLevel level) { forced_level_ = static_cast<int>(level); }

  const Simulator& simulator() const { return sim_; }
  const StrategyAssignment& assignment() const { return assignment_; }
  DemandLevel level() const { return level_; }
  const CorridorEnvConfig& config() const { return config_; }
  // Counters accumulated since the end of the warm-up.
  SimCounters window() const { return sim_.counters() - start_; }

 private:
  CorridorEnvConfig config_;
  Simulator sim_;
  StrategyAssignment assignment_;
  DemandLevel level_ = DemandLevel::kMedium;
  int forced_level_ = -1;
  SimCounters start_;
};

// Controller for a whole episode: max pressure, or a trained policy under
// the environment's strategy.
struct EpisodeController {
  const Mlp* policy = nullptr;  // null means max pressure throughout
  ActionMode mode = ActionMode::kArgmax;
};

struct EpisodeResult {
  EpisodeMetrics metrics;
  std::vector<TrajectoryEvent> trajectory;
};

EpisodeResult run_episode(const CorridorEnvConfig& config, DemandLevel level, const EpisodeController& controller,
                          std::uint64_t seed);

}  // namespace corridor

#endif  // CORRIDOR_CORRIDOR_ENV_H_
