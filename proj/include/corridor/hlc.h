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

// High-level coordinator. Once per high-level step it picks one strategy
// for the whole corridor; the trained signal agents of that strategy then
// run with their weights frozen.
//
// Timeline of an episode: a warm-up under PAC, then a fixed number of
// high-level steps. Each step opens with a measurement phase under PAC,
// after which the coordinator observes, chooses, and the chosen strategy
// (with a plan computed from the measurement) runs for the rest of the step.

#ifndef CORRIDOR_HLC_H_
#define CORRIDOR_HLC_H_

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "corridor/corridor_env.h"
#include "corridor/env.h"
#include "corridor/ppo.h"

namespace corridor {

inline constexpr int kNumOptions = 3;  // indexed like Strategy

struct HlcObservation {
  double demand = 0.0;               // scheduled total arrival rate of the coming step (veh/s)
  std::vector<double> inbound_queue;   // mean inbound-through queue per intersection (veh)
  std::vector<double> outbound_queue;  // same for outbound through

  // Network input: demand as is, queues divided by their approach storage.
  std::vector<double> features(const CorridorSpec& corridor) const;
};

inline int hlc_observation_size(int num_intersections) { return 1 + 2 * num_intersections; }

// Means over the `window` counters (one sample per simulator step).
HlcObservation hlc_observe(const SimCounters& window, int num_intersections, double demand);

struct HlcRewardWeights {
  double queue = -1.0;   // alpha_1
  double stops = -0.01;  // alpha_2
  double speed = 10.0;   // alpha_3

  static HlcRewardWeights group(int tag);  // 1, 2 or 3
  void check() const;
};

struct HlcRewardTerms {
  double queue = 0.0;  // controlled queues summed over intersections and steps
  double stops = 0.0;  // stops made by corridor vehicles
  double speed = 0.0;  // mean corridor speed (m/s)
};

// Speed falls back to free flow when no corridor trip completed.
HlcRewardTerms hlc_reward_terms(const SimCounters& window, const CorridorSpec& corridor);
double hlc_reward(const HlcRewardTerms& terms, const HlcRewardWeights& weights);

struct HlcEnvConfig {
  CorridorSpec corridor;
  PhaseTable phases = default_phase_table();
  std::array<DemandRates, 3> levels;
  std::vector<DemandLevel> schedule;  // one entry per high-level step
  SimOptions sim;
  double warmup = 1200.0;
  double step = 3600.0;
  double measurement = 600.0;
  HlcRewardWeights weights;
  double reward_scale = 1e-4;
  ActionMode agent_mode = ActionMode::kSample;
  CoordinationOptions coordination;
  double series_bin = 0.0;  // > 0 records a time series with this bin width (s)

  double episode() const { return warmup + step * static_cast<double>(schedule.size()); }
  // Warm-up and the first step share the first schedule entry.
  DemandProfile profile(std::uint64_t seed) const;
  void check() const;
};

struct HlcDecision {
  int index = 0;
  double start = 0.0;  // start of the high-level step (s)
  DemandLevel level = DemandLevel::kMedium;
  HlcObservation observation;
  Strategy option = Strategy::kPac;
  HlcRewardTerms terms;
  double reward = 0.0;  // unscaled
  EpisodeMetrics metrics;  // over the part run under the option
  double mean_network_queue = 0.0;
};

std::string decision_csv_header();
std::string decision_csv_row(const HlcDecision& d);

struct SeriesPoint {
  double start = 0.0;
  double end = 0.0;
  DemandLevel level = DemandLevel::kMedium;
  std::string control;  // warmup, measure, pac, mfc or gwc
  double corridor_stops = 0.0;  // stops per completed corridor trip
  double corridor_speed = 0.0;
  double network_queue = 0.0;   // mean controlled queue sum per step
};

std::string series_csv_header();
std::string series_csv_row(const SeriesPoint& p);

// What the agents run under at one low-level step; for invariant checks.
struct LowLevelStep {
  double time = 0.0;
  bool measuring = false;
  std::vector<StrategyAssignment> assignments;  // one per intersection
  std::vector<ActionMask> masks;
};

class HlcEnv : public Environment {
 public:
  HlcEnv(HlcEnvConfig config, HsaPolicies policies);

  int num_agents() const override { return 1; }
  int observation_size() const override { return hlc_observation_size(config_.corridor.size()); }
  int num_actions() const override { return kNumOptions; }
  void reset(std::uint64_t seed) override;
  std::vector<double> observation(int agent) const override;
  ActionMask mask(int agent) const override;
  EnvStep step(const std::vector<int>& actions) override;

  const HlcObservation& current() const { return observation_; }
  const std::vector<HlcDecision>& decisions() const { return decisions_; }
  const std::vector<SeriesPoint>& series() const { return series_; }
  const Simulator& simulator() const { return sim_; }
  int steps_taken() const { return static_cast<int>(decisions_.size()); }
  void set_step_observer(std::function<void(const LowLevelStep&)> observer) { observer_ = std::move(observer); }

 private:
  void run(double until, const StrategyAssignment& assignment, bool measuring, const std::string& control);
  void measure();

  HlcEnvConfig config_;
  HsaPolicies policies_;
  Simulator sim_;
  std::mt19937_64 rng_;
  HlcObservation observation_;
  SimCounters measured_;  // counters of the last measurement phase
  std::vector<HlcDecision> decisions_;
  std::vector<SeriesPoint> series_;
  std::function<void(const LowLevelStep&)> observer_;
};

// Option bandit: each step draws a demand level, and the option listed for
// that level pays +1 while the others pay -1. Episodes last `steps` steps.
class OptionBanditEnv : public Environment {
 public:
  OptionBanditEnv(std::array<Strategy, 3> dominant, int num_intersections = 6, int steps = 16);

  int num_agents() const override { return 1; }
  int observation_size() const override { return hlc_observation_size(num_intersections_); }
  int num_actions() const override { return kNumOptions; }
  void reset(std::uint64_t seed) override;
  std::vector<double> observation(int agent) const override;
  ActionMask mask(int agent) const override;
  EnvStep step(const std::vector<int>& actions) override;

  static std::vector<double> level_observation(DemandLevel level, int num_intersections);
  DemandLevel level() const { return level_; }
  Strategy dominant(DemandLevel level) const { return dominant_[static_cast<int>(level)]; }

 private:
  std::array<Strategy, 3> dominant_;
  int num_intersections_;
  int steps_;
  int taken_ = 0;
  std::mt19937_64 rng_;
  DemandLevel level_ = DemandLevel::kLow;
};

// Coordinator column of the training table, and small presets. On the
// corridor every transition costs a simulated hour, so its preset collects
// four episodes per iteration instead of 2000 transitions.
PpoConfig hlc_ppo_config();
PpoConfig hlc_desk_config();
PpoConfig hlc_corridor_desk_config();

// Checksums of the frozen per-strategy policies, in Strategy order.
std::array<std::uint64_t, 3> policy_checksums(const HsaPolicies& policies);

// Trains a coordinator on environments from `factory`.
PolicyParams train_option_policy(const EnvFactory& factory, const PpoConfig& config,
                                 const IterationCallback& on_iteration = {});

// Trains on the corridor. Every strategy must have a policy; their weights
// are verified unchanged afterwards (std::logic_error otherwise).
PolicyParams train_hlc(const HlcEnvConfig& env, const HsaPolicies& policies, const PpoConfig& config,
                       const IterationCallback& on_iteration = {});

Strategy select_option(const Mlp& policy, const std::vector<double>& features, ActionMode mode,
                       std::mt19937_64& rng);

struct HlcEpisode {
  std::vector<HlcDecision> decisions;
  std::vector<SeriesPoint> series;
};

HlcEpisode run_hlc_episode(const HlcEnvConfig& config, const HsaPolicies& policies, const Mlp& coordinator,
                           ActionMode mode, std::uint64_t seed);

// Coordinator weight file: the policy/value pair plus the reward weights
// it was trained with.
struct HlcWeights {
  PolicyParams params;
  HlcRewardWeights weights;

  void save(const std::string& path) const;
  static HlcWeights load(const std::string& path);
};

}  // namespace corridor

#endif  // CORRIDOR_HLC_H_
