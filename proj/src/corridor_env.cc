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

#include "corridor/corridor_env.h"

#include <algorithm>
#include <iostream>
#include <stdexcept>

#include "corridor/backpressure.h"

namespace corridor {
namespace {

constexpr double kClockTol = 1e-9;

double rate(std::int64_t count, double seconds) { return seconds > 0.0 ? count / seconds : 0.0; }

SignalPlan unrestricted_plan(const CorridorSpec& spec, double epoch) {
  SignalPlan plan;
  plan.strategy = Strategy::kMfc;
  plan.cycle_length = spec.cycle_min;
  plan.epoch = epoch;
  for (int i = 0; i < spec.size(); ++i) {
    IntersectionTiming t;
    t.green = {0.0};
    t.offset = {0.0};
    t.inbound = {Window{0.0, 0.0}};
    t.scenario = {"none"};
    plan.intersections.push_back(std::move(t));
  }
  return plan;
}

}  // namespace

MfcInput measure_mfc_input(const Simulator& sim, const SimCounters& window, double seconds) {
  MfcInput in = MfcInput::from_spec(sim.corridor());
  for (int i = 0; i < sim.size(); ++i) {
    IntersectionSpec& s = in.corridor.intersections[i];
    const double queue = sim.queue(i, Movement::kInboundThrough) / static_cast<double>(s.lanes_coordinated);
    in.initial_queues[i] = std::min(queue, s.storage_per_lane());
    s.branch_min = 0.0;
    s.branch_max = rate(window.inbound_link_branch[i], seconds);
  }
  in.entry_inflow = rate(window.inbound_link_through[0], seconds);
  return in;
}

GwcInput measure_gwc_input(const Simulator& sim, const SimCounters& window, double seconds) {
  GwcInput in = GwcInput::from_spec(sim.corridor());
  for (int i = 0; i < sim.size(); ++i) {
    const auto& joins = window.movement_joins[i];
    auto flow = [&](Movement m) { return rate(joins[index_of(m)], seconds); };
    ApproachFlows f;
    f.coordinated_through = std::max(flow(Movement::kInboundThrough), flow(Movement::kOutboundThrough));
    f.coordinated_left = std::max(flow(Movement::kInboundLeft), flow(Movement::kOutboundLeft));
    f.cross_through = std::max(flow(Movement::kInboundCrossThrough), flow(Movement::kOutboundCrossThrough));
    f.cross_left = std::max(flow(Movement::kInboundCrossLeft), flow(Movement::kOutboundCrossLeft));
    const double g = proportional_split(sim.corridor().intersections[i], f);
    in.inbound_green[i] = g;
    in.outbound_green[i] = g;
  }
  return in;
}

std::shared_ptr<const SignalPlan> coordination_plan(Strategy strategy, const Simulator& sim, const SimCounters& window,
                                                    double seconds, const CoordinationOptions& options) {
  const double epoch = sim.clock();
  switch (strategy) {
    case Strategy::kPac:
      return nullptr;
    case Strategy::kGwc: {
      const GwcSolution sol = optimize_gwc(measure_gwc_input(sim, window, seconds), options.gwc);
      return std::make_shared<const SignalPlan>(gwc_plan(sol, epoch));
    }
    case Strategy::kMfc: {
      MfcInput in = measure_mfc_input(sim, window, seconds);
      try {
        return std::make_shared<const SignalPlan>(build_mfc_plan(solve_mfc(in, options.mfc), epoch));
      } catch (const InfeasibleError&) {
      }
      for (int i = 0; i < sim.size(); ++i) {
        const IntersectionSpec& s = sim.corridor().intersections[i];
        in.corridor.intersections[i].branch_min = s.branch_min;
        in.corridor.intersections[i].branch_max = s.branch_max;
      }
      try {
        return std::make_shared<const SignalPlan>(build_mfc_plan(solve_mfc(in, options.mfc), epoch));
      } catch (const InfeasibleError& e) {
        std::cerr << "max-flow plan infeasible at t=" << epoch << " s (" << e.what()
                  << "); running without windows\n";
      }
      return std::make_shared<const SignalPlan>(unrestricted_plan(sim.corridor(), epoch));
    }
  }
  return nullptr;
}

void CorridorEnvConfig::check() const {
  const std::vector<ValidationError> errors = validate(corridor);
  if (!errors.empty()) throw std::invalid_argument(format_errors(errors));
  if (!(episode > warmup) || warmup < 0.0) throw std::invalid_argument("episode must outlast the warm-up");
  if (level_pool.empty()) throw std::invalid_argument("demand level pool is empty");
}

CorridorEnv::CorridorEnv(CorridorEnvConfig config)
    : config_(std::move(config)),
      sim_(config_.corridor, config_.phases,
           DemandProfile::constant(config_.levels[1], DemandLevel::kMedium, config_.episode, 1), config_.sim) {
  config_.check();
}

void CorridorEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (forced_level_ >= 0) {
    level_ = static_cast<DemandLevel>(forced_level_);
  } else {
    level_ = config_.level_pool[rng() % config_.level_pool.size()];
  }
  sim_.set_demand(DemandProfile::constant(config_.levels[static_cast<int>(level_)], level_, config_.episode, seed));
  sim_.reset(seed);
  while (sim_.clock() < config_.warmup - kClockTol) sim_.step(backpressure_actions(sim_));
  assignment_.strategy = config_.strategy;
  assignment_.plan = coordination_plan(config_.strategy, sim_, sim_.counters(), sim_.clock(), config_.coordination);
  start_ = sim_.counters();
}

std::vector<double> CorridorEnv::observation(int agent) const { return sim_.normalized_observation(agent); }

ActionMask CorridorEnv::mask(int agent) const {
  return feasible_phases(agent, sim_.clock(), assignment_, config_.phases);
}

EnvStep CorridorEnv::step(const std::vector<int>& actions) {
  if (static_cast<int>(actions.size()) != sim_.size()) throw std::invalid_argument("one action per intersection");
  for (int i = 0; i < sim_.size(); ++i) {
    const ActionMask m = mask(i);
    if (actions[i] < 0 || actions[i] >= kNumPhases || !m[actions[i]]) {
      throw std::invalid_argument("intersection " + std::to_string(i + 1) + ": phase " +
                                  std::to_string(actions[i] + 1) + " is not allowed now");
    }
  }
  sim_.step(actions);
  EnvStep out;
  out.rewards.resize(sim_.size());
  for (int i = 0; i < sim_.size(); ++i) out.rewards[i] = sim_.reward(i) * config_.reward_scale;
  if (sim_.clock() >= config_.episode - kClockTol) {
    out.done = true;
    out.episode = metrics_from(window());
  }
  return out;
}

EpisodeResult run_episode(const CorridorEnvConfig& config, DemandLevel level, const EpisodeController& controller,
                          std::uint64_t seed) {
  CorridorEnv env(config);
  env.force_level(level);
  env.reset(seed);
  std::mt19937_64 rng(seed ^ 0xA5A5A5A5ULL);
  EpisodeResult result;
  while (true) {
    std::vector<int> actions;
    if (controller.policy) {
      actions.resize(env.num_agents());
      for (int i = 0; i < env.num_agents(); ++i) {
        actions[i] = select_action(*controller.policy, env.observation(i), env.mask(i), controller.mode, rng).action;
      }
    } else {
      actions = backpressure_actions(env.simulator());
    }
    const EnvStep s = env.step(actions);
    if (s.done) {
      result.metrics = *s.episode;
      break;
    }
  }
  result.trajectory = env.simulator().trajectory();
  return result;
}

}  // namespace corridor
