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

#include "corridor/hlc.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace corridor {
namespace {

constexpr double kClockTol = 1e-9;
constexpr char kMagic[4] = {'C', 'S', 'H', 'W'};
constexpr std::uint32_t kFormatVersion = 1;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string joined(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ';';
    out += fmt(values[k]);
  }
  return out;
}

std::string lower_name(Strategy s) {
  std::string name(strategy_name(s));
  for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return name;
}

double corridor_free_flow_speed(const CorridorSpec& corridor) {
  double length = 0.0;
  double time = 0.0;
  for (const IntersectionSpec& s : corridor.intersections) {
    length += s.link_length;
    time += s.free_flow_tt;
  }
  return time > 0.0 ? length / time : 0.0;
}

Strategy option_of(int action) {
  if (action < 0 || action >= kNumOptions) throw std::invalid_argument("option index out of range");
  return static_cast<Strategy>(action);
}

}  // namespace

std::vector<double> HlcObservation::features(const CorridorSpec& corridor) const {
  const int n = corridor.size();
  if (static_cast<int>(inbound_queue.size()) != n || static_cast<int>(outbound_queue.size()) != n) {
    throw std::invalid_argument("observation does not match the corridor size");
  }
  std::vector<double> out;
  out.reserve(hlc_observation_size(n));
  out.push_back(demand);
  for (int i = 0; i < n; ++i) {
    const IntersectionSpec& s = corridor.intersections[i];
    out.push_back(inbound_queue[i] / (s.lanes_coordinated * s.storage_per_lane()));
  }
  for (int i = 0; i < n; ++i) {
    const IntersectionSpec& s = corridor.intersections[i];
    out.push_back(outbound_queue[i] / (s.lanes_coordinated * s.storage_per_lane()));
  }
  return out;
}

HlcObservation hlc_observe(const SimCounters& window, int num_intersections, double demand) {
  HlcObservation obs;
  obs.demand = demand;
  obs.inbound_queue.assign(num_intersections, 0.0);
  obs.outbound_queue.assign(num_intersections, 0.0);
  if (window.steps <= 0) return obs;
  if (static_cast<int>(window.movement_queue_sum.size()) != num_intersections) {
    throw std::invalid_argument("counter window does not match the corridor size");
  }
  const double inv = 1.0 / static_cast<double>(window.steps);
  for (int i = 0; i < num_intersections; ++i) {
    obs.inbound_queue[i] = window.movement_queue_sum[i][index_of(Movement::kInboundThrough)] * inv;
    obs.outbound_queue[i] = window.movement_queue_sum[i][index_of(Movement::kOutboundThrough)] * inv;
  }
  return obs;
}

HlcRewardWeights HlcRewardWeights::group(int tag) {
  switch (tag) {
    case 1:
      return {-1.0, -0.1, 50.0};
    case 2:
      return {-1.0, -0.01, 10.0};
    case 3:
      return {-1.0, -0.005, 1.0};
    default:
      throw std::invalid_argument("weight group must be 1, 2 or 3");
  }
}

void HlcRewardWeights::check() const {
  if (!std::isfinite(queue) || !std::isfinite(stops) || !std::isfinite(speed)) {
    throw std::invalid_argument("reward weights must be finite");
  }
}

HlcRewardTerms hlc_reward_terms(const SimCounters& window, const CorridorSpec& corridor) {
  HlcRewardTerms t;
  t.queue = window.queue_sum;
  t.stops = static_cast<double>(window.corridor_stop_events);
  t.speed = window.corridor_tt > 0.0 ? window.corridor_distance / window.corridor_tt
                                     : corridor_free_flow_speed(corridor);
  return t;
}

double hlc_reward(const HlcRewardTerms& terms, const HlcRewardWeights& weights) {
  return weights.queue * terms.queue + weights.stops * terms.stops + weights.speed * terms.speed;
}

DemandProfile HlcEnvConfig::profile(std::uint64_t seed) const {
  DemandProfile p;
  p.seed = seed;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    DemandSegment s;
    s.start = k == 0 ? 0.0 : warmup + step * static_cast<double>(k);
    s.end = warmup + step * static_cast<double>(k + 1);
    s.level = schedule[k];
    s.rates = levels[static_cast<int>(schedule[k])];
    p.segments.push_back(std::move(s));
  }
  return p;
}

void HlcEnvConfig::check() const {
  const std::vector<ValidationError> errors = validate(corridor);
  if (!errors.empty()) throw std::invalid_argument(format_errors(errors));
  if (schedule.empty()) throw std::invalid_argument("demand schedule is empty");
  if (!(step > 0.0)) throw std::invalid_argument("high-level step must be positive");
  if (!(warmup >= 0.0)) throw std::invalid_argument("warm-up must not be negative");
  if (!(measurement >= 0.0 && measurement < step)) {
    throw std::invalid_argument("measurement phase must be shorter than the high-level step");
  }
  if (!(reward_scale > 0.0) || !std::isfinite(reward_scale)) throw std::invalid_argument("reward scale must be positive");
  if (series_bin < 0.0) throw std::invalid_argument("series bin must not be negative");
  weights.check();
  const std::vector<ValidationError> demand_errors = validate(profile(1), corridor.size());
  if (!demand_errors.empty()) throw std::invalid_argument(format_errors(demand_errors));
}

std::string decision_csv_header() {
  return "# corridor-decisions v1\n"
         "step,start,level,demand,in_queues,out_queues,option,reward,queue_term,stop_term,speed_term,"
         "corridor_thru,corridor_stop,corridor_speed,network_queue\n";
}

std::string decision_csv_row(const HlcDecision& d) {
  return std::to_string(d.index + 1) + "," + fmt(d.start) + "," + std::string(demand_level_name(d.level)) + "," +
         fmt(d.observation.demand) + "," + joined(d.observation.inbound_queue) + "," +
         joined(d.observation.outbound_queue) + "," + std::string(strategy_name(d.option)) + "," + fmt(d.reward) +
         "," + fmt(d.terms.queue) + "," + fmt(d.terms.stops) + "," + fmt(d.terms.speed) + "," +
         std::to_string(d.metrics.corridor_thru) + "," + fmt(d.metrics.corridor_stop) + "," +
         fmt(d.metrics.corridor_speed) + "," + fmt(d.mean_network_queue) + "\n";
}

std::string series_csv_header() {
  return "# corridor-series v1\nstart,end,level,control,corridor_stops,corridor_speed,network_queue\n";
}

std::string series_csv_row(const SeriesPoint& p) {
  return fmt(p.start) + "," + fmt(p.end) + "," + std::string(demand_level_name(p.level)) + "," + p.control + "," +
         fmt(p.corridor_stops) + "," + fmt(p.corridor_speed) + "," + fmt(p.network_queue) + "\n";
}

HlcEnv::HlcEnv(HlcEnvConfig config, HsaPolicies policies)
    : config_(std::move(config)),
      policies_(std::move(policies)),
      sim_(config_.corridor, config_.phases, config_.profile(1), config_.sim) {
  config_.check();
  for (int s = 0; s < kNumOptions; ++s) {
    const Mlp& p = policies_.policy_for(static_cast<Strategy>(s));
    if (p.inputs() != kObservationSize || p.outputs() != kNumPhases) {
      throw std::invalid_argument(std::string(strategy_name(static_cast<Strategy>(s))) +
                                  " policy has the wrong shape for a signal agent");
    }
  }
}

void HlcEnv::reset(std::uint64_t seed) {
  sim_.set_demand(config_.profile(seed));
  sim_.reset(seed);
  rng_.seed(seed ^ 0x5DEECE66DULL);
  decisions_.clear();
  series_.clear();
  run(config_.warmup, StrategyAssignment{}, false, "warmup");
  measure();
}

void HlcEnv::run(double until, const StrategyAssignment& assignment, bool measuring, const std::string& control) {
  const int n = sim_.size();
  std::vector<int> actions(n);
  LowLevelStep info;
  double bin_start = sim_.clock();
  SimCounters bin_counters = sim_.counters();
  auto flush = [&]() {
    const SimCounters w = sim_.counters() - bin_counters;
    if (w.steps == 0) return;
    const EpisodeMetrics m = metrics_from(w);
    SeriesPoint p;
    p.start = bin_start;
    p.end = sim_.clock();
    p.level = sim_.demand().segment_at(bin_start).level;
    p.control = control;
    p.corridor_stops = m.corridor_stop;
    p.corridor_speed = m.corridor_speed;
    p.network_queue = w.queue_sum / static_cast<double>(w.steps);
    series_.push_back(std::move(p));
    bin_start = sim_.clock();
    bin_counters = sim_.counters();
  };
  while (sim_.clock() < until - kClockTol) {
    const double t = sim_.clock();
    if (observer_) {
      info.time = t;
      info.measuring = measuring;
      info.assignments.assign(n, assignment);
      info.masks.clear();
    }
    for (int i = 0; i < n; ++i) {
      const ActionMask mask = feasible_phases(i, t, assignment, config_.phases);
      actions[i] = select_action(policies_, assignment.strategy, sim_.normalized_observation(i), mask,
                                 config_.agent_mode, rng_)
                       .action;
      if (observer_) info.masks.push_back(mask);
    }
    if (observer_) observer_(info);
    sim_.step(actions);
    if (config_.series_bin > 0.0 && sim_.clock() >= bin_start + config_.series_bin - kClockTol) flush();
  }
  if (config_.series_bin > 0.0) flush();
}

void HlcEnv::measure() {
  const SimCounters start = sim_.counters();
  run(sim_.clock() + config_.measurement, StrategyAssignment{}, true, "measure");
  measured_ = sim_.counters() - start;
  const DemandLevel next = config_.schedule[decisions_.size()];
  observation_ = hlc_observe(measured_, sim_.size(), config_.levels[static_cast<int>(next)].total());
}

std::vector<double> HlcEnv::observation(int agent) const {
  if (agent != 0) throw std::out_of_range("the coordinator is the only agent");
  return observation_.features(config_.corridor);
}

ActionMask HlcEnv::mask(int agent) const {
  if (agent != 0) throw std::out_of_range("the coordinator is the only agent");
  return ActionMask(kNumOptions, 1);
}

EnvStep HlcEnv::step(const std::vector<int>& actions) {
  if (actions.size() != 1) throw std::invalid_argument("the coordinator takes one action");
  const std::size_t k = decisions_.size();
  if (k >= config_.schedule.size()) throw std::logic_error("episode is over; reset first");
  HlcDecision d;
  d.index = static_cast<int>(k);
  d.start = sim_.clock() - config_.measurement;
  d.level = config_.schedule[k];
  d.observation = observation_;
  d.option = option_of(actions[0]);

  StrategyAssignment assignment;
  assignment.strategy = d.option;
  assignment.plan =
      coordination_plan(d.option, sim_, measured_, config_.measurement, config_.coordination);
  const SimCounters start = sim_.counters();
  run(config_.warmup + config_.step * static_cast<double>(k + 1), assignment, false, lower_name(d.option));
  const SimCounters window = sim_.counters() - start;
  d.terms = hlc_reward_terms(window, config_.corridor);
  d.reward = hlc_reward(d.terms, config_.weights);
  d.metrics = metrics_from(window);
  d.mean_network_queue = window.steps > 0 ? window.queue_sum / static_cast<double>(window.steps) : 0.0;
  decisions_.push_back(d);

  EnvStep out;
  out.rewards = {d.reward * config_.reward_scale};
  if (decisions_.size() == config_.schedule.size()) {
    out.done = true;
    out.terminal = true;
    EpisodeMetrics total;
    for (const HlcDecision& x : decisions_) total.total_reward += x.reward;
    out.episode = total;
  } else {
    measure();
  }
  return out;
}

OptionBanditEnv::OptionBanditEnv(std::array<Strategy, 3> dominant, int num_intersections, int steps)
    : dominant_(dominant), num_intersections_(num_intersections), steps_(steps) {
  if (num_intersections_ < 1) throw std::invalid_argument("need at least one intersection");
  if (steps_ < 1) throw std::invalid_argument("episodes need at least one step");
}

void OptionBanditEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  taken_ = 0;
  level_ = static_cast<DemandLevel>(rng_() % 3);
}

std::vector<double> OptionBanditEnv::level_observation(DemandLevel level, int num_intersections) {
  std::vector<double> obs(hlc_observation_size(num_intersections), 0.0);
  obs[0] = 1.0 + static_cast<double>(level);
  return obs;
}

std::vector<double> OptionBanditEnv::observation(int agent) const {
  if (agent != 0) throw std::out_of_range("the coordinator is the only agent");
  return level_observation(level_, num_intersections_);
}

ActionMask OptionBanditEnv::mask(int agent) const {
  if (agent != 0) throw std::out_of_range("the coordinator is the only agent");
  return ActionMask(kNumOptions, 1);
}

EnvStep OptionBanditEnv::step(const std::vector<int>& actions) {
  if (actions.size() != 1) throw std::invalid_argument("the coordinator takes one action");
  EnvStep out;
  out.rewards = {option_of(actions[0]) == dominant(level_) ? 1.0 : -1.0};
  taken_ += 1;
  if (taken_ >= steps_) {
    out.done = true;
    out.terminal = true;
  } else {
    level_ = static_cast<DemandLevel>(rng_() % 3);
  }
  return out;
}

PpoConfig hlc_ppo_config() {
  PpoConfig c;
  c.iterations = 30;
  return c;
}

PpoConfig hlc_desk_config() {
  PpoConfig c = hlc_ppo_config();
  c.hidden = {32, 32};
  c.train_batch = 2000;
  c.minibatch = 64;
  return c;
}

PpoConfig hlc_corridor_desk_config() {
  PpoConfig c = hlc_desk_config();
  c.train_batch = 64;
  return c;
}

std::array<std::uint64_t, 3> policy_checksums(const HsaPolicies& policies) {
  std::array<std::uint64_t, 3> out{};
  for (int s = 0; s < 3; ++s) out[s] = checksum(policies.policy_for(static_cast<Strategy>(s)).params());
  return out;
}

PolicyParams train_option_policy(const EnvFactory& factory, const PpoConfig& config,
                                 const IterationCallback& on_iteration) {
  return train_mode(factory, Strategy::kPac, config, on_iteration);
}

PolicyParams train_hlc(const HlcEnvConfig& env, const HsaPolicies& policies, const PpoConfig& config,
                       const IterationCallback& on_iteration) {
  const std::array<std::uint64_t, 3> before = policy_checksums(policies);
  env.check();
  EnvFactory factory = [&env, &policies](int) { return std::make_unique<HlcEnv>(env, policies); };
  PolicyParams params = train_option_policy(factory, config, on_iteration);
  if (policy_checksums(policies) != before) throw std::logic_error("frozen signal-agent weights changed");
  return params;
}

Strategy select_option(const Mlp& policy, const std::vector<double>& features, ActionMode mode,
                       std::mt19937_64& rng) {
  return option_of(select_action(policy, features, ActionMask(kNumOptions, 1), mode, rng).action);
}

HlcEpisode run_hlc_episode(const HlcEnvConfig& config, const HsaPolicies& policies, const Mlp& coordinator,
                           ActionMode mode, std::uint64_t seed) {
  HlcEnv env(config, policies);
  env.reset(seed);
  std::mt19937_64 rng(seed ^ 0xC2B2AE3D27D4EB4FULL);
  while (true) {
    const Strategy option = select_option(coordinator, env.observation(0), mode, rng);
    if (env.step({static_cast<int>(option)}).done) break;
  }
  return {env.decisions(), env.series()};
}

void HlcWeights::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kFormatVersion), sizeof(kFormatVersion));
  const double w[3] = {weights.queue, weights.stops, weights.speed};
  out.write(reinterpret_cast<const char*>(w), sizeof(w));
  params.write(out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

HlcWeights HlcWeights::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error(path + " is not a coordinator weight file");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kFormatVersion) throw std::runtime_error("unsupported coordinator weight file version");
  double w[3];
  in.read(reinterpret_cast<char*>(w), sizeof(w));
  if (!in) throw std::runtime_error("truncated coordinator weight file");
  HlcWeights out;
  out.weights = {w[0], w[1], w[2]};
  out.params = PolicyParams::read(in);
  if (out.params.policy.outputs() != kNumOptions) throw std::runtime_error("coordinator policy must have three outputs");
  return out;
}

}  // namespace corridor
