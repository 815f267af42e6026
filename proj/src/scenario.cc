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

#include "corridor/scenario.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace corridor {
namespace {

using nlohmann::json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ScenarioError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ScenarioError(where(key) + ": expected a number");
    out = v.get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ScenarioError(where(key) + ": expected an integer");
    out = v.get<int>();
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ScenarioError(where(it.key()) + ": unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_cross_turns(const json& obj, const std::string& path, CrossTurnShares& out) {
  Fields f(obj, path);
  f.number("through", out.through);
  f.number("left", out.left);
  f.number("right", out.right);
  f.finish();
}

// Every intersection field except the id, which follows the position.
void read_intersection(const json& obj, const std::string& path, IntersectionSpec& s) {
  Fields f(obj, path);
  f.number("link_length", s.link_length);
  f.integer("lanes_coordinated", s.lanes_coordinated);
  f.number("free_flow_tt", s.free_flow_tt);
  f.number("turn_ratio", s.turn_ratio);
  f.number("outbound_turn_ratio", s.outbound_turn_ratio);
  f.number("left_share", s.left_share);
  f.number("sat_flow", s.sat_flow);
  f.number("stop_headway", s.stop_headway);
  f.number("green_min", s.green_min);
  f.number("green_max", s.green_max);
  f.number("branch_min", s.branch_min);
  f.number("branch_max", s.branch_max);
  f.number("offset_min", s.offset_min);
  f.number("offset_max", s.offset_max);
  f.integer("cross_lanes", s.cross_lanes);
  if (f.has("cross_turns")) read_cross_turns(f.at("cross_turns"), f.where("cross_turns"), s.cross_turns);
  f.finish();
}

CorridorSpec read_corridor(const json& obj) {
  Fields f(obj, "corridor");
  CorridorSpec spec;
  f.number("cycle_min", spec.cycle_min);
  f.number("cycle_max", spec.cycle_max);
  f.integer("horizon_cycles", spec.horizon_cycles);
  f.number("entry_inflow", spec.entry_inflow);
  f.number("cross_link_length", spec.cross_link_length);
  f.number("cross_free_flow_tt", spec.cross_free_flow_tt);

  IntersectionSpec defaults;
  if (f.has("defaults")) read_intersection(f.at("defaults"), "corridor.defaults", defaults);

  int count = -1;
  f.integer("count", count);
  const json* overrides = nullptr;
  if (f.has("intersections")) {
    overrides = &f.at("intersections");
    if (!overrides->is_array()) throw ScenarioError("corridor.intersections: expected an array");
    const int listed = static_cast<int>(overrides->size());
    if (count >= 0 && count != listed) throw ScenarioError("corridor.count: disagrees with corridor.intersections");
    count = listed;
  }
  if (count < 1) throw ScenarioError("corridor: give \"count\" or a non-empty \"intersections\" list");
  for (int i = 0; i < count; ++i) {
    IntersectionSpec s = defaults;
    s.id = i + 1;
    if (overrides) read_intersection((*overrides)[i], "corridor.intersections[" + std::to_string(i) + "]", s);
    spec.intersections.push_back(s);
  }
  f.finish();

  const std::vector<ValidationError> errors = validate(spec);
  if (!errors.empty()) throw ScenarioError("corridor: " + format_errors(errors));
  return spec;
}

PhaseTable read_phases(const json& v) {
  if (!v.is_array() || v.size() != kNumPhases) throw ScenarioError("phases: expected a list of 8 phases");
  PhaseTable table;
  for (int p = 0; p < kNumPhases; ++p) {
    const json& list = v[p];
    const std::string where = "phases[" + std::to_string(p) + "]";
    if (!list.is_array() || list.empty()) throw ScenarioError(where + ": expected a non-empty list of movements");
    for (const json& name : list) {
      if (!name.is_string()) throw ScenarioError(where + ": movement names must be strings");
      const auto m = parse_movement(name.get<std::string>());
      if (!m) throw ScenarioError(where + ": unknown movement '" + name.get<std::string>() + "'");
      table.phases[p].movements.set(index_of(*m));
    }
  }
  table.refresh_conflict_flags();
  if (!table.covers_all_movements()) throw ScenarioError("phases: some movement is never served");
  return table;
}

std::array<double, 2> read_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ScenarioError(where + ": expected [inbound_cross, outbound_cross]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

DemandRates read_rates(const json& obj, const std::string& path, int n) {
  Fields f(obj, path);
  DemandRates r;
  f.number("inbound_entry", r.inbound_entry);
  f.number("outbound_entry", r.outbound_entry);
  const bool each = f.has("cross_each");
  const bool listed = f.has("cross");
  if (each && listed) throw ScenarioError(path + ": give either cross or cross_each");
  if (each) {
    r.cross.assign(n, read_pair(f.at("cross_each"), f.where("cross_each")));
  } else if (listed) {
    const json& v = f.at("cross");
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
      throw ScenarioError(f.where("cross") + ": expected one pair per intersection");
    }
    for (int i = 0; i < n; ++i) r.cross.push_back(read_pair(v[i], f.where("cross") + "[" + std::to_string(i) + "]"));
  } else {
    r.cross.assign(n, {0.0, 0.0});
  }
  f.finish();
  auto bad = [](double x) { return !(x >= 0.0) || !std::isfinite(x); };
  bool invalid = bad(r.inbound_entry) || bad(r.outbound_entry);
  for (const auto& c : r.cross) invalid = invalid || bad(c[0]) || bad(c[1]);
  if (invalid) throw ScenarioError(path + ": arrival rates must be finite and non-negative");
  return r;
}

void read_demand(const json& obj, Scenario& sc) {
  Fields f(obj, "demand");
  const int n = sc.corridor.size();
  if (f.has("levels")) {
    Fields levels(f.at("levels"), "demand.levels");
    for (int l = 0; l < 3; ++l) {
      const std::string name(demand_level_name(static_cast<DemandLevel>(l)));
      if (levels.has(name)) sc.levels[l] = read_rates(levels.at(name), "demand.levels." + name, n);
    }
    levels.finish();
  }
  if (f.has("schedule")) {
    const json& v = f.at("schedule");
    if (!v.is_array()) throw ScenarioError("demand.schedule: expected a list of level names");
    for (const json& name : v) {
      const auto level = name.is_string() ? parse_demand_level(name.get<std::string>()) : std::nullopt;
      if (!level) throw ScenarioError("demand.schedule: unknown level " + name.dump());
      sc.schedule.push_back(*level);
    }
  }
  f.finish();
}

void read_sim(const json& obj, SimOptions& sim) {
  Fields f(obj, "sim");
  f.number("step", sim.step);
  f.number("kappa", sim.kappa);
  f.number("max_arrival_rate", sim.max_arrival_rate);
  f.number("feature_window", sim.feature_window);
  f.finish();
  if (!(sim.step > 0.0)) throw ScenarioError("sim.step: must be positive");
  if (!(sim.kappa >= 0.0)) throw ScenarioError("sim.kappa: must be non-negative");
  if (!(sim.max_arrival_rate > 0.0)) throw ScenarioError("sim.max_arrival_rate: must be positive");
  if (!(sim.feature_window >= sim.step)) throw ScenarioError("sim.feature_window: must cover at least one step");
}

ActionMode read_mode(const json& v, const std::string& where) {
  const std::string name = v.is_string() ? v.get<std::string>() : "";
  if (name == "sample") return ActionMode::kSample;
  if (name == "argmax") return ActionMode::kArgmax;
  throw ScenarioError(where + ": expected \"sample\" or \"argmax\"");
}

HlcRewardWeights read_weights(const json& v) {
  if (v.is_number_integer()) {
    try {
      return HlcRewardWeights::group(v.get<int>());
    } catch (const std::exception& e) {
      throw ScenarioError(std::string("hlc.weights: ") + e.what());
    }
  }
  if (v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() && v[2].is_number()) {
    HlcRewardWeights w;
    w.queue = v[0].get<double>();
    w.stops = v[1].get<double>();
    w.speed = v[2].get<double>();
    return w;
  }
  throw ScenarioError("hlc.weights: expected a group tag 1-3 or [queue, stops, speed]");
}

json ppo_overrides(const json& v, const std::string& where) {
  if (!v.is_object()) throw ScenarioError(where + ": expected an object");
  PpoConfig probe;
  try {
    apply_ppo_overrides(probe, v);
  } catch (const ScenarioError& e) {
    throw ScenarioError(where + "." + e.what());
  }
  return v;
}

}  // namespace

void apply_ppo_overrides(PpoConfig& c, const json& overrides) {
  Fields f(overrides, "");
  f.number("clip", c.clip);
  f.number("gamma", c.gamma);
  f.number("kl_coeff", c.kl_coeff);
  f.number("value_clip", c.value_clip);
  f.number("entropy_coeff", c.entropy_coeff);
  f.number("value_coeff", c.value_coeff);
  f.integer("epochs", c.epochs);
  f.integer("train_batch", c.train_batch);
  f.integer("minibatch", c.minibatch);
  f.integer("iterations", c.iterations);
  f.number("divergence_limit", c.divergence_limit);
  if (f.has("standardize_advantages")) {
    const json& v = f.at("standardize_advantages");
    if (!v.is_boolean()) throw ScenarioError("standardize_advantages: expected true or false");
    c.standardize_advantages = v.get<bool>();
  }
  if (f.has("hidden")) {
    const json& v = f.at("hidden");
    if (!v.is_array() || v.empty()) throw ScenarioError("hidden: expected a list of layer widths");
    c.hidden.clear();
    for (const json& w : v) {
      if (!w.is_number_integer() || w.get<int>() < 1) throw ScenarioError("hidden: widths must be positive integers");
      c.hidden.push_back(w.get<int>());
    }
  }
  if (f.has("lr_schedule")) {
    const json& v = f.at("lr_schedule");
    if (!v.is_array() || v.empty()) throw ScenarioError("lr_schedule: expected [[steps, lr], ...]");
    c.lr_schedule.clear();
    for (const json& p : v) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw ScenarioError("lr_schedule: expected [[steps, lr], ...]");
      }
      c.lr_schedule.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  }
  f.finish();
  try {
    c.check();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("ppo: ") + e.what());
  }
}

json corridor_to_json(const CorridorSpec& spec) {
  json list = json::array();
  for (const IntersectionSpec& s : spec.intersections) {
    list.push_back({{"link_length", s.link_length},
                    {"lanes_coordinated", s.lanes_coordinated},
                    {"free_flow_tt", s.free_flow_tt},
                    {"turn_ratio", s.turn_ratio},
                    {"outbound_turn_ratio", s.outbound_turn_ratio},
                    {"left_share", s.left_share},
                    {"sat_flow", s.sat_flow},
                    {"stop_headway", s.stop_headway},
                    {"green_min", s.green_min},
                    {"green_max", s.green_max},
                    {"branch_min", s.branch_min},
                    {"branch_max", s.branch_max},
                    {"offset_min", s.offset_min},
                    {"offset_max", s.offset_max},
                    {"cross_lanes", s.cross_lanes},
                    {"cross_turns",
                     {{"through", s.cross_turns.through}, {"left", s.cross_turns.left}, {"right", s.cross_turns.right}}}});
  }
  return {{"cycle_min", spec.cycle_min},
          {"cycle_max", spec.cycle_max},
          {"horizon_cycles", spec.horizon_cycles},
          {"entry_inflow", spec.entry_inflow},
          {"cross_link_length", spec.cross_link_length},
          {"cross_free_flow_tt", spec.cross_free_flow_tt},
          {"intersections", list}};
}

CorridorSpec corridor_from_json(const json& doc) { return read_corridor(doc); }

json ppo_config_json(const PpoConfig& c) {
  json lr = json::array();
  for (const LrPoint& p : c.lr_schedule) lr.push_back({p.step, p.lr});
  return {{"clip", c.clip},
          {"gamma", c.gamma},
          {"kl_coeff", c.kl_coeff},
          {"value_clip", c.value_clip},
          {"entropy_coeff", c.entropy_coeff},
          {"value_coeff", c.value_coeff},
          {"epochs", c.epochs},
          {"train_batch", c.train_batch},
          {"minibatch", c.minibatch},
          {"iterations", c.iterations},
          {"lr_schedule", lr},
          {"hidden", c.hidden},
          {"standardize_advantages", c.standardize_advantages},
          {"divergence_limit", c.divergence_limit}};
}

Scenario parse_scenario(const json& doc) {
  Fields f(doc, "");
  Scenario sc;
  if (!f.has("corridor")) throw ScenarioError("corridor: missing");
  sc.corridor = read_corridor(f.at("corridor"));
  const int n = sc.corridor.size();
  for (DemandRates& r : sc.levels) r.cross.assign(n, {0.0, 0.0});
  if (f.has("phases")) sc.phases = read_phases(f.at("phases"));
  if (f.has("demand")) read_demand(f.at("demand"), sc);
  if (f.has("sim")) read_sim(f.at("sim"), sc.sim);
  if (f.has("episode")) {
    Fields e(f.at("episode"), "episode");
    e.number("duration", sc.episode);
    e.number("warmup", sc.warmup);
    e.finish();
    if (!(sc.warmup >= 0.0 && sc.episode > sc.warmup)) throw ScenarioError("episode: duration must outlast the warm-up");
  }
  if (f.has("hsa")) {
    Fields h(f.at("hsa"), "hsa");
    h.number("reward_scale", sc.hsa_reward_scale);
    if (h.has("evaluation_mode")) sc.evaluation_mode = read_mode(h.at("evaluation_mode"), "hsa.evaluation_mode");
    h.finish();
    if (!(sc.hsa_reward_scale > 0.0)) throw ScenarioError("hsa.reward_scale: must be positive");
  }
  if (f.has("hlc")) {
    Fields h(f.at("hlc"), "hlc");
    if (h.has("weights")) sc.hlc_weights = read_weights(h.at("weights"));
    h.number("reward_scale", sc.hlc_reward_scale);
    h.number("warmup", sc.hlc_warmup);
    h.number("step", sc.hlc_step);
    h.number("measurement", sc.hlc_measurement);
    h.finish();
    if (!(sc.hlc_reward_scale > 0.0)) throw ScenarioError("hlc.reward_scale: must be positive");
    if (!(sc.hlc_warmup >= 0.0)) throw ScenarioError("hlc.warmup: must be non-negative");
    if (!(sc.hlc_measurement > 0.0 && sc.hlc_step > sc.hlc_measurement)) {
      throw ScenarioError("hlc.step: must outlast the measurement phase");
    }
  }
  if (f.has("ppo")) sc.ppo = ppo_overrides(f.at("ppo"), "ppo");
  if (f.has("hlc_ppo")) sc.hlc_ppo = ppo_overrides(f.at("hlc_ppo"), "hlc_ppo");
  f.finish();
  return sc;
}

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("not valid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_text(text.str());
}

CorridorEnvConfig Scenario::env_config(Strategy strategy) const {
  CorridorEnvConfig c;
  c.corridor = corridor;
  c.phases = phases;
  c.levels = levels;
  c.sim = sim;
  c.episode = episode;
  c.warmup = warmup;
  c.strategy = strategy;
  c.reward_scale = hsa_reward_scale;
  return c;
}

HlcEnvConfig Scenario::hlc_config() const {
  if (schedule.empty()) throw ScenarioError("demand.schedule: needed for the coordinator");
  HlcEnvConfig c;
  c.corridor = corridor;
  c.phases = phases;
  c.levels = levels;
  c.schedule = schedule;
  c.sim = sim;
  c.warmup = hlc_warmup;
  c.step = hlc_step;
  c.measurement = hlc_measurement;
  c.weights = hlc_weights;
  c.reward_scale = hlc_reward_scale;
  c.agent_mode = evaluation_mode;
  return c;
}

PpoConfig Scenario::hsa_ppo_config(bool desk) const {
  PpoConfig c = desk ? PpoConfig::desk() : PpoConfig{};
  apply_ppo_overrides(c, ppo);
  return c;
}

PpoConfig Scenario::hlc_ppo_config(bool desk) const {
  PpoConfig c = desk ? hlc_corridor_desk_config() : corridor::hlc_ppo_config();
  apply_ppo_overrides(c, hlc_ppo);
  return c;
}

}  // namespace corridor
