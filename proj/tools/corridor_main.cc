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

// corridor: simulate, optimize, train and evaluate from a scenario file.
//
// Exit codes: 0 success, 1 usage error, 2 infeasible optimization,
// 3 runtime error.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corridor/backpressure.h"
#include "corridor/corridor_env.h"
#include "corridor/gwc.h"
#include "corridor/hlc.h"
#include "corridor/mfc.h"
#include "corridor/plan.h"
#include "corridor/ppo.h"
#include "corridor/scenario.h"

namespace fs = std::filesystem;
using namespace corridor;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitRuntime = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string out = ".";
  bool desk = false;
  int parallel = 1;
  bool print_config = false;
};

struct Args {
  Common common;
  std::string strategy = "bp";
  std::string policy;
  std::string plan;
  std::string level = "medium";
  bool measure = false;
  std::string mode = "pac";
  int iterations = -1;
  std::string hidden;
  std::string hsa_dir;
  std::string hlc;
  int group = 0;
  std::string option_mode = "argmax";
  double series_bin = 300.0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--scenario", c.scenario, "Scenario JSON file")->required();
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_flag("--desk", c.desk, "Small networks and batches");
  sub->add_option("--parallel", c.parallel, "Parallel rollout workers")->check(CLI::PositiveNumber);
  sub->add_flag("--print-config", c.print_config, "Print the effective configuration and exit");
}

DemandLevel level_arg(const std::string& name) {
  const auto level = parse_demand_level(name);
  if (!level) throw UsageError("unknown demand level '" + name + "' (low, medium or high)");
  return *level;
}

Strategy mode_arg(const std::string& name) {
  const auto s = parse_strategy(name);
  if (!s) throw UsageError("unknown mode '" + name + "' (pac, mfc or gwc)");
  return *s;
}

std::vector<int> hidden_arg(const std::string& text) {
  std::vector<int> widths;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const int w = std::stoi(item, &used);
      if (used != item.size() || w < 1) throw std::invalid_argument(item);
      widths.push_back(w);
    } catch (const std::exception&) {
      throw UsageError("--hidden expects positive widths such as 32,32");
    }
  }
  if (widths.empty()) throw UsageError("--hidden expects positive widths such as 32,32");
  return widths;
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path);
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

nlohmann::json weights_json(const HlcRewardWeights& w) { return {w.queue, w.stops, w.speed}; }

nlohmann::json scenario_json(const Scenario& sc) {
  return {{"intersections", sc.corridor.size()},
          {"episode", {{"duration", sc.episode}, {"warmup", sc.warmup}}},
          {"sim",
           {{"step", sc.sim.step},
            {"kappa", sc.sim.kappa},
            {"max_arrival_rate", sc.sim.max_arrival_rate},
            {"feature_window", sc.sim.feature_window}}},
          {"hsa",
           {{"reward_scale", sc.hsa_reward_scale},
            {"evaluation_mode", sc.evaluation_mode == ActionMode::kSample ? "sample" : "argmax"}}},
          {"hlc",
           {{"weights", weights_json(sc.hlc_weights)},
            {"reward_scale", sc.hlc_reward_scale},
            {"warmup", sc.hlc_warmup},
            {"step", sc.hlc_step},
            {"measurement", sc.hlc_measurement},
            {"schedule_steps", sc.schedule.size()}}}};
}

void print_config(nlohmann::json config) { std::cout << config.dump(2) << "\n"; }

// Headers and rows carry their own line endings.
std::string csv(const std::string& header, const std::vector<std::string>& rows) {
  std::string text = header;
  for (const std::string& r : rows) text += r;
  return text;
}

std::string metrics_file(const EpisodeMetrics& m) { return csv(metrics_csv_header(), {metrics_csv_row(m)}); }

std::string trajectory_file(const std::vector<TrajectoryEvent>& events) {
  std::string text = trajectory_csv_header();
  for (const TrajectoryEvent& e : events) text += trajectory_csv_row(e);
  return text;
}

PolicyParams load_policy(const std::string& path, Strategy expected) {
  require_file(path, "policy file");
  PolicyParams p = PolicyParams::load(path);
  if (p.mode != expected) {
    throw UsageError(path + " holds a " + std::string(strategy_name(p.mode)) + " policy, not " +
                     std::string(strategy_name(expected)));
  }
  return p;
}

std::string lower_name(Strategy s) {
  std::string name(strategy_name(s));
  for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return name;
}

std::string hsa_file(Strategy s) { return "hsa_" + lower_name(s) + ".bin"; }

HsaPolicies load_hsa_policies(const fs::path& dir) {
  HsaPolicies policies;
  for (int s = 0; s < 3; ++s) {
    const Strategy strategy = static_cast<Strategy>(s);
    const PolicyParams p = load_policy((dir / hsa_file(strategy)).string(), strategy);
    policies.by_strategy[s] = std::make_shared<const Mlp>(p.policy);
  }
  return policies;
}

// Max pressure restricted to the phases a fixed plan allows.
EpisodeResult run_fixed_plan(const Scenario& sc, DemandLevel level, SignalPlan plan, std::uint64_t seed) {
  SimOptions options = sc.sim;
  options.record_trajectories = true;
  Simulator sim(sc.corridor, sc.phases,
                DemandProfile::constant(sc.levels[static_cast<int>(level)], level, sc.episode, seed), options);
  sim.reset(seed);
  while (sim.clock() < sc.warmup - 1e-9) sim.step(backpressure_actions(sim));
  plan.epoch = sim.clock();
  StrategyAssignment assignment;
  assignment.strategy = plan.strategy;
  assignment.plan = std::make_shared<const SignalPlan>(std::move(plan));
  assignment.check();
  const SimCounters start = sim.counters();
  std::vector<int> actions(sim.size());
  while (sim.clock() < sc.episode - 1e-9) {
    for (int i = 0; i < sim.size(); ++i) {
      const ActionMask mask = feasible_phases(i, sim.clock(), assignment, sc.phases);
      std::array<double, kNumPhases> pressure = phase_pressures(sim, i);
      for (int p = 0; p < kNumPhases; ++p) {
        if (!mask[p]) pressure[p] = -std::numeric_limits<double>::infinity();
      }
      actions[i] = max_pressure_phase(pressure);
    }
    sim.step(actions);
  }
  return {metrics_from(sim.counters() - start), sim.trajectory()};
}

int cmd_simulate(const Args& a) {
  const Scenario sc = load_scenario(a.common.scenario);
  if (a.common.print_config) {
    print_config(scenario_json(sc));
    return 0;
  }
  const DemandLevel level = level_arg(a.level);
  EpisodeResult result;
  if (a.strategy == "fixed-plan") {
    if (a.plan.empty()) throw UsageError("fixed-plan needs --plan");
    require_file(a.plan, "plan file");
    std::ifstream in(a.plan);
    std::ostringstream text;
    text << in.rdbuf();
    result = run_fixed_plan(sc, level, plan_from_json(text.str()), a.common.seed);
  } else if (a.strategy == "bp") {
    CorridorEnvConfig config = sc.env_config(Strategy::kPac);
    config.sim.record_trajectories = true;
    result = run_episode(config, level, EpisodeController{}, a.common.seed);
  } else {
    const Strategy strategy = mode_arg(a.strategy);
    if (a.policy.empty()) throw UsageError(a.strategy + " needs --policy");
    const PolicyParams params = load_policy(a.policy, strategy);
    CorridorEnvConfig config = sc.env_config(strategy);
    config.sim.record_trajectories = true;
    result = run_episode(config, level, EpisodeController{&params.policy, sc.evaluation_mode}, a.common.seed);
  }
  const fs::path dir = out_dir(a.common);
  write_text(dir / "metrics.csv", metrics_file(result.metrics));
  write_text(dir / "trajectory.csv", trajectory_file(result.trajectory));
  std::cout << metrics_file(result.metrics);
  return 0;
}

int cmd_optimize(const Args& a, Strategy strategy) {
  const Scenario sc = load_scenario(a.common.scenario);
  if (a.common.print_config) {
    print_config(scenario_json(sc));
    return 0;
  }
  // Optimizer inputs: static scenario values, or measured during a
  // max-pressure warm-up at --level.
  std::unique_ptr<CorridorEnv> env;
  if (a.measure) {
    env = std::make_unique<CorridorEnv>(sc.env_config(Strategy::kPac));
    env->force_level(level_arg(a.level));
    env->reset(a.common.seed);
  }
  SignalPlan plan;
  try {
    if (strategy == Strategy::kMfc) {
      const MfcInput in = env ? measure_mfc_input(env->simulator(), env->simulator().counters(), sc.warmup)
                              : MfcInput::from_spec(sc.corridor);
      plan = build_mfc_plan(solve_mfc(in), 0.0);
    } else {
      const GwcInput in = env ? measure_gwc_input(env->simulator(), env->simulator().counters(), sc.warmup)
                              : GwcInput::from_spec(sc.corridor);
      const GwcSolution sol = optimize_gwc(in);
      if (sol.fallback) {
        std::cerr << "error: green-wave program infeasible for these inputs\n";
        return kExitInfeasible;
      }
      plan = gwc_plan(sol, 0.0);
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.intersection() > 0) {
      std::cerr << "binding intersection " << e.intersection() << ", cycle " << e.cycle() << "\n";
    }
    return kExitInfeasible;
  }
  const fs::path dir = out_dir(a.common);
  write_text(dir / "plan.json", plan_to_json(plan));
  write_text(dir / "plan.txt", plan_summary(plan));
  std::cout << plan_summary(plan);
  return 0;
}

PpoConfig with_overrides(PpoConfig config, const Args& a) {
  if (a.iterations >= 0) config.iterations = a.iterations;
  if (!a.hidden.empty()) config.hidden = hidden_arg(a.hidden);
  config.seed = a.common.seed;
  config.parallel = a.common.parallel;
  config.check();
  return config;
}

IterationCallback log_to(std::ofstream& log) {
  return [&log](const IterationLog& row, const PolicyParams&) {
    log << training_log_row(row) << std::flush;
    std::cerr << "iteration " << row.iteration << " mean reward " << row.mean_reward << "\n";
  };
}

int cmd_train_hsa(const Args& a) {
  const Scenario sc = load_scenario(a.common.scenario);
  const Strategy strategy = mode_arg(a.mode);
  const PpoConfig config = with_overrides(sc.hsa_ppo_config(a.common.desk), a);
  if (a.common.print_config) {
    print_config({{"mode", strategy_name(strategy)}, {"ppo", ppo_config_json(config)}, {"scenario", scenario_json(sc)}});
    return 0;
  }
  const CorridorEnvConfig env = sc.env_config(strategy);
  env.check();
  const fs::path dir = out_dir(a.common);
  std::ofstream log(dir / ("training_" + lower_name(strategy) + ".csv"));
  log << training_log_header();
  const EnvFactory factory = [&env](int) { return std::make_unique<CorridorEnv>(env); };
  const PolicyParams params = train_mode(factory, strategy, config, log_to(log));
  params.save((dir / hsa_file(strategy)).string());
  return 0;
}

HlcRewardWeights weights_arg(const Args& a, const HlcRewardWeights& fallback) {
  if (a.group == 0) return fallback;
  try {
    return HlcRewardWeights::group(a.group);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--group: ") + e.what());
  }
}

int cmd_train_hlc(const Args& a) {
  const Scenario sc = load_scenario(a.common.scenario);
  HlcEnvConfig env = sc.hlc_config();
  env.weights = weights_arg(a, sc.hlc_weights);
  const PpoConfig config = with_overrides(sc.hlc_ppo_config(a.common.desk), a);
  if (a.common.print_config) {
    print_config({{"ppo", ppo_config_json(config)}, {"weights", weights_json(env.weights)}, {"scenario", scenario_json(sc)}});
    return 0;
  }
  env.check();
  const fs::path dir = out_dir(a.common);
  const HsaPolicies policies = load_hsa_policies(a.hsa_dir.empty() ? dir : fs::path(a.hsa_dir));
  std::ofstream log(dir / "training_hlc.csv");
  log << training_log_header();
  HlcWeights weights;
  weights.params = train_hlc(env, policies, config, log_to(log));
  weights.weights = env.weights;
  weights.save((dir / "hlc.bin").string());
  return 0;
}

int cmd_evaluate(const Args& a) {
  const Scenario sc = load_scenario(a.common.scenario);
  HlcEnvConfig env = sc.hlc_config();
  if (a.common.print_config) {
    print_config({{"weights", weights_json(weights_arg(a, sc.hlc_weights))}, {"scenario", scenario_json(sc)}});
    return 0;
  }
  if (!(a.series_bin > 0.0)) throw UsageError("--series-bin must be positive");
  ActionMode mode = ActionMode::kArgmax;
  if (a.option_mode == "sample") {
    mode = ActionMode::kSample;
  } else if (a.option_mode != "argmax") {
    throw UsageError("--option-mode expects sample or argmax");
  }
  const fs::path dir = out_dir(a.common);
  const std::string hlc_path = a.hlc.empty() ? (dir / "hlc.bin").string() : a.hlc;
  require_file(hlc_path, "coordinator weights");
  const HlcWeights coordinator = HlcWeights::load(hlc_path);
  const HsaPolicies policies = load_hsa_policies(a.hsa_dir.empty() ? dir : fs::path(a.hsa_dir));
  env.weights = weights_arg(a, coordinator.weights);
  env.series_bin = a.series_bin;
  env.check();
  const HlcEpisode episode = run_hlc_episode(env, policies, coordinator.params.policy, mode, a.common.seed);
  std::vector<std::string> rows;
  for (const HlcDecision& d : episode.decisions) rows.push_back(decision_csv_row(d));
  write_text(dir / "decisions.csv", csv(decision_csv_header(), rows));
  rows.clear();
  for (const SeriesPoint& p : episode.series) rows.push_back(series_csv_row(p));
  write_text(dir / "series.csv", csv(series_csv_header(), rows));
  for (const HlcDecision& d : episode.decisions) {
    std::cout << d.index << " " << demand_level_name(d.level) << " " << strategy_name(d.option) << " " << d.reward
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corridor signal coordination: simulate, optimize, train and evaluate"};
  app.require_subcommand(1);
  Args a;

  CLI::App* simulate = app.add_subcommand("simulate", "Run one episode and write metrics and trajectories");
  add_common(simulate, a.common);
  simulate->add_option("--strategy", a.strategy, "pac, mfc, gwc, bp or fixed-plan")
      ->check(CLI::IsMember({"pac", "mfc", "gwc", "bp", "fixed-plan"}));
  simulate->add_option("--policy", a.policy, "Signal-agent weights for pac, mfc or gwc");
  simulate->add_option("--plan", a.plan, "Plan file for fixed-plan");
  simulate->add_option("--level", a.level, "Demand level: low, medium or high");

  CLI::App* opt_mfc = app.add_subcommand("optimize-mfc", "Solve the max-flow program and write a plan");
  CLI::App* opt_gwc = app.add_subcommand("optimize-gwc", "Solve the green-wave program and write a plan");
  for (CLI::App* sub : {opt_mfc, opt_gwc}) {
    add_common(sub, a.common);
    sub->add_flag("--measure", a.measure, "Estimate inputs from a max-pressure warm-up");
    sub->add_option("--level", a.level, "Demand level of the warm-up");
  }

  CLI::App* train_hsa = app.add_subcommand("train-hsa", "Train the signal agents of one strategy");
  add_common(train_hsa, a.common);
  train_hsa->add_option("--mode", a.mode, "pac, mfc or gwc");

  CLI::App* train_hlc_cmd = app.add_subcommand("train-hlc", "Train the coordinator over frozen signal agents");
  add_common(train_hlc_cmd, a.common);
  train_hlc_cmd->add_option("--group", a.group, "Reward weight group 1, 2 or 3");

  for (CLI::App* sub : {train_hsa, train_hlc_cmd}) {
    sub->add_option("--iterations", a.iterations, "Training iterations")->check(CLI::NonNegativeNumber);
    sub->add_option("--hidden", a.hidden, "Hidden layer widths, e.g. 32,32");
  }

  CLI::App* evaluate = app.add_subcommand("evaluate", "Run the coordinator over the demand schedule");
  add_common(evaluate, a.common);
  evaluate->add_option("--hlc", a.hlc, "Coordinator weights (default OUT/hlc.bin)");
  evaluate->add_option("--group", a.group, "Reward weight group 1, 2 or 3 for the decision log");
  evaluate->add_option("--option-mode", a.option_mode, "Coordinator action mode: argmax or sample");
  evaluate->add_option("--series-bin", a.series_bin, "Time-series bin width (s)");

  for (CLI::App* sub : {train_hlc_cmd, evaluate}) {
    sub->add_option("--hsa-dir", a.hsa_dir, "Directory with hsa_pac.bin, hsa_mfc.bin, hsa_gwc.bin (default OUT)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(a);
    if (opt_mfc->parsed()) return cmd_optimize(a, Strategy::kMfc);
    if (opt_gwc->parsed()) return cmd_optimize(a, Strategy::kGwc);
    if (train_hsa->parsed()) return cmd_train_hsa(a);
    if (train_hlc_cmd->parsed()) return cmd_train_hlc(a);
    if (evaluate->parsed()) return cmd_evaluate(a);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ScenarioError& e) {
    std::cerr << "error: scenario: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
