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

#include <cstdio>
#include <memory>
#include <random>
#include <stdexcept>

#include "corridor/hlc.h"
#include "doctest.h"
#include "support/sim_fixtures.h"

namespace corridor {
namespace {

HsaPolicies random_policies() {
  HsaPolicies p;
  for (int s = 0; s < 3; ++s) {
    p.by_strategy[s] = std::make_shared<const Mlp>(
        PolicyParams::create(Strategy(s), kObservationSize, kNumPhases, {8, 8}, 10 + s).policy);
  }
  return p;
}

HlcEnvConfig short_config() {
  HlcEnvConfig c;
  c.corridor = testing::small_corridor(2);
  const DemandRates low = testing::uniform_rates(2, 0.1, 0.02);
  const DemandRates high = testing::uniform_rates(2, 0.4, 0.08);
  c.levels = {low, testing::uniform_rates(2, 0.25, 0.05), high};
  c.schedule = {DemandLevel::kLow, DemandLevel::kHigh, DemandLevel::kMedium};
  c.warmup = 300.0;
  c.step = 600.0;
  c.measurement = 120.0;
  c.weights = HlcRewardWeights::group(2);
  return c;
}

TEST_CASE("reward is a signed weighted sum") {
  HlcRewardTerms t{100.0, 50.0, 12.0};
  CHECK(hlc_reward(t, HlcRewardWeights::group(2)) == doctest::Approx(19.5));
  HlcRewardTerms empty{0.0, 0.0, 15.0};
  CHECK(hlc_reward(empty, HlcRewardWeights::group(3)) == doctest::Approx(15.0));
  CHECK(hlc_reward(t, HlcRewardWeights{0.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("reward is linear in its weights") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 50; ++k) {
    const HlcRewardTerms t{100.0 * u(rng), 10.0 * u(rng), u(rng)};
    const HlcRewardWeights a{u(rng), u(rng), u(rng)};
    const HlcRewardWeights b{u(rng), u(rng), u(rng)};
    const HlcRewardWeights sum{a.queue + b.queue, a.stops + b.stops, a.speed + b.speed};
    CHECK(hlc_reward(t, sum) == doctest::Approx(hlc_reward(t, a) + hlc_reward(t, b)));
  }
}

TEST_CASE("weight groups") {
  const HlcRewardWeights g1 = HlcRewardWeights::group(1);
  CHECK(g1.queue == -1.0);
  CHECK(g1.stops == -0.1);
  CHECK(g1.speed == 50.0);
  const HlcRewardWeights g3 = HlcRewardWeights::group(3);
  CHECK(g3.stops == -0.005);
  CHECK(g3.speed == 1.0);
  CHECK_THROWS_AS(HlcRewardWeights::group(4), std::invalid_argument);
}

TEST_CASE("observation means queues over the window") {
  SimCounters w;
  CHECK(hlc_observe(w, 6, 0.5).inbound_queue == std::vector<double>(6, 0.0));
  w.steps = 10;
  w.movement_queue_sum.assign(6, {});
  for (auto& m : w.movement_queue_sum) m[index_of(Movement::kInboundThrough)] = 40.0;
  const HlcObservation o = hlc_observe(w, 6, 1.2);
  CHECK(o.inbound_queue == std::vector<double>(6, 4.0));
  CHECK(o.outbound_queue == std::vector<double>(6, 0.0));
  CHECK(o.demand == 1.2);
}

TEST_CASE("option selection") {
  Mlp flat({3, 4, 3}, 1, 0.0);
  std::mt19937_64 rng(1);
  const std::vector<double> probs = masked_policy(flat.forward({0.1, 0.2, 0.3}), {1, 1, 1});
  for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK(choose({0.2, 0.5, 0.3}, ActionMode::kArgmax, rng).action == static_cast<int>(Strategy::kMfc));
}

TEST_CASE("options persist and measurement runs under PAC") {
  const HlcEnvConfig config = short_config();
  HlcEnv env(config, random_policies());
  std::vector<LowLevelStep> steps;
  env.set_step_observer([&](const LowLevelStep& s) { steps.push_back(s); });
  env.reset(3);
  const std::vector<Strategy> picks{Strategy::kMfc, Strategy::kGwc, Strategy::kPac};
  EnvStep last;
  for (Strategy s : picks) last = env.step({static_cast<int>(s)});
  CHECK(last.done);
  REQUIRE(env.decisions().size() == 3);

  int measured = 0;
  int controlled = 0;
  for (const LowLevelStep& s : steps) {
    if (s.measuring) {
      ++measured;
      for (const StrategyAssignment& a : s.assignments) CHECK(a.strategy == Strategy::kPac);
      for (const ActionMask& m : s.masks) CHECK(m == ActionMask(kNumPhases, 1));
      continue;
    }
    if (s.time < config.warmup) continue;
    const int k = static_cast<int>((s.time - config.warmup) / config.step);
    REQUIRE(k < 3);
    ++controlled;
    for (const StrategyAssignment& a : s.assignments) CHECK(a.strategy == picks[k]);
  }
  const double dt = config.sim.step;
  CHECK(measured == static_cast<int>(3 * config.measurement / dt));
  CHECK(controlled == static_cast<int>(3 * (config.step - config.measurement) / dt));
}

TEST_CASE("corridor-length episodes hold sixteen decisions") {
  HlcEnvConfig c = short_config();
  c.step = 3600.0;
  c.warmup = 1200.0;
  c.schedule.assign(16, DemandLevel::kLow);
  CHECK(c.episode() == 58800.0);
  CHECK(static_cast<int>(c.step / c.sim.step) == 1200);
}

TEST_CASE("zero learning rate keeps the coordinator and the signal agents") {
  const HlcEnvConfig config = short_config();
  const HsaPolicies policies = random_policies();
  const auto before = policy_checksums(policies);
  PpoConfig c = hlc_desk_config();
  c.iterations = 1;
  c.train_batch = 3;
  c.minibatch = 3;
  c.epochs = 1;
  c.lr_schedule = {{0.0, 0.0}};
  const PolicyParams init = PolicyParams::create(Strategy::kPac, hlc_observation_size(2), kNumOptions, c.hidden, c.seed);
  int transitions = 0;
  const PolicyParams p = train_hlc(config, policies, c, [&](const IterationLog& log, const PolicyParams&) {
    transitions = static_cast<int>(log.env_steps);
    CHECK(log.episodes == 1);
  });
  CHECK(transitions == 3);
  CHECK(p.policy.params() == init.policy.params());
  CHECK(policy_checksums(policies) == before);
}

TEST_CASE("missing signal agents are a startup error") {
  HsaPolicies p = random_policies();
  p.by_strategy[2].reset();
  CHECK_THROWS(train_hlc(short_config(), p, hlc_desk_config()));
}

TEST_CASE("a coordinator learns a dominant option") {
  PpoConfig c = hlc_desk_config();
  c.iterations = 30;
  const std::array<Strategy, 3> dominant{Strategy::kMfc, Strategy::kMfc, Strategy::kMfc};
  const PolicyParams p =
      train_option_policy([&](int) { return std::make_unique<OptionBanditEnv>(dominant); }, c);
  std::mt19937_64 rng(0);
  for (int level = 0; level < 3; ++level) {
    const auto obs = OptionBanditEnv::level_observation(DemandLevel(level), 6);
    CHECK(select_option(p.policy, obs, ActionMode::kArgmax, rng) == Strategy::kMfc);
  }
}

TEST_CASE("coordinator weights round trip") {
  HlcWeights w{PolicyParams::create(Strategy::kPac, 13, 3, {8, 8}, 2), HlcRewardWeights::group(1)};
  const std::string path = "hlc_roundtrip_test.bin";
  w.save(path);
  const HlcWeights back = HlcWeights::load(path);
  std::remove(path.c_str());
  CHECK(back.params.policy.params() == w.params.policy.params());
  CHECK(back.weights.stops == -0.1);
  CHECK(back.weights.speed == 50.0);
}

TEST_CASE("decision log rows") {
  CHECK(decision_csv_header().back() == '\n');
  CHECK(series_csv_header().back() == '\n');
}

}  // namespace
}  // namespace corridor
