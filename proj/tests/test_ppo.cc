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

#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <vector>

#include "corridor/ppo.h"
#include "doctest.h"
#include "support/fd_check.h"

namespace corridor {
namespace {

TEST_CASE("one-step advantages") {
  CHECK(advantage(1.0, 0.9, 2.0, 2.0, false) == doctest::Approx(0.8));
  CHECK(advantage(5.0, 0.9, 100.0, 3.0, true) == doctest::Approx(2.0));
  CHECK(advantage(19.5, 0.99, 0.0, 0.0, false) == doctest::Approx(19.5));
  CHECK(advantage(1.0, 0.5, 4.0, 3.0, false) == doctest::Approx(0.0));
}

TEST_CASE("default configuration matches the training table") {
  const PpoConfig c;
  CHECK(c.clip == 0.3);
  CHECK(c.gamma == 0.99);
  CHECK(c.kl_coeff == 0.2);
  CHECK(c.value_clip == 1000.0);
  CHECK(c.entropy_coeff == 0.005);
  CHECK(c.epochs == 20);
  CHECK(c.train_batch == 20000);
  CHECK(c.minibatch == 1024);
  CHECK(c.hidden == std::vector<int>{256, 128});
  CHECK(c.lr_at(0.0) == 5e-4);
  CHECK(c.lr_at(2e5) == doctest::Approx(1e-4));
  CHECK(c.lr_at(1e5) == doctest::Approx(3e-4));
  CHECK(c.lr_at(5e5) == doctest::Approx(1e-5));
  CHECK(c.lr_at(1e7) == doctest::Approx(1e-5));
  const PpoConfig d = PpoConfig::desk();
  CHECK(d.hidden == std::vector<int>{32, 32});
  CHECK(d.train_batch == 2000);
  CHECK(d.iterations == 50);
}

TEST_CASE("standardized advantages have zero mean and unit variance") {
  Transition t;
  std::vector<PolicySample> s{{&t, 1.0}, {&t, 2.0}, {&t, 6.0}};
  standardize(s);
  double mean = 0.0, var = 0.0;
  for (const auto& x : s) mean += x.advantage / 3.0;
  for (const auto& x : s) var += (x.advantage - mean) * (x.advantage - mean) / 3.0;
  CHECK(mean == doctest::Approx(0.0));
  CHECK(var == doctest::Approx(1.0));
  std::vector<PolicySample> flat{{&t, 4.0}, {&t, 4.0}};
  standardize(flat);
  CHECK(flat[0].advantage == 0.0);
}

Transition one_action(const Mlp& policy, const std::vector<double>& obs, int action, double ratio) {
  Transition t;
  t.obs = obs;
  t.mask = {1, 1};
  const std::vector<double> p = masked_policy(policy.forward(obs), t.mask);
  t.action = action;
  t.old_probs = p;
  t.log_prob = std::log(p[action] / ratio);
  return t;
}

TEST_CASE("surrogate clipping arithmetic") {
  PpoConfig c;
  c.kl_coeff = 0.0;
  c.entropy_coeff = 0.0;
  const Mlp policy({2, 4, 2}, 3, 1.0);
  const std::vector<double> obs{0.5, -0.2};
  {
    const Transition t = one_action(policy, obs, 0, 1.5);
    CHECK(surrogate_loss(policy, {{&t, 1.0}}, c).surrogate == doctest::Approx(1.3));
  }
  {
    const Transition t = one_action(policy, obs, 1, 0.5);
    CHECK(surrogate_loss(policy, {{&t, -1.0}}, c).surrogate == doctest::Approx(-0.7));
  }
  {
    const Transition t = one_action(policy, obs, 1, 1.0);
    const LossResult r = surrogate_loss(policy, {{&t, 2.5}}, c);
    CHECK(r.surrogate == doctest::Approx(2.5));
    CHECK(r.kl == doctest::Approx(0.0));
  }
}

TEST_CASE("value loss clips per sample") {
  PpoConfig c;
  Mlp value({1, 2, 1}, 1, 0.0);
  // A zero output layer makes V = 0 everywhere.
  for (double& p : value.params()) p = 0.0;
  std::vector<double> obs{1.0};
  CHECK(value_loss(value, {{&obs, 3.0}}, c).loss == doctest::Approx(9.0));
  CHECK(value_loss(value, {{&obs, 40.0}}, c).loss == doctest::Approx(1000.0));
  CHECK(value_loss(value, {{&obs, 0.0}}, c).loss == doctest::Approx(0.0));
}

TEST_CASE("loss gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const testing::FdErrors e = testing::fd_trial(seed);
    INFO("seed " << seed);
    CHECK(e.policy < 1e-4);
    CHECK(e.value < 1e-4);
  }
}

EnvFactory bandit_factory(int masked_arm = -1) {
  return [masked_arm](int) { return std::make_unique<BanditEnv>(masked_arm); };
}

PpoConfig small_bandit_config() {
  PpoConfig c = PpoConfig::desk();
  c.hidden = {16, 16};
  c.train_batch = 256;
  c.minibatch = 64;
  c.epochs = 4;
  return c;
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  PpoConfig c = small_bandit_config();
  c.iterations = 2;
  c.lr_schedule = {{0.0, 0.0}};
  const PolicyParams init = PolicyParams::create(Strategy::kPac, 4, 2, c.hidden, c.seed);
  PolicyParams p = init;
  train_params(bandit_factory(), p, c);
  CHECK(p.policy.params() == init.policy.params());
  CHECK(p.value.params() == init.value.params());
}

TEST_CASE("bandit is learned and masked arms never get mass") {
  PpoConfig c = small_bandit_config();
  c.iterations = 40;
  const PolicyParams p = train_mode(bandit_factory(), Strategy::kPac, c);
  for (int arm = 0; arm < 2; ++arm) {
    const std::vector<double> probs =
        masked_policy(p.policy.forward(BanditEnv::context_observation(arm, 4)), {1, 1});
    CHECK(probs[arm] > 0.9);
  }

  int checks = 0;
  train_mode(bandit_factory(0), Strategy::kPac, c, [&](const IterationLog&, const PolicyParams& params) {
    for (int arm = 0; arm < 2; ++arm) {
      const std::vector<double> probs =
          masked_policy(params.policy.forward(BanditEnv::context_observation(arm, 4)), {0, 1});
      CHECK(probs[0] == 0.0);
    }
    ++checks;
  });
  CHECK(checks == c.iterations);
}

TEST_CASE("weights survive a file round trip") {
  const PolicyParams p = PolicyParams::create(Strategy::kGwc, 32, 8, {8, 8}, 5);
  const std::string path = "ppo_roundtrip_test.bin";
  p.save(path);
  const PolicyParams q = PolicyParams::load(path);
  std::remove(path.c_str());
  CHECK(q.mode == Strategy::kGwc);
  CHECK(q.policy.sizes() == p.policy.sizes());
  CHECK(q.policy.params() == p.policy.params());
  CHECK(q.value.params() == p.value.params());
  std::istringstream bad("garbage");
  CHECK_THROWS(PolicyParams::read(bad));
}

TEST_CASE("training log rows") {
  CHECK(training_log_header().back() == '\n');
  IterationLog log;
  log.iteration = 3;
  CHECK(training_log_row(log).rfind("3,", 0) == 0);
}

}  // namespace
}  // namespace corridor
