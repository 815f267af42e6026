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

// Proximal policy optimization with masked categorical policies, one-step
// TD advantages, a clipped surrogate, a fixed KL penalty against the
// rollout policy and an entropy bonus. Policy and value use separate
// networks.

#ifndef CORRIDOR_PPO_H_
#define CORRIDOR_PPO_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "corridor/env.h"
#include "corridor/hsa.h"
#include "corridor/mlp.h"
#include "corridor/plan.h"

namespace corridor {

struct LrPoint {
  double step = 0.0;  // environment transitions
  double lr = 0.0;
};

struct PpoConfig {
  double clip = 0.3;
  double gamma = 0.99;
  double kl_coeff = 0.2;
  double value_clip = 1000.0;
  double entropy_coeff = 0.005;
  double value_coeff = 1.0;
  int epochs = 20;
  int train_batch = 20000;
  int minibatch = 1024;
  int iterations = 300;
  std::vector<LrPoint> lr_schedule{{0.0, 5e-4}, {2e5, 1e-4}, {5e5, 1e-5}};
  std::vector<int> hidden{256, 128};
  bool standardize_advantages = true;  // per batch, zero mean and unit variance
  double divergence_limit = 10.0;  // mean |ratio - 1| that rejects an epoch
  std::uint64_t seed = 1;
  int parallel = 1;

  // Small networks and batches for quick runs.
  static PpoConfig desk();
  void check() const;
  // Piecewise-linear in transitions; flat beyond the last point.
  double lr_at(double steps) const;
};

struct PolicyParams {
  Strategy mode = Strategy::kPac;
  Mlp policy;
  Mlp value;

  static PolicyParams create(Strategy mode, int observation_size, int num_actions, const std::vector<int>& hidden,
                             std::uint64_t seed);
  void save(const std::string& path) const;
  static PolicyParams load(const std::string& path);
  void write(std::ostream& out) const;
  static PolicyParams read(std::istream& in);
};

struct Transition {
  std::vector<double> obs;
  std::vector<double> next_obs;
  ActionMask mask;
  int action = 0;
  double log_prob = 0.0;          // under the rollout policy
  std::vector<double> old_probs;  // rollout policy distribution
  double reward = 0.0;
  bool terminal = false;          // no bootstrap from next_obs
};

// One-step TD advantage; terminal transitions use V(s') = 0.
double advantage(double reward, double gamma, double v_next, double v, bool terminal);

struct PolicySample {
  const Transition* transition = nullptr;
  double advantage = 0.0;
};

// Rescales a batch's advantages to zero mean and unit variance; a batch
// with no spread is only centered.
void standardize(std::vector<PolicySample>& samples);

struct ValueSample {
  const std::vector<double>* obs = nullptr;
  double target = 0.0;  // r + gamma V(s'), refreshed once per epoch
};

struct LossResult {
  double loss = 0.0;        // quantity minimized
  double surrogate = 0.0;   // mean clipped surrogate
  double kl = 0.0;          // mean KL(rollout || current)
  double entropy = 0.0;
  double mean_ratio_deviation = 0.0;  // mean |ratio - 1|
  std::vector<double> grad;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// loss = -(surrogate - kl_coeff * KL + entropy_coeff * H). Throws
// NumericalError when the loss is not finite.
LossResult surrogate_loss(const Mlp& policy, const std::vector<PolicySample>& batch, const PpoConfig& config);

// loss = value_coeff * mean(min(td^2, value_clip)).
LossResult value_loss(const Mlp& value, const std::vector<ValueSample>& batch, const PpoConfig& config);

struct IterationLog {
  int iteration = 0;
  std::int64_t env_steps = 0;
  double mean_reward = 0.0;  // per transition
  int episodes = 0;          // completed during the iteration
  // Means over completed episodes, zero when none completed.
  double corridor_thru = 0.0;
  double corridor_stop = 0.0;
  double corridor_speed = 0.0;
  double network_thru = 0.0;
  double avg_tt = 0.0;
  double total_reward = 0.0;
  bool skipped = false;       // an epoch was rejected by the divergence guard
  double lr = 0.0;
};

std::string training_log_header();
std::string training_log_row(const IterationLog& log);

using IterationCallback = std::function<void(const IterationLog&, const PolicyParams&)>;

// Trains a fresh policy for `mode` on environments from `factory`.
PolicyParams train_mode(const EnvFactory& factory, Strategy mode, const PpoConfig& config,
                        const IterationCallback& on_iteration = {});

// Continues training from `params`.
void train_params(const EnvFactory& factory, PolicyParams& params, const PpoConfig& config,
                  const IterationCallback& on_iteration = {});

// Contextual two-armed bandit: the observation carries a context sign and
// the arm matching it pays 1, the other 0. Optionally one arm is masked.
class BanditEnv : public Environment {
 public:
  explicit BanditEnv(int masked_arm = -1, int observation_size = 4);
  int num_agents() const override { return 1; }
  int observation_size() const override { return observation_size_; }
  int num_actions() const override { return 2; }
  void reset(std::uint64_t seed) override;
  std::vector<double> observation(int agent) const override;
  ActionMask mask(int agent) const override;
  EnvStep step(const std::vector<int>& actions) override;

  static std::vector<double> context_observation(int rewarding_arm, int observation_size);
  int rewarding_arm() const { return arm_; }

 private:
  void draw();

  int masked_arm_;
  int observation_size_;
  std::mt19937_64 rng_;
  int arm_ = 0;
};

}  // namespace corridor

#endif  // CORRIDOR_PPO_H_
