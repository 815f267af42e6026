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

#include "corridor/ppo.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

namespace corridor {
namespace {

constexpr char kMagic[4] = {'C', 'S', 'P', 'W'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Worker {
  std::unique_ptr<Environment> env;
  std::mt19937_64 rng;
  std::uint64_t seed = 0;
  std::uint64_t episodes = 0;
  bool need_reset = true;
  std::vector<Transition> batch;
  std::vector<EpisodeMetrics> finished;
};

void collect(Worker& w, const Mlp& policy, std::size_t share) {
  w.batch.clear();
  w.finished.clear();
  Environment& env = *w.env;
  while (w.batch.size() < share) {
    if (w.need_reset) {
      env.reset(mix_seed(w.seed, w.episodes));
      w.need_reset = false;
    }
    const int n = env.num_agents();
    std::vector<int> actions(n);
    std::vector<Transition> pending(n);
    for (int i = 0; i < n; ++i) {
      Transition& t = pending[i];
      t.obs = env.observation(i);
      t.mask = env.mask(i);
      ActionChoice c = select_action(policy, t.obs, t.mask, ActionMode::kSample, w.rng);
      t.action = c.action;
      t.log_prob = c.log_prob;
      t.old_probs = std::move(c.probs);
      actions[i] = c.action;
    }
    const EnvStep result = env.step(actions);
    for (int i = 0; i < n; ++i) {
      Transition& t = pending[i];
      t.reward = result.rewards.at(i);
      t.terminal = result.terminal;
      t.next_obs = env.observation(i);
      w.batch.push_back(std::move(t));
    }
    if (result.done) {
      if (result.episode) w.finished.push_back(*result.episode);
      w.episodes += 1;
      w.need_reset = true;
    }
  }
}

// Softmax derivative helpers on masked distributions: entries with p = 0
// stay out of every sum.
double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace

PpoConfig PpoConfig::desk() {
  PpoConfig c;
  c.hidden = {32, 32};
  c.train_batch = 2000;
  c.iterations = 50;
  return c;
}

void PpoConfig::check() const {
  if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("clip must lie in (0,1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
  if (train_batch < minibatch) throw std::invalid_argument("train batch must be at least the minibatch");
  if (minibatch < 1 || epochs < 0 || iterations < 0) throw std::invalid_argument("batch sizes must be positive");
  if (lr_schedule.empty()) throw std::invalid_argument("learning-rate schedule is empty");
  for (std::size_t k = 1; k < lr_schedule.size(); ++k) {
    if (lr_schedule[k].step <= lr_schedule[k - 1].step) {
      throw std::invalid_argument("learning-rate schedule steps must increase");
    }
  }
  for (int h : hidden) {
    if (h <= 0) throw std::invalid_argument("hidden layer sizes must be positive");
  }
  if (parallel < 1) throw std::invalid_argument("parallel must be at least 1");
}

double PpoConfig::lr_at(double steps) const {
  if (steps <= lr_schedule.front().step) return lr_schedule.front().lr;
  for (std::size_t k = 1; k < lr_schedule.size(); ++k) {
    if (steps <= lr_schedule[k].step) {
      const LrPoint& a = lr_schedule[k - 1];
      const LrPoint& b = lr_schedule[k];
      return a.lr + (b.lr - a.lr) * (steps - a.step) / (b.step - a.step);
    }
  }
  return lr_schedule.back().lr;
}

PolicyParams PolicyParams::create(Strategy mode, int observation_size, int num_actions,
                                  const std::vector<int>& hidden, std::uint64_t seed) {
  PolicyParams p;
  p.mode = mode;
  std::vector<int> ps{observation_size};
  ps.insert(ps.end(), hidden.begin(), hidden.end());
  std::vector<int> vs = ps;
  ps.push_back(num_actions);
  vs.push_back(1);
  p.policy = Mlp(ps, mix_seed(seed, 1), 0.01);
  p.value = Mlp(vs, mix_seed(seed, 2), 1.0);
  return p;
}

void PolicyParams::write(std::ostream& out) const {
  out.write(kMagic, 4);
  const std::uint32_t header[2] = {kFormatVersion, static_cast<std::uint32_t>(mode)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  policy.write(out);
  value.write(out);
}

PolicyParams PolicyParams::read(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("not a corridor weight file");
  std::uint32_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("truncated weight file");
  if (header[0] != kFormatVersion) throw std::runtime_error("unsupported weight file version");
  if (header[1] > 2) throw std::runtime_error("unknown strategy tag in weight file");
  PolicyParams p;
  p.mode = static_cast<Strategy>(header[1]);
  p.policy = Mlp::read(in);
  p.value = Mlp::read(in);
  if (p.policy.inputs() != p.value.inputs() || p.value.outputs() != 1) {
    throw std::runtime_error("policy and value networks disagree in shape");
  }
  return p;
}

void PolicyParams::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

PolicyParams PolicyParams::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read(in);
}

double advantage(double reward, double gamma, double v_next, double v, bool terminal) {
  return reward + (terminal ? 0.0 : gamma * v_next) - v;
}

void standardize(std::vector<PolicySample>& samples) {
  if (samples.size() < 2) return;
  double mean = 0.0;
  for (const PolicySample& s : samples) mean += s.advantage;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (const PolicySample& s : samples) var += (s.advantage - mean) * (s.advantage - mean);
  const double sd = std::sqrt(var / static_cast<double>(samples.size()));
  if (!(sd > 1e-12)) {
    for (PolicySample& s : samples) s.advantage -= mean;
    return;
  }
  for (PolicySample& s : samples) s.advantage = (s.advantage - mean) / sd;
}

LossResult surrogate_loss(const Mlp& policy, const std::vector<PolicySample>& batch, const PpoConfig& config) {
  LossResult res;
  res.grad.assign(policy.num_params(), 0.0);
  if (batch.empty()) return res;
  const double inv = 1.0 / static_cast<double>(batch.size());
  Mlp::Trace trace;
  std::vector<double> d_logits;
  for (const PolicySample& s : batch) {
    const Transition& t = *s.transition;
    const std::vector<double> logits = policy.forward(t.obs, trace);
    const std::vector<double> p = masked_policy(logits, t.mask);
    const int a = t.action;
    const double ratio = std::exp(std::log(p[a]) - t.log_prob);
    const double adv = s.advantage;
    const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    const bool use_unclipped = unclipped_term <= clipped_term;
    res.surrogate += std::min(unclipped_term, clipped_term) * inv;
    res.mean_ratio_deviation += std::abs(ratio - 1.0) * inv;

    double kl = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (t.old_probs[k] > 0.0) kl += t.old_probs[k] * (std::log(t.old_probs[k]) - std::log(p[k]));
    }
    const double h = entropy_of(p);
    res.kl += kl * inv;
    res.entropy += h * inv;

    d_logits.assign(p.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!t.mask[k]) continue;
      const double dlogp = (static_cast<int>(k) == a ? 1.0 : 0.0) - p[k];
      const double d_surr = use_unclipped ? adv * ratio * dlogp : 0.0;
      const double d_kl = p[k] - t.old_probs[k];
      const double d_h = p[k] > 0.0 ? -p[k] * (std::log(p[k]) + h) : 0.0;
      d_logits[k] = -(d_surr - config.kl_coeff * d_kl + config.entropy_coeff * d_h) * inv;
    }
    policy.backward(trace, d_logits, res.grad);
  }
  res.loss = -(res.surrogate - config.kl_coeff * res.kl + config.entropy_coeff * res.entropy);
  if (!std::isfinite(res.loss)) {
    std::ostringstream msg;
    msg << "non-finite policy loss (surrogate " << res.surrogate << ", kl " << res.kl << ", entropy " << res.entropy
        << ")";
    throw NumericalError(msg.str());
  }
  return res;
}

LossResult value_loss(const Mlp& value, const std::vector<ValueSample>& batch, const PpoConfig& config) {
  LossResult res;
  res.grad.assign(value.num_params(), 0.0);
  if (batch.empty()) return res;
  const double inv = 1.0 / static_cast<double>(batch.size());
  Mlp::Trace trace;
  std::vector<double> d_out(1);
  for (const ValueSample& s : batch) {
    const double v = value.forward(*s.obs, trace)[0];
    const double td = s.target - v;
    const double sq = td * td;
    if (sq >= config.value_clip) {
      res.loss += config.value_coeff * config.value_clip * inv;
      continue;
    }
    res.loss += config.value_coeff * sq * inv;
    d_out[0] = -2.0 * td * config.value_coeff * inv;
    value.backward(trace, d_out, res.grad);
  }
  if (!std::isfinite(res.loss)) throw NumericalError("non-finite value loss");
  return res;
}

std::string training_log_header() {
  return "iteration,env_steps,mean_reward,episodes,corridor_thru,corridor_stop,corridor_speed,network_thru,avg_tt,"
         "total_reward,skipped,lr\n";
}

std::string training_log_row(const IterationLog& l) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%d,%lld,%.6f,%d,%.3f,%.6f,%.6f,%.3f,%.6f,%.6f,%d,%.3e\n", l.iteration,
                static_cast<long long>(l.env_steps), l.mean_reward, l.episodes, l.corridor_thru, l.corridor_stop,
                l.corridor_speed, l.network_thru, l.avg_tt, l.total_reward, l.skipped ? 1 : 0, l.lr);
  return buf;
}

PolicyParams train_mode(const EnvFactory& factory, Strategy mode, const PpoConfig& config,
                        const IterationCallback& on_iteration) {
  config.check();
  const std::unique_ptr<Environment> probe = factory(0);
  PolicyParams params =
      PolicyParams::create(mode, probe->observation_size(), probe->num_actions(), config.hidden, config.seed);
  train_params(factory, params, config, on_iteration);
  return params;
}

void train_params(const EnvFactory& factory, PolicyParams& params, const PpoConfig& config,
                  const IterationCallback& on_iteration) {
  config.check();
  std::vector<Worker> workers(config.parallel);
  for (int k = 0; k < config.parallel; ++k) {
    workers[k].env = factory(k);
    workers[k].seed = mix_seed(config.seed, 100 + k);
    workers[k].rng.seed(mix_seed(config.seed, 200 + k));
  }
  const std::size_t share = (config.train_batch + config.parallel - 1) / config.parallel;
  Adam policy_opt(params.policy.num_params());
  Adam value_opt(params.value.num_params());
  std::mt19937_64 shuffle_rng(mix_seed(config.seed, 3));
  std::int64_t env_steps = 0;

  for (int it = 0; it < config.iterations; ++it) {
    if (config.parallel == 1) {
      collect(workers[0], params.policy, share);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t k = 1; k < workers.size(); ++k) {
        threads.emplace_back([&, k]() { collect(workers[k], params.policy, share); });
      }
      collect(workers[0], params.policy, share);
      for (std::thread& t : threads) t.join();
    }

    std::vector<Transition> batch;
    IterationLog log;
    log.iteration = it + 1;
    for (Worker& w : workers) {
      for (Transition& t : w.batch) batch.push_back(std::move(t));
      for (const EpisodeMetrics& m : w.finished) {
        log.episodes += 1;
        log.corridor_thru += static_cast<double>(m.corridor_thru);
        log.corridor_stop += m.corridor_stop;
        log.corridor_speed += m.corridor_speed;
        log.network_thru += static_cast<double>(m.network_thru);
        log.avg_tt += m.avg_tt;
        log.total_reward += m.total_reward;
      }
    }
    if (log.episodes > 0) {
      const double inv = 1.0 / log.episodes;
      log.corridor_thru *= inv;
      log.corridor_stop *= inv;
      log.corridor_speed *= inv;
      log.network_thru *= inv;
      log.avg_tt *= inv;
      log.total_reward *= inv;
    }
    env_steps += static_cast<std::int64_t>(batch.size());
    log.env_steps = env_steps;
    const double lr = config.lr_at(static_cast<double>(env_steps));
    log.lr = lr;

    std::vector<PolicySample> psamples(batch.size());
    std::vector<ValueSample> vsamples(batch.size());
    double reward_sum = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const Transition& t = batch[k];
      const double v = params.value.forward(t.obs)[0];
      const double v_next = t.terminal ? 0.0 : params.value.forward(t.next_obs)[0];
      psamples[k] = {&t, advantage(t.reward, config.gamma, v_next, v, t.terminal)};
      vsamples[k] = {&t.obs, t.reward + (t.terminal ? 0.0 : config.gamma * v_next)};
      reward_sum += t.reward;
    }
    log.mean_reward = batch.empty() ? 0.0 : reward_sum / static_cast<double>(batch.size());
    if (config.standardize_advantages) standardize(psamples);

    std::vector<std::size_t> order(batch.size());
    for (int epoch = 0; epoch < config.epochs && lr > 0.0; ++epoch) {
      const std::vector<double> policy_before = params.policy.params();
      const std::vector<double> value_before = params.value.params();
      if (epoch > 0) {
        for (std::size_t k = 0; k < batch.size(); ++k) {
          const Transition& t = batch[k];
          vsamples[k].target = t.reward + (t.terminal ? 0.0 : config.gamma * params.value.forward(t.next_obs)[0]);
        }
      }
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t k = order.size(); k > 1; --k) {
        std::swap(order[k - 1], order[shuffle_rng() % k]);
      }
      for (std::size_t start = 0; start < order.size(); start += config.minibatch) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.minibatch));
        std::vector<PolicySample> pb;
        std::vector<ValueSample> vb;
        for (std::size_t k = start; k < end; ++k) {
          pb.push_back(psamples[order[k]]);
          vb.push_back(vsamples[order[k]]);
        }
        try {
          const LossResult pl = surrogate_loss(params.policy, pb, config);
          const LossResult vl = value_loss(params.value, vb, config);
          policy_opt.step(params.policy.params(), pl.grad, lr);
          value_opt.step(params.value.params(), vl.grad, lr);
        } catch (const NumericalError& e) {
          std::cerr << "iteration " << it + 1 << ", epoch " << epoch + 1 << ": update skipped: " << e.what() << "\n";
        }
      }
      double deviation = 0.0;
      for (const PolicySample& s : psamples) {
        const Transition& t = *s.transition;
        const std::vector<double> p = masked_policy(params.policy.forward(t.obs), t.mask);
        deviation += std::abs(std::exp(std::log(p[t.action]) - t.log_prob) - 1.0);
      }
      deviation /= std::max<std::size_t>(1, psamples.size());
      if (!(deviation <= config.divergence_limit)) {
        params.policy.params() = policy_before;
        params.value.params() = value_before;
        log.skipped = true;
        std::cerr << "iteration " << it + 1 << ", epoch " << epoch + 1 << ": mean |ratio-1| " << deviation
                  << " exceeds the divergence limit, epoch reverted\n";
        break;
      }
    }
    if (on_iteration) on_iteration(log, params);
  }
}

BanditEnv::BanditEnv(int masked_arm, int observation_size)
    : masked_arm_(masked_arm), observation_size_(observation_size) {
  if (observation_size_ < 2) throw std::invalid_argument("bandit observation needs at least two entries");
  if (masked_arm_ < -1 || masked_arm_ > 1) throw std::invalid_argument("bandit has two arms");
}

void BanditEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  draw();
}

void BanditEnv::draw() { arm_ = static_cast<int>(rng_() >> 63); }

std::vector<double> BanditEnv::context_observation(int rewarding_arm, int observation_size) {
  std::vector<double> obs(observation_size, 0.0);
  obs[0] = rewarding_arm == 0 ? 1.0 : -1.0;
  obs[1] = 1.0;
  return obs;
}

std::vector<double> BanditEnv::observation(int) const { return context_observation(arm_, observation_size_); }

ActionMask BanditEnv::mask(int) const {
  ActionMask m(2, 1);
  if (masked_arm_ >= 0) m[masked_arm_] = 0;
  return m;
}

EnvStep BanditEnv::step(const std::vector<int>& actions) {
  EnvStep s;
  s.rewards = {actions.at(0) == arm_ ? 1.0 : 0.0};
  s.done = true;
  s.terminal = true;
  draw();
  return s;
}

}  // namespace corridor
