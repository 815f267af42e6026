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

#include "corridor/hsa.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace corridor {
namespace {

ActionMask only(std::initializer_list<int> phases) {
  ActionMask m(kNumPhases, 0);
  for (int p : phases) m[p] = 1;
  return m;
}

ActionMask unrestricted(const PhaseTable& table) {
  ActionMask m(kNumPhases, 0);
  bool any = false;
  for (int p = 0; p < kNumPhases; ++p) {
    if (table.phases[p].conflict_free) {
      m[p] = 1;
      any = true;
    }
  }
  if (!any) m.assign(kNumPhases, 1);
  return m;
}

}  // namespace

void StrategyAssignment::check() const {
  if (strategy != Strategy::kPac && !plan) {
    throw std::invalid_argument(std::string(strategy_name(strategy)) + " assignment needs a signal plan");
  }
}

ActionMask feasible_phases(int i, double t, const StrategyAssignment& assignment, const PhaseTable& table) {
  switch (assignment.strategy) {
    case Strategy::kPac:
      return ActionMask(kNumPhases, 1);
    case Strategy::kMfc:
      assignment.check();
      if (assignment.plan->in_inbound_window(i, t)) return only({0, 1});
      return unrestricted(table);
    case Strategy::kGwc: {
      assignment.check();
      const bool in = assignment.plan->in_inbound_window(i, t);
      const bool out = assignment.plan->in_outbound_window(i, t);
      if (in && out) return only({0});
      if (in) return only({0, 1});
      if (out) return only({0, 2});
      return unrestricted(table);
    }
  }
  return ActionMask(kNumPhases, 1);
}

std::vector<double> masked_policy(const std::vector<double>& logits, const ActionMask& mask) {
  if (logits.size() != mask.size()) throw std::invalid_argument("logits and mask differ in length");
  double top = -INFINITY;
  bool any = false;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] != 0 && mask[k] != 1) throw std::invalid_argument("mask entries must be 0 or 1");
    if (mask[k]) {
      any = true;
      top = std::max(top, logits[k]);
    }
  }
  if (!any) throw std::invalid_argument("action mask allows nothing");
  std::vector<double> p(logits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const double shifted = logits[k] + (mask[k] ? 0.0 : kMaskedLogit) - top;
    p[k] = std::exp(shifted);
    if (!mask[k]) p[k] = 0.0;
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

ActionChoice choose(std::vector<double> probs, ActionMode mode, std::mt19937_64& rng) {
  ActionChoice c;
  int pick = -1;
  if (mode == ActionMode::kArgmax) {
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (probs[k] > 0.0 && (pick < 0 || probs[k] > probs[pick])) pick = static_cast<int>(k);
    }
  } else {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double cum = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (probs[k] <= 0.0) continue;
      pick = static_cast<int>(k);
      cum += probs[k];
      if (u < cum) break;
    }
  }
  if (pick < 0) throw std::invalid_argument("no action has positive probability");
  c.action = pick;
  c.log_prob = std::log(probs[pick]);
  c.probs = std::move(probs);
  return c;
}

ActionChoice select_action(const Mlp& policy, const std::vector<double>& observation, const ActionMask& mask,
                           ActionMode mode, std::mt19937_64& rng) {
  return choose(masked_policy(policy.forward(observation), mask), mode, rng);
}

const Mlp& HsaPolicies::policy_for(Strategy s) const {
  const auto& p = by_strategy[static_cast<int>(s)];
  if (!p) throw std::invalid_argument("no policy loaded for " + std::string(strategy_name(s)));
  return *p;
}

ActionChoice select_action(const HsaPolicies& policies, Strategy strategy, const std::vector<double>& observation,
                           const ActionMask& mask, ActionMode mode, std::mt19937_64& rng) {
  return select_action(policies.policy_for(strategy), observation, mask, mode, rng);
}

}  // namespace corridor
