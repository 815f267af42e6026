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

// Multi-agent environment interface consumed by the trainers. All agents
// act simultaneously and share one policy.

#ifndef CORRIDOR_ENV_H_
#define CORRIDOR_ENV_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "corridor/hsa.h"
#include "corridor/mesosim.h"

namespace corridor {

struct EnvStep {
  std::vector<double> rewards;  // one per agent
  bool done = false;            // episode over; reset before stepping again
  bool terminal = false;        // true end of episode, not a time limit
  std::optional<EpisodeMetrics> episode;  // set on the last step when available
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual int num_agents() const = 0;
  virtual int observation_size() const = 0;
  virtual int num_actions() const = 0;
  virtual void reset(std::uint64_t seed) = 0;
  virtual std::vector<double> observation(int agent) const = 0;
  virtual ActionMask mask(int agent) const = 0;
  virtual EnvStep step(const std::vector<int>& actions) = 0;
};

// Builds the environment for worker `index`.
using EnvFactory = std::function<std::unique_ptr<Environment>(int index)>;

}  // namespace corridor

#endif  // CORRIDOR_ENV_H_
