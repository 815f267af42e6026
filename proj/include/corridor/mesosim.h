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

// Discrete-time mesoscopic corridor simulator.
//
// Every intersection has four approaches (inbound, outbound and the two
// cross-street legs), each fed by one link and split into through, left and
// right queues. Vehicles travel links at free flow, queue at the stop line
// and discharge at saturation flow while their movement is green; right
// turns are never signalized. Vehicles pick their turn when they enter an
// approach link, using a per-vehicle random stream, so a vehicle's route
// does not depend on other traffic.
//
// Phase changes cost one all-red step, after which the new phase holds for
// at least one step.

#ifndef CORRIDOR_MESOSIM_H_
#define CORRIDOR_MESOSIM_H_

#include <array>
#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "corridor/model.h"

namespace corridor {

enum class Approach : int { kInbound = 0, kOutbound = 1, kInboundCross = 2, kOutboundCross = 3 };
enum class Turn : int { kThrough = 0, kLeft = 1, kRight = 2 };
inline constexpr int kNumApproaches = 4;
inline constexpr int kNumTurns = 3;

Movement movement_of(Approach a, Turn t);  // t must not be kRight

struct SimOptions {
  double step = 3.0;               // seconds per control step
  double kappa = 0.2;              // head-wait weight in the agent reward
  double max_arrival_rate = 1.0;   // thinning envelope per origin, veh/s
  double feature_window = 60.0;    // trailing window for arrival features
  bool record_trajectories = false;
};

// Cumulative counters; subtract two snapshots to get a window.
struct SimCounters {
  std::int64_t steps = 0;
  std::int64_t entered = 0;
  std::int64_t exited = 0;
  std::int64_t corridor_exits = 0;
  std::int64_t corridor_stops = 0;       // stops of corridor vehicles completed
  std::int64_t corridor_stop_events = 0; // stops made by corridor vehicles
  std::int64_t total_stops = 0;
  double corridor_tt = 0.0;              // seconds, completed corridor vehicles
  double corridor_distance = 0.0;        // meters, completed corridor vehicles
  double exited_tt = 0.0;                // seconds, all completed vehicles
  double tt_in = 0.0;                    // vehicle-seconds on inbound approaches
  double tt_out = 0.0;
  double tt_oth = 0.0;
  double queue_sum = 0.0;                // controlled-movement queues summed per step
  double reward_sum = 0.0;               // sum of agent rewards per step
  // Per intersection, per controlled movement: queue summed per step and
  // vehicles that joined the queue.
  std::vector<std::array<double, kNumMovements>> movement_queue_sum;
  std::vector<std::array<std::int64_t, kNumMovements>> movement_joins;
  // Per intersection: vehicles entering its inbound link, by source.
  std::vector<std::int64_t> inbound_link_through;  // from upstream through / entry
  std::vector<std::int64_t> inbound_link_branch;   // turned in from a cross street
};

SimCounters operator-(const SimCounters& a, const SimCounters& b);

struct EpisodeMetrics {
  std::int64_t corridor_thru = 0;
  double corridor_stop = 0.0;   // mean stops per completed corridor vehicle
  double corridor_speed = 0.0;  // m/s
  std::int64_t network_thru = 0;
  double avg_tt = 0.0;          // s/veh
  double in_tt = 0.0;           // vehicle-seconds
  double out_tt = 0.0;
  double oth_tt = 0.0;
  double total_reward = 0.0;
  bool avg_tt_defined = true;   // false when no vehicle completed
};

EpisodeMetrics metrics_from(const SimCounters& window);

// Versioned CSV layout for per-episode metrics.
std::string metrics_csv_header();
std::string metrics_csv_row(const EpisodeMetrics& m);

// Per-movement features of one intersection.
struct RawObservation {
  std::array<double, kNumMovements> arrival{};   // veh/s over the trailing window
  std::array<double, kNumMovements> queue{};     // vehicles
  std::array<double, kNumMovements> speed{};     // m/s
  std::array<double, kNumMovements> neighbor{};  // veh/s expected from upstream
};

inline constexpr int kObservationSize = 4 * kNumMovements;

struct TrajectoryEvent {
  std::int64_t vehicle = 0;
  double time = 0.0;
  std::string event;  // spawn, enter_link, join, stop, release, exit
  int intersection = 0;  // 1-based, 0 when not at an intersection
  int approach = -1;
};

std::string trajectory_csv_header();
std::string trajectory_csv_row(const TrajectoryEvent& e);

class Simulator {
 public:
  Simulator(CorridorSpec corridor, PhaseTable phases, DemandProfile demand, SimOptions options = {});

  // Empties the network; seed drives arrivals and routes.
  void reset(std::uint64_t seed);

  // Advances one control step. `phases[i]` is the requested phase (0-based)
  // at intersection i. Throws std::invalid_argument on a bad phase id.
  void step(const std::vector<int>& phases);

  double clock() const { return clock_; }
  int size() const { return corridor_.size(); }
  const CorridorSpec& corridor() const { return corridor_; }
  const PhaseTable& phase_table() const { return phases_; }
  const SimOptions& options() const { return options_; }
  const DemandProfile& demand() const { return demand_; }
  void set_demand(DemandProfile demand);

  RawObservation observe(int i) const;
  // Scaled observation: arrivals and neighbor flows by saturation flow,
  // queues by link storage per lane, speeds by free-flow speed.
  std::vector<double> normalized_observation(int i) const;
  // -(sum of controlled queues + kappa * head-of-queue waits).
  double reward(int i) const;

  int queue(int i, Approach a, Turn t) const;
  int queue(int i, Movement m) const;
  double head_wait(int i, Movement m) const;
  int link_occupancy(int i, Approach a) const;
  int link_capacity(int i, Approach a) const;
  // Phase whose movements are green this step, or -1 during all-red.
  int effective_phase(int i) const { return signals_[i].effective; }
  const std::vector<std::array<int, kNumMovements>>& released_last_step() const { return released_; }

  const SimCounters& counters() const { return counters_; }
  std::int64_t in_network() const;

  // Fraction of vehicles at approach (i, a) expected to take turn t.
  double turn_share(int i, Approach a, Turn t) const;
  // Approach a released vehicle enters after (i, a, t), or {-1, -1} on exit.
  std::pair<int, int> downstream(int i, Approach a, Turn t) const;

  const std::vector<TrajectoryEvent>& trajectory() const { return trajectory_; }

 private:
  struct Vehicle {
    std::int64_t id = 0;
    int origin = 0;
    double generated = 0.0;
    double arrival = 0.0;   // at the stop line of the current link
    double joined = 0.0;    // time it joined the current queue
    std::uint64_t rng = 0;
    int intersection = 0;
    int approach = 0;
    int turn = 0;
    int stops = 0;
    bool queued = false;
    bool joined_this_step = false;
    double distance = 0.0;
  };

  struct Link {
    double length = 0.0;
    double travel_time = 0.0;
    int capacity = 0;
    std::deque<int> in_transit;  // vehicle slots ordered by arrival
    std::array<std::deque<int>, kNumTurns> queues;
    std::array<double, kNumTurns> accumulator{};
    int occupancy() const;
  };

  struct SignalState {
    int current = 0;
    int effective = 0;
    bool changing = false;
  };

  struct Origin {
    std::mt19937_64 rng;
    std::uint64_t seed = 0;
    double next_candidate = 0.0;
    std::int64_t candidate_index = 0;
    std::deque<int> pending;
    int intersection = 0;
    Approach approach = Approach::kInbound;
  };

  Link& link(int i, Approach a) { return links_[i * kNumApproaches + static_cast<int>(a)]; }
  const Link& link(int i, Approach a) const { return links_[i * kNumApproaches + static_cast<int>(a)]; }
  double origin_rate(int o, double t) const;
  void spawn(int o, double t);
  bool enter_link(int slot, int i, Approach a, double t, bool from_branch, bool from_through);
  void record(std::int64_t vehicle, double t, const char* event, int i, int a);
  void exit_vehicle(int slot, double t, bool corridor_exit);
  double draw(std::uint64_t& state) const;

  CorridorSpec corridor_;
  PhaseTable phases_;
  DemandProfile demand_;
  SimOptions options_;
  double clock_ = 0.0;
  std::int64_t next_id_ = 0;
  int window_steps_ = 20;
  std::vector<Vehicle> vehicles_;
  std::vector<int> free_slots_;
  std::vector<Link> links_;
  std::vector<SignalState> signals_;
  std::vector<Origin> origins_;
  SimCounters counters_;
  std::vector<std::array<int, kNumMovements>> released_;
  // Ring buffers over the feature window: joins per movement and entries
  // into each approach link from an upstream intersection.
  std::vector<std::vector<std::array<int, kNumMovements>>> join_ring_;
  std::vector<std::vector<std::array<int, kNumApproaches>>> feed_ring_;
  int ring_pos_ = 0;
  std::vector<TrajectoryEvent> trajectory_;
};

}  // namespace corridor

#endif  // CORRIDOR_MESOSIM_H_
