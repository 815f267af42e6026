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

#include "corridor/mesosim.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace corridor {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b * 0xD1B54A32D192ED03ULL);
  return splitmix64(s);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int category(Approach a) {
  switch (a) {
    case Approach::kInbound:
      return 0;
    case Approach::kOutbound:
      return 1;
    default:
      return 2;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Movement movement_of(Approach a, Turn t) {
  if (t == Turn::kRight) throw std::invalid_argument("right turns are not signal controlled");
  return static_cast<Movement>(static_cast<int>(a) * 2 + static_cast<int>(t));
}

SimCounters operator-(const SimCounters& a, const SimCounters& b) {
  SimCounters d;
  d.steps = a.steps - b.steps;
  d.entered = a.entered - b.entered;
  d.exited = a.exited - b.exited;
  d.corridor_exits = a.corridor_exits - b.corridor_exits;
  d.corridor_stops = a.corridor_stops - b.corridor_stops;
  d.corridor_stop_events = a.corridor_stop_events - b.corridor_stop_events;
  d.total_stops = a.total_stops - b.total_stops;
  d.corridor_tt = a.corridor_tt - b.corridor_tt;
  d.corridor_distance = a.corridor_distance - b.corridor_distance;
  d.exited_tt = a.exited_tt - b.exited_tt;
  d.tt_in = a.tt_in - b.tt_in;
  d.tt_out = a.tt_out - b.tt_out;
  d.tt_oth = a.tt_oth - b.tt_oth;
  d.queue_sum = a.queue_sum - b.queue_sum;
  d.reward_sum = a.reward_sum - b.reward_sum;
  const std::size_t n = a.movement_queue_sum.size();
  d.movement_queue_sum.resize(n);
  d.movement_joins.resize(n);
  d.inbound_link_through.resize(n);
  d.inbound_link_branch.resize(n);
  for (std::size_t i = 0; i < n && i < b.movement_queue_sum.size(); ++i) {
    for (int m = 0; m < kNumMovements; ++m) {
      d.movement_queue_sum[i][m] = a.movement_queue_sum[i][m] - b.movement_queue_sum[i][m];
      d.movement_joins[i][m] = a.movement_joins[i][m] - b.movement_joins[i][m];
    }
    d.inbound_link_through[i] = a.inbound_link_through[i] - b.inbound_link_through[i];
    d.inbound_link_branch[i] = a.inbound_link_branch[i] - b.inbound_link_branch[i];
  }
  return d;
}

EpisodeMetrics metrics_from(const SimCounters& w) {
  EpisodeMetrics m;
  m.corridor_thru = w.corridor_exits;
  m.network_thru = w.exited;
  if (w.corridor_exits > 0) {
    m.corridor_stop = static_cast<double>(w.corridor_stops) / static_cast<double>(w.corridor_exits);
    m.corridor_speed = w.corridor_tt > 0.0 ? w.corridor_distance / w.corridor_tt : 0.0;
  }
  m.in_tt = w.tt_in;
  m.out_tt = w.tt_out;
  m.oth_tt = w.tt_oth;
  if (w.exited > 0) {
    m.avg_tt = (w.tt_in + w.tt_out + w.tt_oth) / static_cast<double>(w.exited);
  } else {
    m.avg_tt = 0.0;
    m.avg_tt_defined = false;
  }
  m.total_reward = w.reward_sum;
  return m;
}

std::string metrics_csv_header() {
  return "# corridor-metrics v1\n"
         "corridor_thru,corridor_stop,corridor_speed,network_thru,avg_tt,in_tt,out_tt,oth_tt,total_reward,"
         "avg_tt_defined\n";
}

std::string metrics_csv_row(const EpisodeMetrics& m) {
  return std::to_string(m.corridor_thru) + "," + fmt(m.corridor_stop) + "," + fmt(m.corridor_speed) + "," +
         std::to_string(m.network_thru) + "," + fmt(m.avg_tt) + "," + fmt(m.in_tt) + "," + fmt(m.out_tt) + "," +
         fmt(m.oth_tt) + "," + fmt(m.total_reward) + "," + (m.avg_tt_defined ? "1" : "0") + "\n";
}

std::string trajectory_csv_header() { return "vehicle,time,event,intersection,approach\n"; }

std::string trajectory_csv_row(const TrajectoryEvent& e) {
  return std::to_string(e.vehicle) + "," + fmt(e.time) + "," + e.event + "," + std::to_string(e.intersection) + "," +
         std::to_string(e.approach) + "\n";
}

int Simulator::Link::occupancy() const {
  int n = static_cast<int>(in_transit.size());
  for (const auto& q : queues) n += static_cast<int>(q.size());
  return n;
}

Simulator::Simulator(CorridorSpec corridor, PhaseTable phases, DemandProfile demand, SimOptions options)
    : corridor_(std::move(corridor)), phases_(std::move(phases)), demand_(std::move(demand)), options_(options) {
  const std::vector<ValidationError> errors = validate(corridor_);
  if (!errors.empty()) throw std::invalid_argument(format_errors(errors));
  if (!(options_.step > 0.0)) throw std::invalid_argument("simulation step must be positive");
  if (!(options_.max_arrival_rate > 0.0)) throw std::invalid_argument("arrival envelope must be positive");
  set_demand(demand_);
  window_steps_ = std::max(1, static_cast<int>(std::lround(options_.feature_window / options_.step)));
  reset(demand_.seed);
}

void Simulator::set_demand(DemandProfile demand) {
  const std::vector<ValidationError> errors = validate(demand, corridor_.size());
  if (!errors.empty()) throw std::invalid_argument(format_errors(errors));
  for (const DemandSegment& s : demand.segments) {
    double peak = std::max(s.rates.inbound_entry, s.rates.outbound_entry);
    for (const auto& c : s.rates.cross) peak = std::max({peak, c[0], c[1]});
    if (peak > options_.max_arrival_rate) {
      throw std::invalid_argument("arrival rate exceeds the simulator's arrival envelope");
    }
  }
  demand_ = std::move(demand);
}

void Simulator::reset(std::uint64_t seed) {
  const int n = corridor_.size();
  clock_ = 0.0;
  next_id_ = 0;
  vehicles_.clear();
  free_slots_.clear();
  trajectory_.clear();
  links_.assign(static_cast<std::size_t>(n) * kNumApproaches, Link{});
  for (int i = 0; i < n; ++i) {
    const IntersectionSpec& s = corridor_.intersections[i];
    const IntersectionSpec& east = corridor_.intersections[std::min(i + 1, n - 1)];
    const double h = s.stop_headway;
    Link& in = link(i, Approach::kInbound);
    in.length = s.link_length;
    in.travel_time = s.free_flow_tt;
    in.capacity = static_cast<int>(std::floor((s.lanes_coordinated + 2) * s.link_length / h));
    Link& out = link(i, Approach::kOutbound);
    out.length = east.link_length;
    out.travel_time = east.free_flow_tt;
    out.capacity = static_cast<int>(std::floor((s.lanes_coordinated + 2) * east.link_length / h));
    for (Approach a : {Approach::kInboundCross, Approach::kOutboundCross}) {
      Link& x = link(i, a);
      x.length = corridor_.cross_link_length;
      x.travel_time = corridor_.cross_free_flow_tt;
      x.capacity = static_cast<int>(std::floor((s.cross_lanes + 2) * corridor_.cross_link_length / h));
    }
  }
  signals_.assign(n, SignalState{});
  counters_ = SimCounters{};
  counters_.movement_queue_sum.assign(n, {});
  counters_.movement_joins.assign(n, {});
  counters_.inbound_link_through.assign(n, 0);
  counters_.inbound_link_branch.assign(n, 0);
  released_.assign(n, {});
  join_ring_.assign(n, std::vector<std::array<int, kNumMovements>>(window_steps_));
  feed_ring_.assign(n, std::vector<std::array<int, kNumApproaches>>(window_steps_));
  ring_pos_ = 0;

  origins_.clear();
  const int num_origins = 2 + 2 * n;
  std::uint64_t base = seed;
  for (int o = 0; o < num_origins; ++o) {
    Origin org;
    org.seed = mix(base, static_cast<std::uint64_t>(o) + 1);
    org.rng.seed(org.seed);
    org.next_candidate = -std::log(1.0 - unit(org.rng)) / options_.max_arrival_rate;
    if (o == 0) {
      org.intersection = 0;
      org.approach = Approach::kInbound;
    } else if (o == 1) {
      org.intersection = n - 1;
      org.approach = Approach::kOutbound;
    } else {
      org.intersection = (o - 2) / 2;
      org.approach = (o - 2) % 2 == 0 ? Approach::kInboundCross : Approach::kOutboundCross;
    }
    origins_.push_back(std::move(org));
  }
}

double Simulator::origin_rate(int o, double t) const {
  const DemandRates& r = demand_.segment_at(t).rates;
  if (o == 0) return r.inbound_entry;
  if (o == 1) return r.outbound_entry;
  return r.cross[(o - 2) / 2][(o - 2) % 2];
}

double Simulator::draw(std::uint64_t& state) const {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

double Simulator::turn_share(int i, Approach a, Turn t) const {
  const IntersectionSpec& s = corridor_.intersections[i];
  double through, left, right;
  if (a == Approach::kInbound || a == Approach::kOutbound) {
    through = a == Approach::kInbound ? s.turn_ratio : s.outbound_turn_ratio;
    left = (1.0 - through) * s.left_share;
    right = (1.0 - through) * (1.0 - s.left_share);
  } else {
    through = s.cross_turns.through;
    left = s.cross_turns.left;
    right = s.cross_turns.right;
  }
  switch (t) {
    case Turn::kThrough:
      return through;
    case Turn::kLeft:
      return left;
    case Turn::kRight:
      return right;
  }
  return 0.0;
}

std::pair<int, int> Simulator::downstream(int i, Approach a, Turn t) const {
  const int n = corridor_.size();
  const std::pair<int, int> exit{-1, -1};
  auto east = [&]() { return i + 1 < n ? std::pair<int, int>{i + 1, static_cast<int>(Approach::kInbound)} : exit; };
  auto west = [&]() { return i > 0 ? std::pair<int, int>{i - 1, static_cast<int>(Approach::kOutbound)} : exit; };
  switch (a) {
    case Approach::kInbound:
      return t == Turn::kThrough ? east() : exit;
    case Approach::kOutbound:
      return t == Turn::kThrough ? west() : exit;
    case Approach::kInboundCross:
      if (t == Turn::kLeft) return east();
      if (t == Turn::kRight) return west();
      return exit;
    case Approach::kOutboundCross:
      if (t == Turn::kLeft) return west();
      if (t == Turn::kRight) return east();
      return exit;
  }
  return exit;
}

void Simulator::record(std::int64_t vehicle, double t, const char* event, int i, int a) {
  if (!options_.record_trajectories) return;
  trajectory_.push_back({vehicle, t, event, i + 1, a});
}

bool Simulator::enter_link(int slot, int i, Approach a, double t, bool from_branch, bool from_through) {
  Link& l = link(i, a);
  if (l.occupancy() >= l.capacity) return false;
  Vehicle& v = vehicles_[slot];
  v.intersection = i;
  v.approach = static_cast<int>(a);
  v.arrival = t + l.travel_time;
  v.distance += l.length;
  v.queued = false;
  const double u = draw(v.rng);
  const double through = turn_share(i, a, Turn::kThrough);
  const double left = turn_share(i, a, Turn::kLeft);
  v.turn = u < through ? 0 : (u < through + left ? 1 : 2);
  l.in_transit.push_back(slot);
  if (from_branch || from_through) feed_ring_[i][ring_pos_][static_cast<int>(a)] += 1;
  if (a == Approach::kInbound) {
    if (from_branch) {
      counters_.inbound_link_branch[i] += 1;
    } else {
      counters_.inbound_link_through[i] += 1;
    }
  }
  record(v.id, t, "enter_link", i, static_cast<int>(a));
  return true;
}

void Simulator::spawn(int o, double t) {
  Origin& org = origins_[o];
  int slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
  } else {
    slot = static_cast<int>(vehicles_.size());
    vehicles_.emplace_back();
  }
  Vehicle& v = vehicles_[slot];
  v = Vehicle{};
  v.id = next_id_++;
  v.origin = o;
  v.generated = t;
  v.rng = mix(org.seed, static_cast<std::uint64_t>(org.candidate_index));
  counters_.entered += 1;
  record(v.id, t, "spawn", org.intersection, static_cast<int>(org.approach));
  if (!org.pending.empty() || !enter_link(slot, org.intersection, org.approach, t, false, false)) {
    org.pending.push_back(slot);
  }
}

void Simulator::exit_vehicle(int slot, double t, bool corridor_exit) {
  Vehicle& v = vehicles_[slot];
  counters_.exited += 1;
  counters_.exited_tt += t - v.generated;
  if (corridor_exit) {
    counters_.corridor_exits += 1;
    counters_.corridor_stops += v.stops;
    counters_.corridor_tt += t - v.generated;
    counters_.corridor_distance += v.distance;
  }
  record(v.id, t, "exit", v.intersection, v.approach);
  free_slots_.push_back(slot);
}

void Simulator::step(const std::vector<int>& requested) {
  const int n = corridor_.size();
  if (static_cast<int>(requested.size()) != n) {
    throw std::invalid_argument("expected one phase per intersection");
  }
  for (int i = 0; i < n; ++i) {
    if (requested[i] < 0 || requested[i] >= kNumPhases) {
      throw std::invalid_argument("intersection " + std::to_string(i + 1) + ": unknown phase id " +
                                  std::to_string(requested[i]));
    }
  }
  const double dt = options_.step;
  const double t0 = clock_;
  const double t1 = t0 + dt;
  ring_pos_ = (ring_pos_ + 1) % window_steps_;
  for (int i = 0; i < n; ++i) {
    join_ring_[i][ring_pos_].fill(0);
    feed_ring_[i][ring_pos_].fill(0);
    released_[i].fill(0);
  }

  // Signals: a change request buys one all-red step, then the new phase
  // holds for one step regardless of requests.
  for (int i = 0; i < n; ++i) {
    SignalState& s = signals_[i];
    if (s.changing) {
      s.changing = false;
      s.effective = s.current;
    } else if (requested[i] != s.current) {
      s.current = requested[i];
      s.changing = true;
      s.effective = -1;
    } else {
      s.effective = s.current;
    }
  }

  // Origins: queued entries first, then new arrivals by thinning.
  for (int o = 0; o < static_cast<int>(origins_.size()); ++o) {
    Origin& org = origins_[o];
    while (!org.pending.empty() && enter_link(org.pending.front(), org.intersection, org.approach, t0, false, false)) {
      org.pending.pop_front();
    }
    while (org.next_candidate <= t1) {
      const double t = org.next_candidate;
      const double u = unit(org.rng);
      if (u * options_.max_arrival_rate < origin_rate(o, t)) spawn(o, t);
      org.candidate_index += 1;
      org.next_candidate += -std::log(1.0 - unit(org.rng)) / options_.max_arrival_rate;
    }
  }

  // Arrivals at the stop line.
  std::vector<int> joined;
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < kNumApproaches; ++a) {
      Link& l = link(i, static_cast<Approach>(a));
      while (!l.in_transit.empty() && vehicles_[l.in_transit.front()].arrival <= t1) {
        const int slot = l.in_transit.front();
        l.in_transit.pop_front();
        Vehicle& v = vehicles_[slot];
        v.queued = true;
        v.joined = v.arrival;
        l.queues[v.turn].push_back(slot);
        joined.push_back(slot);
        if (v.turn != static_cast<int>(Turn::kRight)) {
          const int m = a * 2 + v.turn;
          join_ring_[i][ring_pos_][m] += 1;
          counters_.movement_joins[i][m] += 1;
        }
        record(v.id, v.arrival, "join", i, a);
      }
    }
  }

  // Discharge.
  const PhaseTable& table = phases_;
  for (int i = 0; i < n; ++i) {
    const IntersectionSpec& s = corridor_.intersections[i];
    const int eff = signals_[i].effective;
    for (int a = 0; a < kNumApproaches; ++a) {
      const Approach ap = static_cast<Approach>(a);
      Link& l = link(i, ap);
      for (int t = 0; t < kNumTurns; ++t) {
        const Turn turn = static_cast<Turn>(t);
        bool green;
        int lanes = 1;
        if (turn == Turn::kRight) {
          green = true;
        } else {
          const Movement m = movement_of(ap, turn);
          green = eff >= 0 && table.phases[eff].serves(m);
          lanes = s.lanes(m);
        }
        double& acc = l.accumulator[t];
        if (!green) {
          acc = 0.0;
          continue;
        }
        acc += s.sat_flow * lanes * dt;
        std::deque<int>& q = l.queues[t];
        const auto dest = downstream(i, ap, turn);
        while (acc >= 1.0 && !q.empty()) {
          const int slot = q.front();
          if (dest.first >= 0) {
            const bool branch = dest.second == static_cast<int>(Approach::kInbound) &&
                                (ap == Approach::kInboundCross || ap == Approach::kOutboundCross);
            if (!enter_link(slot, dest.first, static_cast<Approach>(dest.second), t1, branch, !branch)) break;
          }
          q.pop_front();
          acc -= 1.0;
          Vehicle& v = vehicles_[slot];
          v.queued = false;
          record(v.id, t1, "release", i, a);
          if (turn != Turn::kRight) released_[i][a * 2 + t] += 1;
          if (dest.first < 0) {
            const bool corridor_exit = turn == Turn::kThrough &&
                                       ((v.origin == 0 && ap == Approach::kInbound && i == n - 1) ||
                                        (v.origin == 1 && ap == Approach::kOutbound && i == 0));
            exit_vehicle(slot, t1, corridor_exit);
          }
        }
        if (acc >= 1.0) acc -= std::floor(acc);
      }
    }
  }

  // Anyone who joined a queue this step and is still in it has stopped.
  for (int slot : joined) {
    Vehicle& v = vehicles_[slot];
    if (!v.queued) continue;
    v.stops += 1;
    counters_.total_stops += 1;
    if (v.origin <= 1) counters_.corridor_stop_events += 1;
    record(v.id, t1, "stop", v.intersection, v.approach);
  }

  clock_ = t1;
  counters_.steps += 1;

  // Time spent in the network this step, by approach category.
  std::array<double, 3> present{};
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < kNumApproaches; ++a) {
      present[category(static_cast<Approach>(a))] += link(i, static_cast<Approach>(a)).occupancy();
    }
  }
  for (const Origin& org : origins_) present[category(org.approach)] += static_cast<double>(org.pending.size());
  counters_.tt_in += present[0] * dt;
  counters_.tt_out += present[1] * dt;
  counters_.tt_oth += present[2] * dt;

  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < kNumMovements; ++m) {
      const double q = queue(i, static_cast<Movement>(m));
      counters_.queue_sum += q;
      counters_.movement_queue_sum[i][m] += q;
    }
    counters_.reward_sum += reward(i);
  }
}

std::int64_t Simulator::in_network() const {
  std::int64_t count = 0;
  for (const Link& l : links_) count += l.occupancy();
  for (const Origin& org : origins_) count += static_cast<std::int64_t>(org.pending.size());
  return count;
}

int Simulator::queue(int i, Approach a, Turn t) const {
  return static_cast<int>(link(i, a).queues[static_cast<int>(t)].size());
}

int Simulator::queue(int i, Movement m) const {
  const int idx = index_of(m);
  return queue(i, static_cast<Approach>(idx / 2), static_cast<Turn>(idx % 2));
}

double Simulator::head_wait(int i, Movement m) const {
  const int idx = index_of(m);
  const std::deque<int>& q = link(i, static_cast<Approach>(idx / 2)).queues[idx % 2];
  if (q.empty()) return 0.0;
  return std::max(0.0, clock_ - vehicles_[q.front()].joined);
}

int Simulator::link_occupancy(int i, Approach a) const { return link(i, a).occupancy(); }
int Simulator::link_capacity(int i, Approach a) const { return link(i, a).capacity; }

RawObservation Simulator::observe(int i) const {
  RawObservation obs;
  const double window = window_steps_ * options_.step;
  for (int a = 0; a < kNumApproaches; ++a) {
    const Approach ap = static_cast<Approach>(a);
    const Link& l = link(i, ap);
    const double free_speed = l.length / l.travel_time;
    int feed = 0;
    for (const auto& slot : feed_ring_[i]) feed += slot[a];
    std::array<int, kNumTurns> moving{};
    for (int slot : l.in_transit) moving[vehicles_[slot].turn] += 1;
    for (int t = 0; t < 2; ++t) {
      const int m = a * 2 + t;
      int joins = 0;
      for (const auto& slot : join_ring_[i]) joins += slot[m];
      obs.arrival[m] = joins / window;
      obs.queue[m] = static_cast<double>(l.queues[t].size());
      const double total = moving[t] + obs.queue[m];
      obs.speed[m] = total > 0.0 ? free_speed * moving[t] / total : free_speed;
      obs.neighbor[m] = turn_share(i, ap, static_cast<Turn>(t)) * feed / window;
    }
  }
  return obs;
}

std::vector<double> Simulator::normalized_observation(int i) const {
  const RawObservation raw = observe(i);
  const IntersectionSpec& s = corridor_.intersections[i];
  std::vector<double> out(kObservationSize);
  for (int m = 0; m < kNumMovements; ++m) {
    const Link& l = link(i, static_cast<Approach>(m / 2));
    const double storage = l.length / s.stop_headway;
    const double free_speed = l.length / l.travel_time;
    out[m] = raw.arrival[m] / s.sat_flow;
    out[kNumMovements + m] = raw.queue[m] / storage;
    out[2 * kNumMovements + m] = raw.speed[m] / free_speed;
    out[3 * kNumMovements + m] = raw.neighbor[m] / s.sat_flow;
  }
  return out;
}

double Simulator::reward(int i) const {
  double r = 0.0;
  for (int m = 0; m < kNumMovements; ++m) {
    const Movement mv = static_cast<Movement>(m);
    r -= queue(i, mv) + options_.kappa * head_wait(i, mv);
  }
  return r;
}

}  // namespace corridor
