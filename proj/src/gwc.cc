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

#include "corridor/gwc.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "corridor/mfc.h"

namespace corridor {
namespace {

using milp::Relation;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
Interval scale(Interval a, double c) {
  return c >= 0.0 ? Interval{a.lo * c, a.hi * c} : Interval{a.hi * c, a.lo * c};
}

}  // namespace

GwcInput GwcInput::from_spec(const CorridorSpec& spec) {
  GwcInput in;
  in.corridor = spec;
  for (const IntersectionSpec& s : spec.intersections) {
    in.inbound_green.push_back(s.green_max);
    in.outbound_green.push_back(s.green_max);
  }
  return in;
}

void GwcInput::check() const {
  const std::vector<ValidationError> errors = validate(corridor);
  if (!errors.empty()) throw std::invalid_argument(format_errors(errors));
  if (free_splits) return;
  const std::size_t n = corridor.intersections.size();
  if (inbound_green.size() != n || outbound_green.size() != n) {
    throw std::invalid_argument("fixed green splits must list every intersection");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (double g : {inbound_green[i], outbound_green[i]}) {
      if (!std::isfinite(g) || g < 0.0 || g > 1.0) {
        throw std::invalid_argument("intersection " + std::to_string(i + 1) + ": green split outside [0,1]");
      }
    }
  }
}

GwcProblem build_gwc_problem(const GwcInput& input) {
  input.check();
  const CorridorSpec& spec = input.corridor;
  const int n = spec.size();
  GwcProblem out;
  milp::MilpProblem& p = out.problem;
  GwcVariables& v = out.vars;
  const double zmin = 1.0 / spec.cycle_max, zmax = 1.0 / spec.cycle_min;
  v.z = p.add_continuous("z", zmin, zmax);

  std::vector<Interval> g_range(n), gb_range(n);
  for (int j = 0; j < n; ++j) {
    const IntersectionSpec& s = spec.intersections[j];
    const std::string tag = "_" + std::to_string(j + 1);
    if (input.free_splits) {
      g_range[j] = gb_range[j] = {s.green_min, s.green_max};
    } else {
      g_range[j] = {input.inbound_green[j], input.inbound_green[j]};
      gb_range[j] = {input.outbound_green[j], input.outbound_green[j]};
    }
    v.g.push_back(p.add_continuous("g" + tag, g_range[j].lo, g_range[j].hi));
    v.g_bar.push_back(p.add_continuous("gb" + tag, gb_range[j].lo, gb_range[j].hi));
    v.w.push_back(p.add_continuous("w" + tag, 0.0, g_range[j].hi));
    v.w_bar.push_back(p.add_continuous("wb" + tag, 0.0, gb_range[j].hi));
    p.add_constraint({{v.w[j], 1.0}, {v.g[j], -1.0}}, Relation::kLessEqual, 0.0, "w_in_green" + tag);
    p.add_constraint({{v.w_bar[j], 1.0}, {v.g_bar[j], -1.0}}, Relation::kLessEqual, 0.0, "wb_in_green" + tag);
  }
  v.b.assign(n, -1);
  v.b_bar.assign(n, -1);
  v.loop_bits.assign(n, {});
  v.loop_base.assign(n, 0);

  for (int i = 1; i < n; ++i) {
    const IntersectionSpec& s = spec.intersections[i];
    const std::string tag = "_" + std::to_string(i + 1);
    v.b[i] = p.add_continuous("b" + tag, 0.0, 1.0, 1.0);
    v.b_bar[i] = p.add_continuous("bb" + tag, 0.0, 1.0, 1.0);
    for (int j : {i - 1, i}) {
      p.add_constraint({{v.w[j], 1.0}, {v.b[i], -0.5}}, Relation::kGreaterEqual, 0.0, "band_lo" + tag);
      p.add_constraint({{v.w[j], 1.0}, {v.b[i], 0.5}, {v.g[j], -1.0}}, Relation::kLessEqual, 0.0, "band_hi" + tag);
      p.add_constraint({{v.w_bar[j], 1.0}, {v.b_bar[i], -0.5}}, Relation::kGreaterEqual, 0.0, "bband_lo" + tag);
      p.add_constraint({{v.w_bar[j], 1.0}, {v.b_bar[i], 0.5}, {v.g_bar[j], -1.0}}, Relation::kLessEqual, 0.0,
                       "bband_hi" + tag);
    }

    // Range of the loop expression decides the admissible integers.
    const double tt = s.free_flow_tt;
    const Interval w_prev{0.0, g_range[i - 1].hi}, w_cur{0.0, g_range[i].hi};
    const Interval wb_prev{0.0, gb_range[i - 1].hi}, wb_cur{0.0, gb_range[i].hi};
    const Interval loop = (w_prev - w_cur) + (wb_cur - wb_prev) + Interval{2.0 * tt * zmin, 2.0 * tt * zmax} +
                          scale(g_range[i] - g_range[i - 1], 0.5) + scale(gb_range[i - 1] - gb_range[i], 0.5);
    const int m_lo = static_cast<int>(std::ceil(loop.lo - 1e-9));
    const int m_hi = static_cast<int>(std::floor(loop.hi + 1e-9));
    if (m_hi < m_lo) {
      out.empty_loop_range = true;
      continue;
    }
    v.loop_base[i] = m_lo;
    const int span = m_hi - m_lo;
    milp::Terms terms = {{v.w[i - 1], 1.0}, {v.w[i], -1.0}, {v.w_bar[i], 1.0}, {v.w_bar[i - 1], -1.0},
                         {v.z, 2.0 * tt}, {v.g[i], 0.5}, {v.g[i - 1], -0.5}, {v.g_bar[i - 1], 0.5},
                         {v.g_bar[i], -0.5}};
    milp::Terms cap;
    int bits = 0;
    while ((1 << bits) <= span) ++bits;
    for (int k = 0; k < bits; ++k) {
      const int y = p.add_binary("m" + tag + "_bit" + std::to_string(k));
      v.loop_bits[i].push_back(y);
      terms.push_back({y, -static_cast<double>(1 << k)});
      cap.push_back({y, static_cast<double>(1 << k)});
    }
    p.add_constraint(terms, Relation::kEqual, static_cast<double>(m_lo), "loop" + tag);
    if (bits > 0 && (1 << bits) - 1 > span) {
      p.add_constraint(cap, Relation::kLessEqual, static_cast<double>(span), "loop_range" + tag);
    }
  }
  return out;
}

GwcSolution optimize_gwc(const GwcInput& input, const milp::MilpOptions& options) {
  const GwcProblem gp = build_gwc_problem(input);
  const CorridorSpec& spec = input.corridor;
  const int n = spec.size();
  const GwcVariables& v = gp.vars;
  GwcSolution sol;

  milp::MilpSolution ms;
  if (!gp.empty_loop_range) {
    std::vector<double> prefer_short(gp.problem.num_variables(), 0.0);
    prefer_short[v.z] = 1.0;
    ms = milp::solve_milp_lexicographic(gp.problem, {prefer_short}, options);
  }
  sol.stats = ms.stats;
  if (!ms.optimal()) {
    sol.fallback = true;
    sol.z = 1.0 / spec.cycle_min;
    for (int j = 0; j < n; ++j) {
      const IntersectionSpec& s = spec.intersections[j];
      sol.g.push_back(input.free_splits ? s.green_max : input.inbound_green[j]);
      sol.g_bar.push_back(input.free_splits ? s.green_max : input.outbound_green[j]);
    }
    sol.b.assign(n, 0.0);
    sol.b_bar.assign(n, 0.0);
    sol.w.assign(n, 0.0);
    sol.w_bar.assign(n, 0.0);
    sol.phi.assign(n, 0.0);
    sol.phi_bar.assign(n, 0.0);
    sol.loop_integer.assign(n, 0);
    sol.offsets.assign(n, 0.0);
    return sol;
  }

  const std::vector<double>& x = ms.values;
  sol.z = x[v.z];
  for (int j = 0; j < n; ++j) {
    sol.g.push_back(x[v.g[j]]);
    sol.g_bar.push_back(x[v.g_bar[j]]);
    sol.w.push_back(x[v.w[j]]);
    sol.w_bar.push_back(x[v.w_bar[j]]);
  }
  sol.b.assign(n, 0.0);
  sol.b_bar.assign(n, 0.0);
  sol.phi.assign(n, 0.0);
  sol.phi_bar.assign(n, 0.0);
  sol.loop_integer.assign(n, 0);
  sol.offsets.assign(n, 0.0);
  if (n == 1) {
    sol.b[0] = sol.g[0];
    sol.b_bar[0] = sol.g_bar[0];
    sol.objective = sol.g[0] + sol.g_bar[0];
    return sol;
  }
  for (int i = 1; i < n; ++i) {
    sol.b[i] = x[v.b[i]];
    sol.b_bar[i] = x[v.b_bar[i]];
    int m = v.loop_base[i];
    for (std::size_t k = 0; k < v.loop_bits[i].size(); ++k) {
      m += static_cast<int>(std::lround(x[v.loop_bits[i][k]])) << k;
    }
    sol.loop_integer[i] = m;
    const double tz = spec.intersections[i].free_flow_tt * sol.z;
    sol.phi[i] = -sol.g[i - 1] / 2.0 + sol.g[i] / 2.0 + sol.w[i - 1] - sol.w[i] + tz;
    sol.phi_bar[i] = m - sol.phi[i];
    sol.offsets[i] = normalize_offset(sol.offsets[i - 1] + sol.phi[i]);
  }
  sol.objective = ms.objective;
  return sol;
}

SignalPlan gwc_plan(const GwcSolution& solution, double epoch) {
  SignalPlan plan;
  plan.strategy = Strategy::kGwc;
  plan.cycle_length = solution.cycle_length();
  plan.epoch = epoch;
  for (std::size_t j = 0; j < solution.g.size(); ++j) {
    IntersectionTiming t;
    t.green = {solution.g[j]};
    t.offset = {solution.offsets[j]};
    t.inbound = {centered_window(solution.offsets[j], solution.g[j], plan.cycle_length)};
    t.outbound = {centered_window(solution.offsets[j], solution.g_bar[j], plan.cycle_length)};
    t.scenario = {solution.fallback ? "sync" : "band"};
    plan.intersections.push_back(std::move(t));
  }
  return plan;
}

double proportional_split(const IntersectionSpec& spec, const ApproachFlows& flows) {
  constexpr double kFloor = 1e-6;
  const double y_ct = flows.coordinated_through / (spec.sat_flow * spec.lanes_coordinated) + kFloor;
  const double y_cl = flows.coordinated_left / spec.sat_flow + kFloor;
  const double y_xt = flows.cross_through / (spec.sat_flow * spec.cross_lanes) + kFloor;
  const double y_xl = flows.cross_left / spec.sat_flow + kFloor;
  const double share = y_ct / (y_ct + y_cl + y_xt + y_xl);
  return std::clamp(share, spec.green_min, spec.green_max);
}

}  // namespace corridor
