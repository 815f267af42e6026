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

#include "corridor/mfc.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace corridor {
namespace {

using milp::MilpProblem;
using milp::Relation;
using milp::Terms;

// A linear expression: terms plus a constant.
struct Expr {
  Terms terms;
  double constant = 0.0;
};

// Shared construction for both programs. With `z_fixed` < 0 the inverse
// cycle length is a variable and every queue is the constant initial queue
// (single-cycle program); otherwise z is a constant and queues after the
// first cycle are variables.
MfcProblem build(const MfcInput& input, int cycles, double z_fixed, double big_m) {
  input.check();
  const CorridorSpec& spec = input.corridor;
  const int n = spec.size();
  const bool z_var = z_fixed < 0.0;
  MfcProblem out;
  MilpProblem& p = out.problem;
  p.big_m = big_m;
  MfcVariables& v = out.vars;
  out.storage_rows.assign(n, {});

  if (z_var) v.z = p.add_continuous("z", 1.0 / spec.cycle_max, 1.0 / spec.cycle_min);
  v.q_out.assign(n, std::vector<int>(cycles));
  v.q_in = v.q_b = v.g = v.x = v.q_out;
  v.l.assign(n, std::vector<int>(cycles + 1, -1));

  // Bounds propagated along the corridor and over the horizon: outflow is
  // capped by supply and by arriving demand, queues grow at most by the
  // largest arrivals net of the smallest discharge. Every big-M below is
  // implied by these bounds.
  const double z_hi = z_var ? 1.0 / spec.cycle_min : z_fixed;
  std::vector<std::vector<double>> l_ub(n, std::vector<double>(cycles + 1, 0.0));
  std::vector<std::vector<double>> in_ub(n, std::vector<double>(cycles, 0.0));
  std::vector<std::vector<double>> out_ub = in_ub;
  for (int i = 0; i < n; ++i) l_ub[i][0] = input.initial_queues[i];
  for (int k = 0; k < cycles; ++k) {
    for (int i = 0; i < n; ++i) {
      const IntersectionSpec& s = spec.intersections[i];
      const double lanes = s.lanes_coordinated;
      const double cap = s.sat_flow * lanes;
      in_ub[i][k] = i == 0 ? input.entry_inflow : s.turn_ratio * out_ub[i - 1][k];
      out_ub[i][k] = std::min(s.green_max * cap, l_ub[i][k] * lanes * z_hi + in_ub[i][k] + s.branch_max);
      if (!z_var) {
        const double growth = (in_ub[i][k] + s.branch_max - s.green_min * cap) / (z_fixed * lanes);
        l_ub[i][k + 1] = std::max(0.0, l_ub[i][k] + growth);
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const IntersectionSpec& s = spec.intersections[i];
    const std::string tag = "_" + std::to_string(i + 1) + "_";
    for (int k = 0; k < cycles; ++k) {
      const std::string cell = tag + std::to_string(k + 1);
      v.q_out[i][k] = p.add_continuous("q_out" + cell, 0.0, out_ub[i][k], 1.0);
      if (i == 0) {
        v.q_in[i][k] = p.add_continuous("q_in" + cell, input.entry_inflow, input.entry_inflow);
      } else {
        v.q_in[i][k] = p.add_continuous("q_in" + cell, 0.0, in_ub[i][k]);
      }
      v.q_b[i][k] = p.add_continuous("q_b" + cell, s.branch_min, s.branch_max);
      v.g[i][k] = p.add_continuous("g" + cell, s.green_min, s.green_max);
      v.x[i][k] = p.add_binary("x" + cell);
      if (!z_var) v.l[i][k + 1] = p.add_continuous("l" + tag + std::to_string(k + 2), 0.0, std::min(big_m, l_ub[i][k + 1]));
    }
  }

  for (int i = 0; i < n; ++i) {
    const IntersectionSpec& s = spec.intersections[i];
    const double lanes = s.lanes_coordinated;
    const double storage = s.link_length / s.stop_headway;  // L/h, veh per lane
    const double cap = s.sat_flow * lanes;
    for (int k = 0; k < cycles; ++k) {
      const std::string cell = "_" + std::to_string(i + 1) + "_" + std::to_string(k + 1);
      const int qo = v.q_out[i][k], qi = v.q_in[i][k], qb = v.q_b[i][k], g = v.g[i][k], x = v.x[i][k];
      const int lk = v.l[i][k];
      const double l0 = input.initial_queues[i];
      const double m_supply = std::min(big_m, cap * s.green_max);
      const double m_demand =
          std::min(big_m, l_ub[i][k] * lanes * z_hi + p.variables[qi].upper + p.variables[qb].upper);

      // Arriving demand l*n*z + q_in + q_b.
      Expr demand;
      demand.terms = {{qi, 1.0}, {qb, 1.0}};
      if (lk >= 0) {
        demand.terms.push_back({lk, lanes * z_fixed});
      } else if (z_var) {
        demand.terms.push_back({v.z, l0 * lanes});
      } else {
        demand.constant = l0 * lanes * z_fixed;
      }
      auto minus = [](const Terms& t) {
        Terms r;
        for (const auto& [j, a] : t) r.push_back({j, -a});
        return r;
      };

      // C1: q_out = min(g q_s n, demand) via the big-M pair.
      p.add_constraint({{qo, 1.0}, {g, -cap}}, Relation::kLessEqual, 0.0, "C1_supply" + cell);
      Terms t6 = minus(demand.terms);
      t6.push_back({qo, 1.0});
      p.add_constraint(t6, Relation::kLessEqual, demand.constant, "C1_demand" + cell);
      p.add_constraint({{qo, 1.0}, {g, -cap}, {x, -m_supply}}, Relation::kGreaterEqual, -m_supply, "C1_supply_lb" + cell);
      Terms t8 = t6;
      t8.push_back({x, m_demand});
      p.add_constraint(t8, Relation::kGreaterEqual, demand.constant, "C1_demand_lb" + cell);

      // C2: inflow continues from the upstream outflow.
      if (i > 0) {
        p.add_constraint({{qi, 1.0}, {v.q_out[i - 1][k], -s.turn_ratio}}, Relation::kEqual, 0.0, "C2" + cell);
      }

      // C3: in-cycle maximum queue, q_s*C*max(t_c, t_s) <= L/h, times z.
      {
        Terms tc = {{qb, 1.0 / lanes}};
        double rhs = 0.0;
        if (z_var) {
          tc.push_back({v.z, l0 - storage});
        } else if (lk >= 0) {
          tc.push_back({lk, z_fixed});
          rhs = storage * z_fixed;
        } else {
          rhs = (storage - l0) * z_fixed;
        }
        out.storage_rows[i].push_back(static_cast<int>(p.constraints.size()));
        p.add_constraint(tc, Relation::kLessEqual, rhs, "C3_clear" + cell);

        Terms ts;
        double ts_rhs = 0.0;
        double zcoef = storage;
        if (s.turn_ratio == 1.0) {
          ts = {{qo, 1.0 / lanes}};
        } else {
          ts = {{qo, 1.0 / lanes}, {g, -s.turn_ratio * s.sat_flow}};
          zcoef = (1.0 - s.turn_ratio) * storage;
        }
        if (z_var) {
          ts.push_back({v.z, -zcoef});
        } else {
          ts_rhs = zcoef * z_fixed;
        }
        out.storage_rows[i].push_back(static_cast<int>(p.constraints.size()));
        p.add_constraint(ts, Relation::kLessEqual, ts_rhs, "C3_saturated" + cell);
      }

      if (z_var) continue;

      // C6: l(k+1) = max(l(k) + (q_in + q_b - g q_s n) C / n, 0).
      const double cyc = 1.0 / z_fixed;
      const int ln = v.l[i][k + 1];
      Terms growth = {{qi, -cyc / lanes}, {qb, -cyc / lanes}, {g, cyc * s.sat_flow}};
      double base = 0.0;  // constant part of l(k) moved to the right-hand side
      if (lk >= 0) {
        growth.push_back({lk, -1.0});
      } else {
        base = l0;
      }
      Terms t15 = growth;
      t15.push_back({ln, 1.0});
      p.add_constraint(t15, Relation::kGreaterEqual, base, "C6_lb" + cell);
      const double m_off = std::min(big_m, l_ub[i][k + 1]);
      const double m_grow = std::min(big_m, l_ub[i][k + 1] + s.green_max * s.sat_flow * cyc);
      Terms t17 = t15;
      t17.push_back({x, m_grow});
      p.add_constraint(t17, Relation::kLessEqual, base + m_grow, "C6_ub" + cell);
      p.add_constraint({{ln, 1.0}, {x, -m_off}}, Relation::kLessEqual, 0.0, "C6_off" + cell);

      // Vehicle balance: in either regime the carried queue equals the old
      // queue plus arrivals minus outflow over the cycle. Valid for every
      // integer solution and it keeps the relaxation from inventing queues.
      {
        Terms bal = {{ln, 1.0}, {qi, -cyc / lanes}, {qb, -cyc / lanes}, {qo, cyc / lanes}};
        double bal_rhs = 0.0;
        if (lk >= 0) {
          bal.push_back({lk, -1.0});
        } else {
          bal_rhs = l0;
        }
        p.add_constraint(bal, Relation::kEqual, bal_rhs, "C6_balance" + cell);
      }

      // C7: no spillover after the cycle, in both printed forms.
      out.storage_rows[i].push_back(static_cast<int>(p.constraints.size()));
      p.add_constraint({{ln, 1.0}}, Relation::kLessEqual, storage, "C7_storage" + cell);
      Terms t20 = {{qi, 1.0 / lanes}, {qb, 1.0 / lanes}, {g, -s.sat_flow}};
      double rhs20 = storage * z_fixed;
      if (lk >= 0) {
        t20.push_back({lk, z_fixed});
      } else {
        rhs20 -= l0 * z_fixed;
      }
      out.storage_rows[i].push_back(static_cast<int>(p.constraints.size()));
      p.add_constraint(t20, Relation::kLessEqual, rhs20, "C7_next" + cell);
    }
  }
  return out;
}

MilpProblem without_rows(const MilpProblem& p, const std::vector<int>& rows) {
  MilpProblem q = p;
  std::vector<int> sorted = rows;
  std::sort(sorted.rbegin(), sorted.rend());
  for (int r : sorted) q.constraints.erase(q.constraints.begin() + r);
  return q;
}

// First intersection whose storage rows, when dropped, make the program
// feasible (1-based), or 0.
int binding_intersection(const MfcProblem& mp, const milp::MilpOptions& options) {
  for (std::size_t i = 0; i < mp.storage_rows.size(); ++i) {
    if (milp::solve_milp(without_rows(mp.problem, mp.storage_rows[i]), options).optimal()) {
      return static_cast<int>(i) + 1;
    }
  }
  return 0;
}

std::vector<double> sum_of(const MilpProblem& p, const std::vector<std::vector<int>>& idx) {
  std::vector<double> c(p.num_variables(), 0.0);
  for (const auto& row : idx) {
    for (int j : row) c[j] += 1.0;
  }
  return c;
}

void fill_cells(const MfcProblem& mp, const MfcInput& input, const std::vector<double>& x, double z,
                std::vector<std::vector<MfcCell>>& cells) {
  const MfcVariables& v = mp.vars;
  const int n = static_cast<int>(v.q_out.size());
  const int cycles = n > 0 ? static_cast<int>(v.q_out[0].size()) : 0;
  cells.assign(n, std::vector<MfcCell>(cycles));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < cycles; ++k) {
      MfcCell& c = cells[i][k];
      c.q_out = x[v.q_out[i][k]];
      c.q_in = x[v.q_in[i][k]];
      c.q_b = x[v.q_b[i][k]];
      c.g = x[v.g[i][k]];
      c.x = std::round(x[v.x[i][k]]);
      c.l = v.l[i][k] >= 0 ? x[v.l[i][k]] : input.initial_queues[i];
      if (v.l[i][k + 1] >= 0) {
        c.l_next = x[v.l[i][k + 1]];
      } else {
        // Single-cycle program: evaluate the queue recursion directly.
        const IntersectionSpec& s = input.corridor.intersections[i];
        const double lanes = s.lanes_coordinated;
        c.l_next = std::max(c.l + (c.q_in + c.q_b - c.g * s.sat_flow * lanes) / (z * lanes), 0.0);
      }
    }
  }
}

}  // namespace

MfcInput MfcInput::from_spec(const CorridorSpec& spec) {
  MfcInput in;
  in.corridor = spec;
  in.initial_queues.assign(spec.size(), 0.0);
  in.entry_inflow = spec.entry_inflow;
  in.horizon_cycles = spec.horizon_cycles;
  return in;
}

void MfcInput::check() const {
  const std::vector<ValidationError> errors = validate(corridor);
  if (!errors.empty()) throw std::invalid_argument(format_errors(errors));
  if (static_cast<int>(initial_queues.size()) != corridor.size()) {
    throw std::invalid_argument("initial queues must list every intersection");
  }
  for (int i = 0; i < corridor.size(); ++i) {
    const IntersectionSpec& s = corridor.intersections[i];
    if (!std::isfinite(initial_queues[i]) || initial_queues[i] < 0.0) {
      throw std::invalid_argument("intersection " + std::to_string(i + 1) + ": initial queue must be non-negative");
    }
    if (initial_queues[i] * s.stop_headway > s.link_length + 1e-9) {
      throw std::invalid_argument("intersection " + std::to_string(i + 1) + ": initial queue already spills back");
    }
  }
  if (!std::isfinite(entry_inflow) || entry_inflow < 0.0) throw std::invalid_argument("entry inflow must be non-negative");
  if (horizon_cycles < 1) throw std::invalid_argument("horizon must be at least one cycle");
}

std::string scenario_label(FlowScenario s) {
  switch (s) {
    case FlowScenario::k11:
      return "1.1";
    case FlowScenario::k12:
      return "1.2";
    case FlowScenario::k21:
      return "2.1";
    case FlowScenario::k22:
      return "2.2";
  }
  return "?";
}

MfcProblem build_cycle_length_problem(const MfcInput& input, double big_m) {
  return build(input, 1, -1.0, big_m);
}

MfcProblem build_green_split_problem(const MfcInput& input, double z, double big_m) {
  if (!(z > 0.0)) throw std::invalid_argument("fixed z must be positive");
  return build(input, input.horizon_cycles, z, big_m);
}

CycleLengthResult optimize_cycle_length(const MfcInput& input, const MfcOptions& options) {
  const MfcProblem mp = build_cycle_length_problem(input, options.big_m);
  std::vector<double> prefer_short(mp.problem.num_variables(), 0.0);
  prefer_short[mp.vars.z] = 1.0;
  const milp::MilpSolution sol =
      milp::solve_milp_lexicographic(mp.problem, {prefer_short, sum_of(mp.problem, mp.vars.g)}, options.milp);
  if (!sol.optimal()) {
    const int i = binding_intersection(mp, options.milp);
    std::ostringstream msg;
    msg << "cycle length program infeasible";
    if (i > 0) msg << ": storage limit at intersection " << i << " cannot hold for any cycle in range";
    throw InfeasibleError(msg.str(), i, 1);
  }
  CycleLengthResult r;
  r.z = sol.values[mp.vars.z];
  r.objective = sol.objective;
  r.stats = sol.stats;
  std::vector<std::vector<MfcCell>> cells;
  fill_cells(mp, input, sol.values, r.z, cells);
  for (auto& row : cells) r.first_cycle.push_back(row[0]);
  return r;
}

GreenSplitResult optimize_green_splits(const MfcInput& input, double z, const MfcOptions& options) {
  const MfcProblem mp = build_green_split_problem(input, z, options.big_m);
  const milp::MilpSolution sol =
      milp::solve_milp_lexicographic(mp.problem, {sum_of(mp.problem, mp.vars.g)}, options.milp);
  if (!sol.optimal()) {
    // Shortest infeasible prefix of the horizon gives the cycle.
    int cycle = input.horizon_cycles;
    MfcProblem failing = mp;
    for (int k = 1; k < input.horizon_cycles; ++k) {
      MfcInput prefix = input;
      prefix.horizon_cycles = k;
      MfcProblem sub = build_green_split_problem(prefix, z, options.big_m);
      if (!milp::solve_milp(sub.problem, options.milp).optimal()) {
        cycle = k;
        failing = std::move(sub);
        break;
      }
    }
    const int i = binding_intersection(failing, options.milp);
    std::ostringstream msg;
    msg << "green split program infeasible at cycle " << cycle;
    if (i > 0) msg << ", intersection " << i << " (storage too small for the demand floor)";
    throw InfeasibleError(msg.str(), i, cycle);
  }
  GreenSplitResult r;
  r.objective = sol.objective;
  r.stats = sol.stats;
  fill_cells(mp, input, sol.values, z, r.cells);
  return r;
}

SupplyDemandSplits compute_supply_demand_splits(const IntersectionSpec& spec, const MfcCell& cell, double z) {
  const double qs = spec.sat_flow;
  const double n = spec.lanes_coordinated;
  const double f = spec.turn_ratio;
  SupplyDemandSplits s;
  s.t_c = (cell.q_b / n + cell.l * z) / qs;
  if (f == 1.0) {
    s.t_s = cell.q_out / (qs * n);
    s.t_u = (cell.g * qs - cell.q_out / n) / qs;
  } else {
    s.t_s = (cell.q_out / n - cell.g * f * qs) / (qs * (1.0 - f));
    s.t_u = (cell.g * qs - cell.q_out / n) / (qs * (1.0 - f));
  }
  return s;
}

FlowScenario classify_scenario(const SupplyDemandSplits& s, double turn_ratio) {
  if (s.t_u > kSaturationTol) {
    return (s.t_s >= s.t_c && turn_ratio != 1.0) ? FlowScenario::k11 : FlowScenario::k12;
  }
  return s.t_s >= s.t_c ? FlowScenario::k21 : FlowScenario::k22;
}

double optimal_offset(FlowScenario scenario, const OffsetTerms& t) {
  switch (scenario) {
    case FlowScenario::k11:
    case FlowScenario::k12:
      return t.tz - t.g / 2.0 + t.g_prev / 2.0;
    case FlowScenario::k21:
      return (1.0 / t.f - 1.0) * t.t_s - t.t_c / t.f + t.g / 2.0 - t.g_prev / 2.0 + t.tz;
    case FlowScenario::k22:
      return t.g / 2.0 - t.g_prev / 2.0 + t.g_next + t.tz - t.t_c - t.q_b / (t.q_s * t.lanes) - 1.0;
  }
  return 0.0;
}

double clamp_offset(double optimal, double lower, double upper) {
  return std::max(lower, std::min(optimal, upper));
}

double normalize_offset(double offset) {
  double r = offset - std::floor(offset);
  if (r >= 1.0) r = 0.0;
  return r;
}

void compute_offsets(const CorridorSpec& corridor, double z, std::vector<std::vector<MfcCell>>& cells) {
  const int n = static_cast<int>(cells.size());
  for (int i = 0; i < n; ++i) {
    const IntersectionSpec& s = corridor.intersections[i];
    const int cycles = static_cast<int>(cells[i].size());
    for (int k = 0; k < cycles; ++k) {
      MfcCell& c = cells[i][k];
      const SupplyDemandSplits sp = compute_supply_demand_splits(s, c, z);
      c.t_c = sp.t_c;
      c.t_s = sp.t_s;
      c.t_u = sp.t_u;
      c.scenario = classify_scenario(sp, s.turn_ratio);
      if (i == 0) {
        c.offset_optimal = c.offset_clamped = c.offset = 0.0;
        continue;
      }
      OffsetTerms t;
      t.tz = s.free_flow_tt * z;
      t.g = c.g;
      t.g_prev = cells[i - 1][k].g;
      t.g_next = k + 1 < cycles ? cells[i][k + 1].g : c.g;
      t.f = s.turn_ratio;
      t.t_s = sp.t_s;
      t.t_c = sp.t_c;
      t.q_b = c.q_b;
      t.q_s = s.sat_flow;
      t.lanes = s.lanes_coordinated;
      c.offset_optimal = optimal_offset(c.scenario, t);
      c.offset_clamped = clamp_offset(c.offset_optimal, s.offset_min, s.offset_max);
      c.offset = normalize_offset(c.offset_clamped);
    }
  }
}

MfcSolution solve_mfc(const MfcInput& input, const MfcOptions& options) {
  const CycleLengthResult cycle = optimize_cycle_length(input, options);
  GreenSplitResult splits = optimize_green_splits(input, cycle.z, options);
  MfcSolution sol;
  sol.z = cycle.z;
  sol.cycle_objective = cycle.objective;
  sol.objective = splits.objective;
  sol.cells = std::move(splits.cells);
  sol.stats.nodes = cycle.stats.nodes + splits.stats.nodes;
  sol.stats.pivots = cycle.stats.pivots + splits.stats.pivots;
  compute_offsets(input.corridor, sol.z, sol.cells);
  return sol;
}

SignalPlan build_mfc_plan(const MfcSolution& solution, double epoch) {
  SignalPlan plan;
  plan.strategy = Strategy::kMfc;
  plan.cycle_length = solution.cycle_length();
  plan.epoch = epoch;
  const int n = static_cast<int>(solution.cells.size());
  const int cycles = n > 0 ? static_cast<int>(solution.cells[0].size()) : 0;
  std::vector<double> absolute(cycles, 0.0);
  for (int i = 0; i < n; ++i) {
    IntersectionTiming t;
    for (int k = 0; k < cycles; ++k) {
      const MfcCell& c = solution.cells[i][k];
      absolute[k] = i == 0 ? 0.0 : normalize_offset(absolute[k] + c.offset);
      t.green.push_back(c.g);
      t.offset.push_back(absolute[k]);
      t.inbound.push_back(centered_window(absolute[k], c.g, plan.cycle_length));
      t.scenario.push_back(scenario_label(c.scenario));
    }
    plan.intersections.push_back(std::move(t));
  }
  return plan;
}

}  // namespace corridor
