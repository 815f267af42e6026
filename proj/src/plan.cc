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

#include "corridor/plan.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace corridor {
namespace {

using nlohmann::json;

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

json windows_to_json(const std::vector<Window>& ws) {
  json arr = json::array();
  for (const Window& w : ws) arr.push_back({w.start, w.length});
  return arr;
}

std::vector<Window> windows_from_json(const json& arr) {
  std::vector<Window> ws;
  for (const json& w : arr) {
    if (!w.is_array() || w.size() != 2) throw std::invalid_argument("window must be [start, length]");
    ws.push_back({w[0].get<double>(), w[1].get<double>()});
  }
  return ws;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kPac:
      return "PAC";
    case Strategy::kMfc:
      return "MFC";
    case Strategy::kGwc:
      return "GWC";
  }
  return "PAC";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "PAC" || name == "pac") return Strategy::kPac;
  if (name == "MFC" || name == "mfc") return Strategy::kMfc;
  if (name == "GWC" || name == "gwc") return Strategy::kGwc;
  return std::nullopt;
}

bool Window::contains(double time_in_cycle, double cycle) const {
  if (length <= 0.0) return false;
  if (length >= cycle) return true;
  return wrap(time_in_cycle - start, cycle) < length;
}

Window centered_window(double offset, double green, double cycle) {
  return {wrap(offset * cycle - green * cycle / 2.0, cycle), green * cycle};
}

int SignalPlan::num_cycles() const {
  return intersections.empty() ? 0 : static_cast<int>(intersections.front().green.size());
}

int SignalPlan::cycle_at(double t) const {
  const int n = num_cycles();
  if (n == 0) return 0;
  const double k = std::floor((t - epoch) / cycle_length);
  if (k < 0.0) return 0;
  return k >= n - 1 ? n - 1 : static_cast<int>(k);
}

bool SignalPlan::in_inbound_window(int i, double t) const {
  const IntersectionTiming& timing = intersections.at(i);
  if (timing.inbound.empty()) return false;
  const int k = std::min(cycle_at(t), static_cast<int>(timing.inbound.size()) - 1);
  return timing.inbound[k].contains(wrap(t - epoch, cycle_length), cycle_length);
}

bool SignalPlan::in_outbound_window(int i, double t) const {
  const IntersectionTiming& timing = intersections.at(i);
  if (timing.outbound.empty()) return false;
  const int k = std::min(cycle_at(t), static_cast<int>(timing.outbound.size()) - 1);
  return timing.outbound[k].contains(wrap(t - epoch, cycle_length), cycle_length);
}

void SignalPlan::check() const {
  if (!(cycle_length > 0.0) || !std::isfinite(cycle_length)) {
    throw std::invalid_argument("plan cycle length must be positive");
  }
  const int k = num_cycles();
  for (std::size_t i = 0; i < intersections.size(); ++i) {
    const IntersectionTiming& t = intersections[i];
    const std::string where = "intersection " + std::to_string(i + 1);
    if (static_cast<int>(t.green.size()) != k || static_cast<int>(t.offset.size()) != k ||
        static_cast<int>(t.inbound.size()) != k) {
      throw std::invalid_argument(where + ": per-cycle arrays disagree in length");
    }
    if (!t.outbound.empty() && static_cast<int>(t.outbound.size()) != k) {
      throw std::invalid_argument(where + ": outbound windows disagree in length");
    }
    for (int c = 0; c < k; ++c) {
      if (t.green[c] < 0.0 || t.green[c] > 1.0) throw std::invalid_argument(where + ": green outside [0,1]");
      if (t.offset[c] < 0.0 || t.offset[c] >= 1.0) throw std::invalid_argument(where + ": offset outside [0,1)");
      for (const std::vector<Window>* ws : {&t.inbound, &t.outbound}) {
        if (ws->empty()) continue;
        const Window& w = (*ws)[c];
        if (w.start < 0.0 || w.start >= cycle_length || w.length < 0.0 || w.length > cycle_length + 1e-9) {
          throw std::invalid_argument(where + ": window outside its cycle");
        }
      }
    }
  }
}

std::string plan_to_json(const SignalPlan& plan) {
  json j;
  j["format"] = "corridor-signal-plan";
  j["version"] = 1;
  j["strategy"] = std::string(strategy_name(plan.strategy));
  j["cycle_length"] = plan.cycle_length;
  j["epoch"] = plan.epoch;
  json arr = json::array();
  for (const IntersectionTiming& t : plan.intersections) {
    json e;
    e["green"] = t.green;
    e["offset"] = t.offset;
    e["inbound_windows"] = windows_to_json(t.inbound);
    e["outbound_windows"] = windows_to_json(t.outbound);
    e["scenario"] = t.scenario;
    arr.push_back(std::move(e));
  }
  j["intersections"] = std::move(arr);
  return j.dump(2) + "\n";
}

SignalPlan plan_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != "corridor-signal-plan") throw std::invalid_argument("not a signal plan file");
  if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported signal plan version");
  SignalPlan plan;
  const auto strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (!strategy || *strategy == Strategy::kPac) throw std::invalid_argument("plan strategy must be MFC or GWC");
  plan.strategy = *strategy;
  plan.cycle_length = j.at("cycle_length").get<double>();
  plan.epoch = j.at("epoch").get<double>();
  for (const json& e : j.at("intersections")) {
    IntersectionTiming t;
    t.green = e.at("green").get<std::vector<double>>();
    t.offset = e.at("offset").get<std::vector<double>>();
    t.inbound = windows_from_json(e.at("inbound_windows"));
    t.outbound = windows_from_json(e.at("outbound_windows"));
    t.scenario = e.at("scenario").get<std::vector<std::string>>();
    plan.intersections.push_back(std::move(t));
  }
  plan.check();
  return plan;
}

std::string plan_summary(const SignalPlan& plan) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "strategy " << strategy_name(plan.strategy) << ", cycle " << plan.cycle_length << " s, "
      << plan.num_cycles() << " planned cycle(s)\n";
  out << "int  cycle  green  offset  inbound[s]          outbound[s]         label\n";
  for (std::size_t i = 0; i < plan.intersections.size(); ++i) {
    const IntersectionTiming& t = plan.intersections[i];
    for (int k = 0; k < plan.num_cycles(); ++k) {
      out << std::setw(3) << i + 1 << "  " << std::setw(5) << k + 1 << "  " << t.green[k] << "  "
          << std::setw(6) << t.offset[k] << "  [" << std::setw(7) << t.inbound[k].start << ", +"
          << std::setw(7) << t.inbound[k].length << "]  ";
      if (!t.outbound.empty()) {
        out << "[" << std::setw(7) << t.outbound[k].start << ", +" << std::setw(7) << t.outbound[k].length << "]";
      } else {
        out << std::setw(19) << "-";
      }
      out << "  " << (k < static_cast<int>(t.scenario.size()) ? t.scenario[k] : "-") << "\n";
    }
  }
  return out.str();
}

}  // namespace corridor
