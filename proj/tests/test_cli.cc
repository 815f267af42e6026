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

// Drives the command-line tool end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kScenario = std::string(CORRIDOR_SCENARIO_DIR) + "/corridor6.json";

class Workspace {
 public:
  Workspace() {
    dir_ = fs::temp_directory_path() / ("corridor_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name).string();
  }

 private:
  fs::path dir_;
};

int run(const std::string& args, const std::string& capture = "") {
  std::string cmd = std::string(CORRIDOR_CLI) + " " + args;
  cmd += capture.empty() ? " >/dev/null 2>&1" : " >" + capture + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// Two intersections, short episodes.
std::string small_scenario(double scale) {
  nlohmann::json doc = {
      {"corridor", {{"count", 2}}},
      {"demand",
       {{"levels",
         {{"low", {{"inbound_entry", 0.2 * scale}, {"outbound_entry", 0.15 * scale}, {"cross_each", {0.03 * scale, 0.03 * scale}}}},
          {"medium", {{"inbound_entry", 0.4 * scale}, {"outbound_entry", 0.3 * scale}, {"cross_each", {0.06 * scale, 0.06 * scale}}}},
          {"high", {{"inbound_entry", 0.6 * scale}, {"outbound_entry", 0.4 * scale}, {"cross_each", {0.1 * scale, 0.1 * scale}}}}}},
        {"schedule", {"low", "high"}}}},
      {"episode", {{"duration", 900}, {"warmup", 300}}},
      {"hlc", {{"warmup", 300}, {"step", 600}, {"measurement", 120}}},
  };
  return doc.dump(2);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("simulate") == 1);
  CHECK(run("simulate --scenario " + kScenario + " --strategy nope") == 1);
  CHECK(run("simulate --scenario /nonexistent.json --strategy bp") == 1);
  CHECK(run("no-such-command") == 1);
}

TEST_CASE("zero demand gives zero throughput") {
  Workspace ws;
  const std::string sc = ws.write("zero.json", small_scenario(0.0));
  REQUIRE(run("simulate --scenario " + sc + " --strategy bp --out " + ws.path("out").string()) == 0);
  const std::string metrics = slurp(ws.path("out") / "metrics.csv");
  REQUIRE(count_lines(metrics) == 3);
  const std::string row = metrics.substr(metrics.find('\n', metrics.find('\n') + 1) + 1);
  CHECK(row.rfind("0,0.000000,", 0) == 0);
}

TEST_CASE("same seed twice gives identical files") {
  Workspace ws;
  const std::string sc = ws.write("s.json", small_scenario(1.0));
  for (const char* out : {"a", "b"}) {
    REQUIRE(run("simulate --scenario " + sc + " --strategy bp --seed 4 --out " + ws.path(out).string()) == 0);
  }
  CHECK(slurp(ws.path("a") / "metrics.csv") == slurp(ws.path("b") / "metrics.csv"));
  CHECK(slurp(ws.path("a") / "trajectory.csv") == slurp(ws.path("b") / "trajectory.csv"));
  CHECK(count_lines(slurp(ws.path("a") / "trajectory.csv")) > 10);
}

TEST_CASE("optimizers write identical plans for identical inputs") {
  Workspace ws;
  for (const char* out : {"a", "b"}) {
    REQUIRE(run("optimize-gwc --scenario " + kScenario + " --out " + ws.path(out).string()) == 0);
  }
  CHECK(slurp(ws.path("a") / "plan.json") == slurp(ws.path("b") / "plan.json"));
  CHECK_FALSE(slurp(ws.path("a") / "plan.txt").empty());
  REQUIRE(run("optimize-mfc --scenario " + kScenario + " --out " + ws.path("m").string()) == 0);
  const nlohmann::json plan = nlohmann::json::parse(slurp(ws.path("m") / "plan.json"));
  CHECK(plan.contains("intersections"));
}

TEST_CASE("an infeasible program exits with 2") {
  Workspace ws;
  // 30 veh per cycle arrive against 3 served and 8 stored per lane.
  nlohmann::json doc = {{"corridor", {{"count", 2}, {"entry_inflow", 0.5},
                                       {"defaults", {{"link_length", 60}, {"lanes_coordinated", 1},
                                                     {"green_min", 0.1}, {"green_max", 0.1}}}}}};
  const std::string sc = ws.write("tight.json", doc.dump());
  CHECK(run("optimize-mfc --scenario " + sc + " --out " + ws.path("o").string()) == 2);
}

TEST_CASE("signal-agent training smoke run") {
  Workspace ws;
  const std::string sc = ws.write("s.json", small_scenario(1.0));
  REQUIRE(run("train-hsa --scenario " + sc + " --mode mfc --desk --iterations 5 --hidden 16,16 --out " +
              ws.path("w").string()) == 0);
  const std::string log = slurp(ws.path("w") / "training_mfc.csv");
  CHECK(count_lines(log) == 6);
  for (const char* col : {"corridor_thru", "corridor_stop", "corridor_speed", "network_thru", "avg_tt",
                          "total_reward"}) {
    CHECK(log.substr(0, log.find('\n')).find(col) != std::string::npos);
  }
  CHECK(fs::exists(ws.path("w") / "hsa_mfc.bin"));
}

TEST_CASE("coordinator training needs signal-agent weights") {
  Workspace ws;
  const std::string sc = ws.write("s.json", small_scenario(1.0));
  CHECK(run("train-hlc --scenario " + sc + " --out " + ws.path("w").string()) == 1);
}

TEST_CASE("default configuration echo") {
  Workspace ws;
  const std::string out = ws.path("config.json").string();
  REQUIRE(run("train-hsa --scenario " + kScenario + " --mode pac --print-config", out) == 0);
  const nlohmann::json c = nlohmann::json::parse(slurp(out))["ppo"];
  CHECK(c["clip"] == 0.3);
  CHECK(c["kl_coeff"] == 0.2);
  CHECK(c["value_clip"] == 1000.0);
  CHECK(c["entropy_coeff"] == 0.005);
  CHECK(c["epochs"] == 20);
  CHECK(c["train_batch"] == 20000);
  CHECK(c["minibatch"] == 1024);
  CHECK(c["hidden"] == nlohmann::json::array({256, 128}));
  CHECK(c["lr_schedule"] == nlohmann::json::parse("[[0.0, 0.0005], [200000.0, 0.0001], [500000.0, 1e-05]]"));
  REQUIRE(run("train-hlc --scenario " + kScenario + " --print-config", out) == 0);
  const nlohmann::json h = nlohmann::json::parse(slurp(out));
  CHECK(h["ppo"]["iterations"] == 30);
  CHECK(h["weights"] == nlohmann::json::array({-1.0, -0.01, 10.0}));
}

}  // namespace
