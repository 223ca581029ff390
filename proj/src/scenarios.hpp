// Copyright 2026 The PACS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pacs/adaptive.hpp"
#include "pacs/fltrain.hpp"
#include "pacs/game.hpp"
#include "pacs/io.hpp"
#include "pacs/welfare.hpp"

namespace pacs::scenarios {

// Named in-memory output files; written by write_outputs().
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string name, std::string body) {
    files.emplace_back(std::move(name), std::move(body));
  }
};

std::string file_stem(const io::ScenarioConfig& cfg, const std::string& seed_tag);

GameConfig game_for_seed(const io::ScenarioConfig& cfg, std::uint64_t seed);

// Random interior welfare instance: exogenous rewards and drawn varphi and
// initial budgets.
GameConfig welfare_instance(const io::ScenarioConfig& cfg, std::uint64_t seed);

struct WelfareOutcome {
  std::uint64_t seed = 0;
  GameSolution solution;
  welfare::WelfareReport report;
  bool ordering_ok = false;  // opt >= nash >= rand
};

WelfareOutcome run_welfare_instance(const io::ScenarioConfig& cfg, std::uint64_t seed);

struct CompareRow {
  std::string strategy;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double final_accuracy_loss = 0.0;
  double final_dist_sq = 0.0;
};

std::vector<CompareRow> compare_runs(const io::ScenarioConfig& cfg);

Outputs solve_game(const io::ScenarioConfig& cfg, std::uint64_t seed);
Outputs run_fl(const io::ScenarioConfig& cfg, std::uint64_t seed);
Outputs welfare_table(const io::ScenarioConfig& cfg);
Outputs adaptive_run(const io::ScenarioConfig& cfg, std::uint64_t seed);
Outputs compare(const io::ScenarioConfig& cfg);

// Dispatches the configured scenario over every seed.
Outputs run(const io::ScenarioConfig& cfg);

void write_outputs(const Outputs& out, const std::string& dir);

std::string fl_record_csv(const fl::FLRunRecord& rec);
std::string plan_csv(const std::vector<adaptive::PlanRow>& plan);

}  // namespace pacs::scenarios
