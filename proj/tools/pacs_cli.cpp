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
// Batch experiment runner.
//
//   pacs solve-game --config game.json --seed 7
//   pacs compare --strategies fedpcs,random --seeds 1..20
//
// Exit codes: 0 success, 1 configuration error, 2 solver non-convergence.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pacs/io.hpp"
#include "scenarios.hpp"

namespace {

constexpr const char* kOutEnv = "PACS_OUT_DIR";

struct Flags {
  std::string config;
  std::string seed;
  std::string seeds;
  std::string out;
  std::string strategy;
  std::string strategies;
  std::string mode;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file (defaults when omitted)");
  cmd->add_option("--seed", f.seed, "single seed");
  cmd->add_option("--seeds", f.seeds, "seed list, e.g. 1..20 or 1,2,5");
  cmd->add_option("--out", f.out, std::string("output directory (default: $") + kOutEnv +
                                      ", then the config's output_dir)");
  cmd->add_option("--strategy", f.strategy, "fedpcs | random | gradnorm");
  cmd->add_option("--strategies", f.strategies, "comma-separated strategy list");
  cmd->add_option("--mode", f.mode, "with | without-replacement sampling");
}

std::vector<pacs::Strategy> parse_strategy_list(const std::string& text) {
  std::vector<pacs::Strategy> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(pacs::parse_strategy(part));
  if (out.empty()) throw pacs::ConfigError("strategies: empty list");
  return out;
}

pacs::io::ScenarioConfig resolve(const std::string& name, const Flags& f) {
  pacs::io::ScenarioConfig cfg =
      f.config.empty() ? pacs::io::parse_config("") : pacs::io::load_config(f.config);
  cfg.scenario = pacs::io::parse_scenario(name);
  if (!f.seed.empty() && !f.seeds.empty()) {
    throw pacs::ConfigError("seeds: give --seed or --seeds, not both");
  }
  if (!f.seed.empty()) cfg.seeds = pacs::io::parse_seeds(f.seed);
  if (!f.seeds.empty()) cfg.seeds = pacs::io::parse_seeds(f.seeds);
  if (!f.strategy.empty()) {
    cfg.run.strategy = pacs::parse_strategy(f.strategy);
    cfg.strategies = {cfg.run.strategy};
  }
  if (!f.strategies.empty()) cfg.strategies = parse_strategy_list(f.strategies);
  if (!f.mode.empty()) cfg.run.mode = pacs::parse_sampling_mode(f.mode);
  if (!f.out.empty()) {
    cfg.output_dir = f.out;
  } else if (const char* env = std::getenv(kOutEnv); env && *env) {
    cfg.output_dir = env;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-aware client sampling: game solver and FL simulator"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[] = {"solve-game", "run-fl", "welfare", "adaptive", "compare"};
  const char* help[] = {"solve the mean-field Stackelberg game",
                        "run privacy-aware FL training on a synthetic task",
                        "social welfare and price of anarchy on random interior configs",
                        "adaptive sampling ratio under a budget schedule",
                        "paired multi-strategy runs with a summary table"};
  for (int k = 0; k < 5; ++k) add_common(app.add_subcommand(names[k], help[k]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const pacs::io::ScenarioConfig cfg = resolve(name, flags);
    const pacs::scenarios::Outputs out = pacs::scenarios::run(cfg);
    pacs::scenarios::write_outputs(out, cfg.output_dir);
    for (const auto& f : out.files) std::cout << cfg.output_dir << "/" << f.first << "\n";
    return 0;
  } catch (const pacs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const pacs::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n  residual trace:";
    for (double r : e.trace()) std::cerr << ' ' << r;
    std::cerr << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
