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
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pacs/adaptive.hpp"
#include "pacs/baselines.hpp"
#include "pacs/common.hpp"
#include "pacs/fltrain.hpp"
#include "pacs/game_primitives.hpp"

namespace pacs::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class Scenario { kSolveGame, kRunFl, kWelfare, kAdaptive, kCompare };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kSolveGame: return "solve-game";
    case Scenario::kRunFl: return "run-fl";
    case Scenario::kWelfare: return "welfare";
    case Scenario::kAdaptive: return "adaptive";
    case Scenario::kCompare: return "compare";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& s) {
  for (Scenario k : {Scenario::kSolveGame, Scenario::kRunFl, Scenario::kWelfare,
                     Scenario::kAdaptive, Scenario::kCompare}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("scenario: unknown scenario '" + s + "'");
}

// Random interior welfare instances: exogenous rewards, varphi and initial
// budgets drawn per seed.
struct WelfareSpec {
  double varphi_min = 0.1;
  double varphi_max = 0.9;
  double reward_min = 0.2;
  double reward_max = 0.6;
  double initial_budget_max = 1.0;
};

struct AdaptiveSpec {
  double G = 1.0;
  double H = 0.0;
  bool freeze_round_index = false;
  // Explicit schedule, or a linear ramp B_start -> B_end when empty.
  std::vector<double> B;
  double B_start = 1.0;
  double B_end = 1.0;

  adaptive::Schedule schedule(int T) const {
    adaptive::Schedule s;
    if (!B.empty()) {
      s.B = B;
    } else {
      s.B.resize(static_cast<std::size_t>(T) + 1);
      for (int t = 0; t <= T; ++t) {
        s.B[static_cast<std::size_t>(t)] = B_start + (B_end - B_start) * t / T;
      }
    }
    s.validate(T);
    return s;
  }
};

struct ScenarioConfig {
  Scenario scenario = Scenario::kSolveGame;
  GameConfig game;
  fl::TaskSpec task;
  fl::RunOptions run;
  std::vector<Strategy> strategies{Strategy::kPrivacyAware, Strategy::kRandom};
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "pacs-out";
  WelfareSpec welfare;
  AdaptiveSpec adaptive;

  void validate() const {
    game.validate();
    if (seeds.empty()) throw ConfigError("seeds: must be non-empty");
    if (strategies.empty()) throw ConfigError("strategies: must be non-empty");
    if (!(run.eta > 0.0)) throw ConfigError("run.eta: must be > 0");
    if (!(task.regularization > 0.0)) throw ConfigError("task.regularization: must be > 0");
    if (!(welfare.varphi_min > 0.0 && welfare.varphi_min < welfare.varphi_max &&
          welfare.varphi_max < 1.0)) {
      throw ConfigError("welfare.varphi_min: need 0 < varphi_min < varphi_max < 1");
    }
    if (!(welfare.reward_min > 0.0 && welfare.reward_min <= welfare.reward_max)) {
      throw ConfigError("welfare.reward_min: need 0 < reward_min <= reward_max");
    }
  }
};

// "1..20", "3", "1,4,9" or a mix such as "1..3,7".
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  auto number = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("seeds: bad seed list '" + text + "'");
    }
    return static_cast<std::uint64_t>(std::stoull(s));
  };
  while (std::getline(ss, part, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(part));
    } else {
      const std::uint64_t a = number(part.substr(0, dots));
      const std::uint64_t b = number(part.substr(dots + 2));
      if (b < a) throw ConfigError("seeds: descending range '" + part + "'");
      for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    }
  }
  if (out.empty()) throw ConfigError("seeds: empty seed list");
  return out;
}

namespace detail {

// Reads obj[key] into out if present, naming the key on type errors, and
// records the key as consumed.
template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& prefix,
          std::vector<std::string>& seen) {
  seen.emplace_back(key);
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(prefix + key + ": wrong type");
  }
}

inline void reject_unknown(const json& obj, const std::vector<std::string>& seen,
                           const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(seen.begin(), seen.end(), it.key()) == seen.end()) {
      throw ConfigError(prefix + it.key() + ": unknown key");
    }
  }
}

inline const json& section(const json& root, const char* key) {
  static const json kEmpty = json::object();
  auto it = root.find(key);
  if (it == root.end() || it->is_null()) return kEmpty;
  if (!it->is_object()) throw ConfigError(std::string(key) + ": must be an object");
  return *it;
}

}  // namespace detail

inline json to_json(const GameConfig& g) {
  return json{{"N", g.N},
              {"T", g.T},
              {"K", g.K},
              {"tau", g.tau},
              {"gamma", g.gamma},
              {"rho_L", g.rho_L},
              {"rho_H", g.rho_H},
              {"varphi", g.varphi},
              {"theta", g.theta},
              {"datasizes", g.datasizes},
              {"initial_budgets", g.initial_budgets},
              {"W", g.W},
              {"d", g.d},
              {"eps0", g.eps0},
              {"alpha_clamp", g.alpha_clamp},
              {"max_outer_iters", g.max_outer_iters},
              {"reward_floor", g.reward_floor},
              {"reward_cap", g.reward_cap},
              {"initial_reward", g.initial_reward},
              {"initial_alpha", g.initial_alpha},
              {"fixed_rewards", g.fixed_rewards},
              {"datasize_min", g.datasize_min},
              {"datasize_max", g.datasize_max},
              {"polish_tol", g.polish_tol},
              {"max_polish_iters", g.max_polish_iters},
              {"scan_points", g.scan_points},
              {"min_damping", g.min_damping},
              {"max_sweeps", g.max_sweeps}};
}

inline GameConfig game_from_json(const json& j) {
  GameConfig g;
  std::vector<std::string> seen;
  const std::string p = "game.";
  detail::read(j, "N", g.N, p, seen);
  detail::read(j, "T", g.T, p, seen);
  detail::read(j, "K", g.K, p, seen);
  detail::read(j, "tau", g.tau, p, seen);
  detail::read(j, "gamma", g.gamma, p, seen);
  detail::read(j, "rho_L", g.rho_L, p, seen);
  detail::read(j, "rho_H", g.rho_H, p, seen);
  detail::read(j, "varphi", g.varphi, p, seen);
  detail::read(j, "theta", g.theta, p, seen);
  detail::read(j, "datasizes", g.datasizes, p, seen);
  detail::read(j, "initial_budgets", g.initial_budgets, p, seen);
  detail::read(j, "W", g.W, p, seen);
  detail::read(j, "d", g.d, p, seen);
  detail::read(j, "eps0", g.eps0, p, seen);
  detail::read(j, "alpha_clamp", g.alpha_clamp, p, seen);
  detail::read(j, "max_outer_iters", g.max_outer_iters, p, seen);
  detail::read(j, "reward_floor", g.reward_floor, p, seen);
  detail::read(j, "reward_cap", g.reward_cap, p, seen);
  detail::read(j, "initial_reward", g.initial_reward, p, seen);
  detail::read(j, "initial_alpha", g.initial_alpha, p, seen);
  detail::read(j, "fixed_rewards", g.fixed_rewards, p, seen);
  detail::read(j, "datasize_min", g.datasize_min, p, seen);
  detail::read(j, "datasize_max", g.datasize_max, p, seen);
  detail::read(j, "polish_tol", g.polish_tol, p, seen);
  detail::read(j, "max_polish_iters", g.max_polish_iters, p, seen);
  detail::read(j, "scan_points", g.scan_points, p, seen);
  detail::read(j, "min_damping", g.min_damping, p, seen);
  detail::read(j, "max_sweeps", g.max_sweeps, p, seen);
  detail::reject_unknown(j, seen, p);
  return g;
}

inline const char* to_string(fl::StepSchedule s) {
  return s == fl::StepSchedule::kConstant ? "constant" : "inverse-time";
}

inline json to_json(const ScenarioConfig& c) {
  json strategies = json::array();
  for (Strategy s : c.strategies) strategies.push_back(to_string(s));
  return json{
      {"schema_version", kSchemaVersion},
      {"scenario", to_string(c.scenario)},
      {"game", to_json(c.game)},
      {"task",
       {{"kind", fl::to_string(c.task.kind)},
        {"regularization", c.task.regularization},
        {"heterogeneity", c.task.heterogeneity},
        {"optimum_norm", c.task.optimum_norm},
        {"label_noise", c.task.label_noise},
        {"samples_per_client", c.task.samples_per_client}}},
      {"run",
       {{"strategy", to_string(c.run.strategy)},
        {"mode", to_string(c.run.mode)},
        {"baseline_budgets",
         c.run.baseline_budgets == fl::BaselineBudgets::kWorstCase ? "worst-case" : "solved"},
        {"eta", c.run.eta},
        {"step_schedule", to_string(c.run.schedule)},
        {"epochs", c.run.epochs},
        {"batch", c.run.batch},
        {"add_noise", c.run.add_noise},
        {"clip_parameters", c.run.clip_parameters},
        {"K", c.run.K}}},
      {"strategies", strategies},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir},
      {"welfare",
       {{"varphi_min", c.welfare.varphi_min},
        {"varphi_max", c.welfare.varphi_max},
        {"reward_min", c.welfare.reward_min},
        {"reward_max", c.welfare.reward_max},
        {"initial_budget_max", c.welfare.initial_budget_max}}},
      {"adaptive",
       {{"G", c.adaptive.G},
        {"H", c.adaptive.H},
        {"freeze_round_index", c.adaptive.freeze_round_index},
        {"B", c.adaptive.B},
        {"B_start", c.adaptive.B_start},
        {"B_end", c.adaptive.B_end}}}};
}

inline ScenarioConfig config_from_json(const json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  ScenarioConfig c;
  std::vector<std::string> seen;
  int version = kSchemaVersion;
  detail::read(root, "schema_version", version, "", seen);
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version: unsupported version " + std::to_string(version));
  }
  std::string scenario = to_string(c.scenario);
  detail::read(root, "scenario", scenario, "", seen);
  c.scenario = parse_scenario(scenario);
  seen.emplace_back("game");
  c.game = game_from_json(detail::section(root, "game"));

  {
    seen.emplace_back("task");
    const json& j = detail::section(root, "task");
    std::vector<std::string> s2;
    std::string kind = fl::to_string(c.task.kind);
    detail::read(j, "kind", kind, "task.", s2);
    c.task.kind = fl::parse_task_kind(kind);
    detail::read(j, "regularization", c.task.regularization, "task.", s2);
    detail::read(j, "heterogeneity", c.task.heterogeneity, "task.", s2);
    detail::read(j, "optimum_norm", c.task.optimum_norm, "task.", s2);
    detail::read(j, "label_noise", c.task.label_noise, "task.", s2);
    detail::read(j, "samples_per_client", c.task.samples_per_client, "task.", s2);
    detail::reject_unknown(j, s2, "task.");
  }
  {
    seen.emplace_back("run");
    const json& j = detail::section(root, "run");
    std::vector<std::string> s2;
    std::string strategy = to_string(c.run.strategy);
    std::string mode = to_string(c.run.mode);
    std::string budgets = "worst-case";
    std::string schedule = to_string(c.run.schedule);
    detail::read(j, "strategy", strategy, "run.", s2);
    detail::read(j, "mode", mode, "run.", s2);
    detail::read(j, "baseline_budgets", budgets, "run.", s2);
    detail::read(j, "eta", c.run.eta, "run.", s2);
    detail::read(j, "step_schedule", schedule, "run.", s2);
    detail::read(j, "epochs", c.run.epochs, "run.", s2);
    detail::read(j, "batch", c.run.batch, "run.", s2);
    detail::read(j, "add_noise", c.run.add_noise, "run.", s2);
    detail::read(j, "clip_parameters", c.run.clip_parameters, "run.", s2);
    detail::read(j, "K", c.run.K, "run.", s2);
    detail::reject_unknown(j, s2, "run.");
    c.run.strategy = parse_strategy(strategy);
    c.run.mode = parse_sampling_mode(mode);
    if (budgets == "worst-case") {
      c.run.baseline_budgets = fl::BaselineBudgets::kWorstCase;
    } else if (budgets == "solved") {
      c.run.baseline_budgets = fl::BaselineBudgets::kSolved;
    } else {
      throw ConfigError("run.baseline_budgets: expected worst-case or solved");
    }
    if (schedule == "constant") {
      c.run.schedule = fl::StepSchedule::kConstant;
    } else if (schedule == "inverse-time") {
      c.run.schedule = fl::StepSchedule::kInverseTime;
    } else {
      throw ConfigError("run.step_schedule: expected constant or inverse-time");
    }
  }
  {
    std::vector<std::string> names;
    detail::read(root, "strategies", names, "", seen);
    if (root.contains("strategies")) {
      c.strategies.clear();
      for (const auto& n : names) c.strategies.push_back(parse_strategy(n));
    }
  }
  seen.emplace_back("seeds");
  if (auto it = root.find("seeds"); it != root.end() && !it->is_null()) {
    if (it->is_string()) {
      c.seeds = parse_seeds(it->get<std::string>());
    } else {
      try {
        c.seeds = it->get<std::vector<std::uint64_t>>();
      } catch (const json::exception&) {
        throw ConfigError("seeds: wrong type");
      }
    }
  }
  detail::read(root, "output_dir", c.output_dir, "", seen);
  {
    seen.emplace_back("welfare");
    const json& j = detail::section(root, "welfare");
    std::vector<std::string> s2;
    detail::read(j, "varphi_min", c.welfare.varphi_min, "welfare.", s2);
    detail::read(j, "varphi_max", c.welfare.varphi_max, "welfare.", s2);
    detail::read(j, "reward_min", c.welfare.reward_min, "welfare.", s2);
    detail::read(j, "reward_max", c.welfare.reward_max, "welfare.", s2);
    detail::read(j, "initial_budget_max", c.welfare.initial_budget_max, "welfare.", s2);
    detail::reject_unknown(j, s2, "welfare.");
  }
  {
    seen.emplace_back("adaptive");
    const json& j = detail::section(root, "adaptive");
    std::vector<std::string> s2;
    detail::read(j, "G", c.adaptive.G, "adaptive.", s2);
    detail::read(j, "H", c.adaptive.H, "adaptive.", s2);
    detail::read(j, "freeze_round_index", c.adaptive.freeze_round_index, "adaptive.", s2);
    detail::read(j, "B", c.adaptive.B, "adaptive.", s2);
    detail::read(j, "B_start", c.adaptive.B_start, "adaptive.", s2);
    detail::read(j, "B_end", c.adaptive.B_end, "adaptive.", s2);
    detail::reject_unknown(j, s2, "adaptive.");
  }
  detail::reject_unknown(root, seen, "");
  c.validate();
  return c;
}

// Empty or whitespace-only text gives all defaults.
inline ScenarioConfig parse_config(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    ScenarioConfig c;
    c.validate();
    return c;
  }
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from_json(root);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// FNV-1a over the canonical dump, as 16 hex digits.
inline std::string config_hash(const ScenarioConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Shortest round-trip decimal form, so CSV output is byte-stable.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    row_strings(header);
  }

  template <typename... Ts>
  void row(const Ts&... values) {
    std::vector<std::string> cells;
    (cells.push_back(cell(values)), ...);
    row_strings(cells);
  }

  void row_strings(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw ShapeError("CsvWriter: wrong column count");
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << ',';
      out_ << cells[k];
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::size_t columns_;
  std::ostringstream out_;
};

// Matrix as CSV: one row per client, one column per round.
inline std::string matrix_csv(const RealMatrix& m) {
  std::vector<std::string> header{"client"};
  for (std::size_t t = 0; t < m.cols(); ++t) header.push_back("t" + std::to_string(t));
  CsvWriter w(header);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::vector<std::string> cells{std::to_string(i)};
    for (std::size_t t = 0; t < m.cols(); ++t) cells.push_back(fmt(m(i, t)));
    w.row_strings(cells);
  }
  return w.str();
}

}  // namespace pacs::io
