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
#include "scenarios.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace pacs::scenarios {

using nlohmann::json;

std::string file_stem(const io::ScenarioConfig& cfg, const std::string& seed_tag) {
  return std::string(io::to_string(cfg.scenario)) + "_" + io::config_hash(cfg) + "_" + seed_tag;
}

namespace {

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

std::string seeds_tag(const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() == 1) return seed_tag(seeds.front());
  return "seeds" + std::to_string(seeds.front()) + "-" + std::to_string(seeds.back()) + "n" +
         std::to_string(seeds.size());
}

json header(const io::ScenarioConfig& cfg, std::uint64_t seed) {
  return json{{"schema_version", io::kSchemaVersion},
              {"config_hash", io::config_hash(cfg)},
              {"seed", seed},
              {"scenario", io::to_string(cfg.scenario)}};
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row_vector(i));
  return rows;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

GameConfig game_for_seed(const io::ScenarioConfig& cfg, std::uint64_t seed) {
  return populate_clients(cfg.game, seed);
}

GameConfig welfare_instance(const io::ScenarioConfig& cfg, std::uint64_t seed) {
  GameConfig g = cfg.game;
  const auto n = static_cast<std::size_t>(g.N);
  const io::WelfareSpec& w = cfg.welfare;
  const RandomStream root = RandomStream(seed).split(0x3e1f);
  if (g.varphi.empty()) {
    RandomStream s = root.split(1);
    g.varphi.resize(n);
    for (double& v : g.varphi) v = s.uniform(w.varphi_min, w.varphi_max);
  }
  if (g.fixed_rewards.empty()) {
    RandomStream s = root.split(2);
    g.fixed_rewards.resize(static_cast<std::size_t>(g.T) + 1);
    for (double& r : g.fixed_rewards) r = s.uniform(w.reward_min, w.reward_max);
  }
  if (g.initial_budgets.empty()) {
    RandomStream s = root.split(3);
    const double hi = std::min(w.initial_budget_max, g.rho_H);
    g.initial_budgets.resize(n);
    for (double& b : g.initial_budgets) b = s.uniform(g.rho_L, hi);
  }
  return populate_clients(g, seed);
}

WelfareOutcome run_welfare_instance(const io::ScenarioConfig& cfg, std::uint64_t seed) {
  WelfareOutcome out;
  out.seed = seed;
  const GameConfig g = welfare_instance(cfg, seed);
  out.solution = game::mean_field_fixed_point(g);
  out.report = welfare::welfare_report(out.solution.budgets, out.solution.rewards, g.varphi,
                                       g.rho_L, g.rho_H);
  out.ordering_ok =
      out.report.sw_opt >= out.report.sw_nash && out.report.sw_nash >= out.report.sw_rand;
  return out;
}

std::string fl_record_csv(const fl::FLRunRecord& rec) {
  io::CsvWriter w({"t", "loss", "grad_norm_sq", "dist_sq", "accuracy_loss", "reward",
                   "subset_size", "noise_norm"});
  for (std::size_t t = 0; t < rec.loss.size(); ++t) {
    w.row(static_cast<int>(t), rec.loss[t], rec.grad_norm_sq[t], rec.dist_sq[t],
          rec.accuracy_loss[t], rec.rewards[t], static_cast<int>(rec.subsets[t].size()),
          rec.noise_norm[t]);
  }
  return w.str();
}

std::string plan_csv(const std::vector<adaptive::PlanRow>& plan) {
  io::CsvWriter w({"t", "B_t", "K_t", "tau", "R", "delta", "usage_ratio"});
  for (const auto& r : plan) w.row(r.t, r.B, r.K, r.tau, r.R, r.delta, r.usage_ratio);
  return w.str();
}

Outputs solve_game(const io::ScenarioConfig& cfg, std::uint64_t seed) {
  const GameConfig g = game_for_seed(cfg, seed);
  const GameSolution sol = game::mean_field_fixed_point(g);
  const game::DeviationReport dev = game::verify_sne(sol);
  const std::string stem = file_stem(cfg, seed_tag(seed));
  Outputs out;

  json j = header(cfg, seed);
  j["config"] = io::to_json(g);
  j["phi"] = sol.phi;
  j["rewards"] = sol.rewards;
  j["budgets"] = matrix_json(sol.budgets);
  j["alphas"] = matrix_json(sol.alphas);
  json dists = json::array();
  for (const auto& d : sol.distributions) dists.push_back(d.probs);
  j["distributions"] = dists;
  j["diagnostics"] = {{"converged", sol.converged},
                      {"outer_iterations", sol.outer_iterations},
                      {"total_iterations", sol.total_iterations},
                      {"final_residual", sol.final_residual},
                      {"sqrt_nu", sol.sqrt_nu},
                      {"final_damping", sol.final_damping},
                      {"worst_client_gain_rel", dev.worst_client_gain_rel},
                      {"worst_server_reduction_rel", dev.worst_server_reduction_rel}};
  out.add(stem + "_solution.json", j.dump(1) + "\n");

  io::CsvWriter res({"iteration", "residual", "reward_change"});
  for (std::size_t m = 0; m < sol.residual_history.size(); ++m) {
    const double dr = m < sol.reward_change_history.size() ? sol.reward_change_history[m] : 0.0;
    res.row(static_cast<int>(m + 1), sol.residual_history[m], dr);
  }
  out.add(stem + "_residuals.csv", res.str());
  out.add(stem + "_budgets.csv", io::matrix_csv(sol.budgets));
  out.add(stem + "_alphas.csv", io::matrix_csv(sol.alphas));
  return out;
}

Outputs run_fl(const io::ScenarioConfig& cfg, std::uint64_t seed) {
  const GameConfig g = game_for_seed(cfg, seed);
  const GameSolution sol = game::mean_field_fixed_point(g);
  const fl::SyntheticTask task = fl::make_task(cfg.task, g, seed);
  const fl::FLRunRecord rec = fl::run_fedpcs(sol, task, seed, cfg.run);
  const std::string stem = file_stem(cfg, seed_tag(seed)) + "_" + rec.strategy;
  Outputs out;
  out.add(stem + "_rounds.csv", fl_record_csv(rec));
  json j = header(cfg, seed);
  j["strategy"] = rec.strategy;
  j["K"] = rec.K;
  j["f_star"] = task.f_star;
  j["loss"] = rec.loss;
  j["accuracy_loss"] = rec.accuracy_loss;
  j["subsets"] = rec.subsets;
  j["budgets"] = matrix_json(rec.budgets);
  j["probs"] = matrix_json(rec.probs);
  j["final_model"] = rec.final_model;
  out.add(stem + "_record.json", j.dump(1) + "\n");
  return out;
}

Outputs welfare_table(const io::ScenarioConfig& cfg) {
  io::CsvWriter w({"seed", "sw_opt", "sw_nash", "sw_rand", "sw_pri_worst", "poa_nash",
                   "poa_rand", "poa_pri_worst", "rand_lower_bound", "pri_upper_bound",
                   "pri_bound_limit", "pri_bound_applicable", "r_max", "ordering_ok"});
  for (std::uint64_t seed : cfg.seeds) {
    const WelfareOutcome o = run_welfare_instance(cfg, seed);
    const auto& r = o.report;
    w.row(static_cast<unsigned long long>(seed), r.sw_opt, r.sw_nash, r.sw_rand,
          r.sw_pri_worst, r.poa_nash.value, r.poa_rand.value, r.poa_pri_worst.value,
          r.rand_lower_bound, r.pri_upper_bound.value, r.pri_upper_bound.limit,
          r.pri_upper_bound.applicable(), r.r_max, o.ordering_ok);
  }
  Outputs out;
  out.add(file_stem(cfg, seeds_tag(cfg.seeds)) + "_welfare.csv", w.str());
  return out;
}

Outputs adaptive_run(const io::ScenarioConfig& cfg, std::uint64_t seed) {
  const GameConfig g = game_for_seed(cfg, seed);
  const fl::SyntheticTask task = fl::make_task(cfg.task, g, seed);
  const adaptive::Schedule schedule = cfg.adaptive.schedule(g.T);
  Outputs out;
  const std::string stem = file_stem(cfg, seed_tag(seed));
  for (Strategy s : cfg.strategies) {
    adaptive::AdaptiveOptions opt;
    opt.G = cfg.adaptive.G;
    opt.H = cfg.adaptive.H;
    opt.freeze_round_index = cfg.adaptive.freeze_round_index;
    opt.strategy = s;
    opt.run = cfg.run;
    const adaptive::AdaptiveRun r = adaptive::run_adaptive(g, schedule, task, seed, opt);
    out.add(stem + "_" + to_string(s) + "_plan.csv", plan_csv(r.plan));
    json j = header(cfg, seed);
    j["strategy"] = to_string(s);
    j["loss"] = r.loss;
    json flags = json::array();
    for (const auto& p : r.plan) {
      flags.push_back({{"t", p.t},
                       {"skipped", p.skipped},
                       {"k_raised", p.k_raised},
                       {"tau_clipped", p.tau_clipped},
                       {"constraint_active", p.constraint_active}});
    }
    j["flags"] = flags;
    j["subsets"] = r.subsets;
    out.add(stem + "_" + to_string(s) + "_run.json", j.dump(1) + "\n");
  }
  return out;
}

std::vector<CompareRow> compare_runs(const io::ScenarioConfig& cfg) {
  std::vector<CompareRow> rows;
  for (std::uint64_t seed : cfg.seeds) {
    const GameConfig g = game_for_seed(cfg, seed);
    const GameSolution sol = game::mean_field_fixed_point(g);
    const fl::SyntheticTask task = fl::make_task(cfg.task, g, seed);
    for (Strategy s : cfg.strategies) {
      fl::RunOptions opt = cfg.run;
      opt.strategy = s;
      const fl::FLRunRecord rec = fl::run_fedpcs(sol, task, seed, opt);
      rows.push_back({rec.strategy, seed, rec.loss.back(), rec.accuracy_loss.back(),
                      rec.dist_sq.back()});
    }
  }
  return rows;
}

Outputs compare(const io::ScenarioConfig& cfg) {
  const std::vector<CompareRow> rows = compare_runs(cfg);
  const std::string stem = file_stem(cfg, seeds_tag(cfg.seeds));
  Outputs out;
  io::CsvWriter summary({"strategy", "seeds", "final_loss_mean", "final_loss_sd",
                         "accuracy_loss_mean", "accuracy_loss_sd"});
  for (Strategy s : cfg.strategies) {
    const std::string name = to_string(s);
    io::CsvWriter w({"seed", "final_loss", "accuracy_loss", "dist_sq"});
    std::vector<double> loss, acc;
    for (const auto& r : rows) {
      if (r.strategy != name) continue;
      w.row(static_cast<unsigned long long>(r.seed), r.final_loss, r.final_accuracy_loss,
            r.final_dist_sq);
      loss.push_back(r.final_loss);
      acc.push_back(r.final_accuracy_loss);
    }
    out.add(stem + "_" + name + ".csv", w.str());
    summary.row(name, static_cast<int>(loss.size()), mean(loss), sample_sd(loss), mean(acc),
                sample_sd(acc));
  }
  out.add(stem + "_summary.csv", summary.str());
  return out;
}

Outputs run(const io::ScenarioConfig& cfg) {
  Outputs all;
  auto append = [&](Outputs o) {
    for (auto& f : o.files) all.files.push_back(std::move(f));
  };
  switch (cfg.scenario) {
    case io::Scenario::kSolveGame:
      for (auto s : cfg.seeds) append(solve_game(cfg, s));
      break;
    case io::Scenario::kRunFl:
      for (auto s : cfg.seeds) append(run_fl(cfg, s));
      break;
    case io::Scenario::kWelfare:
      append(welfare_table(cfg));
      break;
    case io::Scenario::kAdaptive:
      for (auto s : cfg.seeds) append(adaptive_run(cfg, s));
      break;
    case io::Scenario::kCompare:
      append(compare(cfg));
      break;
  }
  return all;
}

void write_outputs(const Outputs& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : out.files) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("output_dir: cannot write " + path.string());
    f << body;
  }
}

}  // namespace pacs::scenarios
