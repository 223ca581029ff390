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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "pacs/baselines.hpp"
#include "pacs/common.hpp"
#include "pacs/fltrain.hpp"
#include "pacs/numeric.hpp"
#include "pacs/sampling.hpp"
#include "pacs/zcdp.hpp"

namespace pacs::adaptive {

// gamma theta^2 / (t |D|^2) for the shifted round index t.
inline double upsilon(double gamma, double theta, double datasize, double t_eff) {
  if (!(t_eff >= 1.0)) throw DomainError("upsilon: round index must be >= 1");
  return gamma * theta * theta / (t_eff * datasize * datasize);
}

struct Decision {
  double R = 0.0;
  double tau = 0.0;
  int K = 0;
  double delta = 0.0;
  double upsilon = 0.0;
  double rho = 0.0;        // per-client budget G R + H at the optimum
  double K_relaxed = 0.0;  // B / rho before the floor
  bool constraint_active = false;  // delta >= 0
  bool tau_clipped = false;
  bool k_raised = false;           // floor gave 0, raised to 1
};

// Closed-form reward and sampling ratio for homogeneous clients.
inline Decision reward_and_ratio(double t_eff, double B, double G, double H, double gamma,
                                 double theta, double datasize, int n) {
  if (G == 0.0) throw DomainError("adaptive_reward_and_ratio: G = 0 (degenerate game)");
  if (!(B > 0.0)) throw DomainError("adaptive_reward_and_ratio: B must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("adaptive_reward_and_ratio: gamma");
  if (n < 1) throw DomainError("adaptive_reward_and_ratio: N must be >= 1");
  Decision d;
  d.upsilon = upsilon(gamma, theta, datasize, t_eff);
  const double c = 2.0 * G * d.upsilon / (1.0 - gamma);
  if (!(c > 0.0)) throw DomainError("adaptive_reward_and_ratio: 2 G upsilon / (1 - gamma) <= 0");
  const double s = std::cbrt(c);
  d.rho = s;
  d.R = s / G - H / G;
  d.K_relaxed = B / s;
  int k = static_cast<int>(std::floor(d.K_relaxed));
  if (k > n) {
    k = n;
    d.tau_clipped = true;
  }
  if (k < 1) {
    k = 1;
    d.k_raised = true;
  }
  d.K = k;
  d.tau = static_cast<double>(k) / n;
  d.delta = d.upsilon / (s * s) - (1.0 - gamma) / G * (2.0 * s - H);
  d.constraint_active = d.delta >= 0.0;
  return d;
}

// Round cost with K identical clients at budget G R + H.
inline double round_cost(double R, double K, double G, double H, double ups, double gamma) {
  const double rho = G * R + H;
  if (!(rho > 0.0)) return std::numeric_limits<double>::infinity();
  return K * (ups / rho + (1.0 - gamma) * R * rho);
}

struct KktResiduals {
  double stationarity_R = 0.0;  // relative
  double stationarity_K = 0.0;  // relative
  double slackness = 0.0;       // delta (K rho - B) at K = B / rho
  double slackness_floor = 0.0; // same at the floored K
  bool dual_feasible = false;
};

// Residuals of the Lagrangian conditions at a decision.
inline KktResiduals kkt_residuals(const Decision& d, double B, double G, double H,
                                  double gamma) {
  KktResiduals r;
  const double rho = G * d.R + H;
  const double ups = d.upsilon;
  const double a = -G * ups / (rho * rho);
  const double b = (1.0 - gamma) * (2.0 * G * d.R + H);
  const double e = d.delta * G;
  r.stationarity_R = std::abs(a + b + e) / std::max({std::abs(a), std::abs(b), std::abs(e)});
  const double p = ups / rho;
  const double q = ((1.0 - gamma) * d.R + d.delta) * rho;
  r.stationarity_K = std::abs(p + q) / std::max(std::abs(p), std::abs(q));
  r.slackness = std::abs(d.delta * (d.K_relaxed * rho - B));
  r.slackness_floor = std::abs(d.delta * (d.K * rho - B));
  r.dual_feasible = d.delta >= 0.0;
  return r;
}

struct GridResult {
  double R = 0.0;
  int K = 0;
  double cost = std::numeric_limits<double>::infinity();
  double cell = 0.0;
  bool feasible = false;
};

// Exhaustive search of the round cost subject to K (G R + H) <= B over an
// evenly spaced R grid on [r_lo, r_hi] and K in 1..N.
inline GridResult grid_search(double B, double G, double H, double ups, double gamma, int n,
                              double r_lo, double r_hi, int points) {
  if (points < 2 || !(r_hi > r_lo)) throw DomainError("grid_search: bad grid");
  GridResult best;
  best.cell = (r_hi - r_lo) / (points - 1);
  for (int j = 0; j < points; ++j) {
    const double R = r_lo + best.cell * j;
    const double rho = G * R + H;
    if (!(rho > 0.0)) continue;
    for (int k = 1; k <= n; ++k) {
      if (k * rho > B) break;
      const double cost = round_cost(R, k, G, H, ups, gamma);
      if (cost < best.cost) {
        best.cost = cost;
        best.R = R;
        best.K = k;
        best.feasible = true;
      }
    }
  }
  return best;
}

struct Schedule {
  std::vector<double> B;  // length T+1

  void validate(int T) const {
    if (B.size() != static_cast<std::size_t>(T + 1)) {
      throw ConfigError("schedule.B: length must be T+1");
    }
    for (double b : B) {
      if (!(b > 0.0)) throw ConfigError("schedule.B: every entry must be > 0");
    }
  }
};

struct AdaptiveOptions {
  double G = 1.0;
  double H = 0.0;
  bool freeze_round_index = false;  // evaluate upsilon at t = 1 every round
  Strategy strategy = Strategy::kPrivacyAware;
  fl::RunOptions run;
};

struct PlanRow {
  int t = 0;
  double B = 0.0;
  int K = 0;
  double tau = 0.0;
  double R = 0.0;
  double delta = 0.0;
  double usage_ratio = 0.0;
  bool skipped = false;
  bool k_raised = false;
  bool tau_clipped = false;
  bool constraint_active = false;

  bool operator==(const PlanRow&) const = default;
};

struct AdaptiveRun {
  std::vector<PlanRow> plan;
  std::vector<double> loss;  // F(w(t)), t = 0..T
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<double> final_model;
};

inline void require_homogeneous(const GameConfig& cfg) {
  for (std::size_t i = 1; i < cfg.theta.size(); ++i) {
    if (std::abs(cfg.theta[i] - cfg.theta[0]) > 1e-12 ||
        cfg.datasizes[i] != cfg.datasizes[0]) {
      throw ConfigError("adaptive: clients must share theta and datasize");
    }
  }
}

// Adaptive sampling driver. The privacy-aware server sets (R*, K_t) from the
// closed form every round; the random baseline keeps K = tau N (cut to fit
// B_t) with clients at rho_L.
inline AdaptiveRun run_adaptive(const GameConfig& cfg, const Schedule& schedule,
                                const fl::SyntheticTask& task, std::uint64_t seed,
                                const AdaptiveOptions& opt = {}) {
  if (!cfg.complete()) throw ConfigError("run_adaptive: client attributes not populated");
  schedule.validate(cfg.T);
  require_homogeneous(cfg);
  if (opt.strategy != Strategy::kPrivacyAware && opt.strategy != Strategy::kRandom) {
    baselines::not_implemented(opt.strategy);
  }
  const auto n = static_cast<std::size_t>(cfg.N);
  const double theta = cfg.theta[0];
  const double size = cfg.datasizes[0];
  AdaptiveRun out;
  out.subsets.resize(static_cast<std::size_t>(cfg.T) + 1);
  const RandomStream root = RandomStream(seed).split(0xad);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(task.dimension);

  for (int t = 0; t <= cfg.T; ++t) {
    out.loss.push_back(task.loss(w));
    PlanRow row;
    row.t = t;
    row.B = schedule.B[static_cast<std::size_t>(t)];
    double rho = 0.0;
    if (opt.strategy == Strategy::kPrivacyAware) {
      const double t_eff = opt.freeze_round_index ? 1.0 : t + 1.0;
      const Decision d = reward_and_ratio(t_eff, row.B, opt.G, opt.H, cfg.gamma, theta, size,
                                          cfg.N);
      row.K = d.K;
      row.tau = d.tau;
      row.R = d.R;
      row.delta = d.delta;
      row.k_raised = d.k_raised;
      row.tau_clipped = d.tau_clipped;
      row.constraint_active = d.constraint_active;
      rho = d.rho;
    } else {
      rho = cfg.rho_L;
      row.K = std::min(cfg.subset_size(), static_cast<int>(std::floor(row.B / rho)));
      if (row.K < 1) {
        row.K = 1;
        row.k_raised = true;
      }
      row.tau = static_cast<double>(row.K) / cfg.N;
    }
    const double used = row.K * rho;
    row.skipped = used > row.B;
    row.usage_ratio = row.skipped ? 0.0 : used / row.B;
    out.plan.push_back(row);
    if (t == cfg.T || row.skipped) continue;

    // Homogeneous budgets make the privacy-aware distribution uniform.
    const std::vector<double> budgets(n, rho);
    const SamplingDistribution dist = sampling::distribution(budgets, t);
    RandomStream pick = root.split({static_cast<std::uint64_t>(t), 0});
    const SampledSubset subset =
        sampling::sample_clients(dist, static_cast<std::size_t>(row.K), opt.run.mode, pick);
    out.subsets[static_cast<std::size_t>(t)] = subset.members;
    const Eigen::VectorXd model =
        opt.run.clip_parameters ? fl::to_eigen(zcdp::clip_norm(fl::to_std(w), cfg.W)) : w;
    std::vector<Eigen::VectorXd> updates;
    for (std::size_t j = 0; j < subset.members.size(); ++j) {
      const std::size_t i = subset.members[j];
      Eigen::VectorXd g = task.local_gradient(i, model);
      if (opt.run.add_noise) {
        RandomStream noise = root.split({static_cast<std::uint64_t>(t), 2, i, j});
        const zcdp::NoiseSpec spec = zcdp::make_spec(rho, size, cfg.W,
                                                     static_cast<std::size_t>(task.dimension));
        g = fl::to_eigen(zcdp::perturb_gradient(fl::to_std(g), spec, noise));
      }
      updates.push_back(std::move(g));
    }
    w = fl::aggregate(w, subset.members, updates, cfg.theta, dist, opt.run.eta);
  }
  out.final_model = fl::to_std(w);
  return out;
}

}  // namespace pacs::adaptive
