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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pacs/common.hpp"
#include "pacs/numeric.hpp"
#include "pacs/rng.hpp"
#include "pacs/sampling.hpp"

namespace pacs {

struct GameConfig {
  int N = 100;
  int T = 30;
  int K = 0;  // 0 means round(tau * N)
  double tau = 0.2;
  double gamma = 0.5;
  double rho_L = 0.01;
  double rho_H = 12.0;
  // Per-client attributes; empty vectors are filled by populate_clients().
  std::vector<double> varphi;
  std::vector<double> theta;
  std::vector<double> datasizes;
  std::vector<double> initial_budgets;
  double W = 1.0;
  int d = 10;
  double eps0 = 1e-3;
  double alpha_clamp = 1e-6;
  int max_outer_iters = 50;
  double reward_floor = 1e-9;
  double reward_cap = 1152921504606846976.0;  // 2^60
  double initial_reward = 1.0;
  double initial_alpha = 0.5;
  // When set (length T+1), rewards are exogenous and the server stage is skipped.
  std::vector<double> fixed_rewards;
  // Client attribute generation when vectors are empty.
  double datasize_min = 100.0;
  double datasize_max = 1000.0;
  // Refinement after the eps0 criterion is met.
  double polish_tol = 1e-10;
  int max_polish_iters = 200;
  int scan_points = 64;
  double min_damping = 1.0 / 64.0;
  int max_sweeps = 2000;

  int subset_size() const {
    if (K > 0) return K;
    return std::max(1, static_cast<int>(std::lround(tau * N)));
  }

  void validate() const {
    if (N < 2) throw ConfigError("N: must be >= 2");
    if (T < 1) throw ConfigError("T: must be >= 1");
    if (K < 0 || K > N) throw ConfigError("K: must be in [1, N]");
    if (K == 0 && !(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau: must be in (0, 1]");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma: must be in (0, 1)");
    if (!(rho_L > 0.0 && rho_L < rho_H)) throw ConfigError("rho_L: need 0 < rho_L < rho_H");
    if (!(W > 0.0)) throw ConfigError("W: must be > 0");
    if (d < 1) throw ConfigError("d: must be >= 1");
    if (!(eps0 > 0.0)) throw ConfigError("eps0: must be > 0");
    if (!(alpha_clamp > 0.0 && alpha_clamp < 1.0)) {
      throw ConfigError("alpha_clamp: must be in (0, 1)");
    }
    if (max_outer_iters < 1) throw ConfigError("max_outer_iters: must be >= 1");
    if (!(reward_floor > 0.0 && reward_floor < reward_cap)) {
      throw ConfigError("reward_floor: must be in (0, reward_cap)");
    }
    if (!(datasize_min > 0.0 && datasize_min <= datasize_max)) {
      throw ConfigError("datasize_min: need 0 < datasize_min <= datasize_max");
    }
    const auto n = static_cast<std::size_t>(N);
    auto check_len = [n](const std::vector<double>& v, const char* key) {
      if (!v.empty() && v.size() != n) {
        throw ConfigError(std::string(key) + ": expected " + std::to_string(n) + " entries");
      }
    };
    check_len(varphi, "varphi");
    check_len(theta, "theta");
    check_len(datasizes, "datasizes");
    check_len(initial_budgets, "initial_budgets");
    if (!fixed_rewards.empty()) {
      if (fixed_rewards.size() != static_cast<std::size_t>(T) + 1) {
        throw ConfigError("fixed_rewards: expected T+1 entries");
      }
      for (double r : fixed_rewards) {
        if (!(r > 0.0)) throw ConfigError("fixed_rewards: entries must be > 0");
      }
    }
    for (double v : varphi) {
      if (!(v > 0.0 && v < 1.0)) throw ConfigError("varphi: entries must be in (0, 1)");
    }
    if (!theta.empty()) {
      for (double v : theta) {
        if (!(v > 0.0)) throw ConfigError("theta: entries must be > 0");
      }
      if (std::abs(stable_sum(theta.begin(), theta.end()) - 1.0) > 1e-12) {
        throw ConfigError("theta: entries must sum to 1");
      }
    }
    for (double v : datasizes) {
      if (!(v > 0.0)) throw ConfigError("datasizes: entries must be > 0");
    }
    for (double v : initial_budgets) {
      if (!(v >= rho_L && v <= rho_H)) {
        throw ConfigError("initial_budgets: entries must lie in [rho_L, rho_H]");
      }
    }
  }

  bool complete() const {
    const auto n = static_cast<std::size_t>(N);
    return varphi.size() == n && theta.size() == n && datasizes.size() == n &&
           initial_budgets.size() == n;
  }
};

// Fills any empty per-client vector from the seed: varphi ~ U(0,1),
// budgets ~ U[rho_L, rho_H], integer datasizes, theta proportional to size.
inline GameConfig populate_clients(GameConfig cfg, std::uint64_t seed) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.N);
  RandomStream root(seed);
  if (cfg.varphi.empty()) {
    RandomStream s = root.split(1);
    cfg.varphi.resize(n);
    for (double& v : cfg.varphi) {
      do {
        v = s.uniform();
      } while (v <= 0.0);
    }
  }
  if (cfg.initial_budgets.empty()) {
    RandomStream s = root.split(2);
    cfg.initial_budgets.resize(n);
    for (double& v : cfg.initial_budgets) v = s.uniform(cfg.rho_L, cfg.rho_H);
  }
  if (cfg.datasizes.empty()) {
    RandomStream s = root.split(3);
    cfg.datasizes.resize(n);
    const auto lo = static_cast<std::uint64_t>(std::ceil(cfg.datasize_min));
    const auto hi = static_cast<std::uint64_t>(std::floor(cfg.datasize_max));
    for (double& v : cfg.datasizes) {
      v = hi > lo ? static_cast<double>(lo + s.below(hi - lo + 1)) : cfg.datasize_min;
    }
  }
  if (cfg.theta.empty()) {
    const double total = stable_sum(cfg.datasizes.begin(), cfg.datasizes.end());
    cfg.theta.resize(n);
    for (std::size_t i = 0; i < n; ++i) cfg.theta[i] = cfg.datasizes[i] / total;
    // Push the rounding residue into the largest weight so the sum is exact.
    const double err = stable_sum(cfg.theta.begin(), cfg.theta.end()) - 1.0;
    auto it = std::max_element(cfg.theta.begin(), cfg.theta.end());
    *it -= err;
  }
  cfg.validate();
  return cfg;
}

// How the second part of M is written. kExact includes the chain-rule factor
// K/(N phi(t)) so that S is the true partial derivative of the round payoff in
// the budget; kAsPrinted omits it.
enum class CostateForm { kExact, kAsPrinted };

struct CostateTerms {
  double Q = 0.0;
  double M = 0.0;
  double S = 0.0;
};

namespace game {

// Sampling share rho / (N phi), saturated at 1.
inline double share(double rho, double phi_t, int n) {
  if (!(phi_t > 0.0)) throw DomainError("phi(t) must be > 0");
  return std::min(rho / (static_cast<double>(n) * phi_t), 1.0);
}

inline double budget_update(double rho, double alpha, double phi_t, const GameConfig& cfg) {
  return clamp_to((1.0 - alpha) * phi_t + alpha * rho, cfg.rho_L, cfg.rho_H);
}

inline CostateTerms costate_terms(std::size_t client, double rho, double alpha, double R,
                                  double phi_t, const GameConfig& cfg,
                                  CostateForm form = CostateForm::kExact) {
  const int K = cfg.subset_size();
  const double v = cfg.varphi.at(client);
  const double x = share(rho, phi_t, cfg.N);
  // Past saturation the inclusion probability is flat in the budget.
  const bool saturated = rho > static_cast<double>(cfg.N) * phi_t;
  const double q1 = saturated ? 0.0 : ipow(1.0 - x, K - 1);
  const double P = saturated ? 1.0 : 1.0 - ipow(1.0 - x, K);
  CostateTerms out;
  out.Q = P + q1 * K * x;
  double scale = 1.0;
  if (form == CostateForm::kExact) scale = K / (cfg.N * phi_t);
  out.M = -2.0 * v * rho * P - scale * q1 * (v * rho * rho + (1.0 - v) * alpha * alpha);
  out.S = out.Q * R + out.M;
  return out;
}

inline double client_utility(std::size_t client, const std::vector<double>& alphas,
                             const std::vector<double>& budgets,
                             const std::vector<double>& rewards,
                             const std::vector<double>& phi, const GameConfig& cfg) {
  const auto len = static_cast<std::size_t>(cfg.T) + 1;
  require_same_length(alphas.size(), len, "client_utility alphas");
  require_same_length(budgets.size(), len, "client_utility budgets");
  require_same_length(rewards.size(), len, "client_utility rewards");
  require_same_length(phi.size(), len, "client_utility phi");
  const int K = cfg.subset_size();
  const double v = cfg.varphi.at(client);
  double u = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    const double rho = budgets[t];
    const double P = sampling::inclusion_probability(share(rho, phi[t], cfg.N), K);
    u += P * (rho * rewards[t] - v * rho * rho - (1.0 - v) * alphas[t] * alphas[t]);
  }
  return u;
}

inline std::vector<double> propagate_budgets(double rho0, const std::vector<double>& alphas,
                                             const std::vector<double>& phi,
                                             const GameConfig& cfg) {
  std::vector<double> rho(phi.size());
  rho[0] = rho0;
  for (std::size_t t = 0; t + 1 < phi.size(); ++t) {
    rho[t + 1] = budget_update(rho[t], alphas[t], phi[t], cfg);
  }
  return rho;
}

// Unclamped right-hand side of the optimal correction factor at round t < T,
// with lambda(t+1) assembled from the later alphas and S values.
inline double correction_factor_raw(std::size_t client, double rho, double phi_t,
                                    const std::vector<double>& future_alphas,
                                    const std::vector<double>& future_S,
                                    const GameConfig& cfg) {
  // future_S = S(t+1..T); future_alphas = alpha(t+1..T-1).
  if (future_S.empty()) throw ShapeError("correction_factor: no future S");
  require_same_length(future_alphas.size() + 1, future_S.size(), "correction_factor");
  if (rho == phi_t) return 0.0;
  const int K = cfg.subset_size();
  const double v = cfg.varphi.at(client);
  const double x = share(rho, phi_t, cfg.N);
  const double P = sampling::inclusion_probability(x, K);
  if (!(P > 0.0)) throw DomainError("correction_factor: zero inclusion probability");
  double lam = future_S.back();
  for (std::size_t j = future_S.size() - 1; j-- > 0;) {
    lam = future_alphas[j] * lam + future_S[j];
  }
  return (rho - phi_t) * lam / (2.0 * (1.0 - v) * P);
}

inline double correction_factor(std::size_t client, double rho, double phi_t,
                                const std::vector<double>& future_alphas,
                                const std::vector<double>& future_S,
                                const GameConfig& cfg) {
  const double raw =
      correction_factor_raw(client, rho, phi_t, future_alphas, future_S, cfg);
  return clamp_to(raw, 0.0, 1.0 - cfg.alpha_clamp);
}

// Server cost for one round; t_eff is the already shifted round index (>= 1).
inline double server_cost(double R, const std::vector<double>& budgets,
                          const std::vector<double>& theta,
                          const std::vector<double>& datasizes, int t_eff, double gamma) {
  if (t_eff < 1) throw DomainError("server_cost: round index must be >= 1 (use t+1)");
  require_same_length(budgets.size(), theta.size(), "server_cost theta");
  require_same_length(budgets.size(), datasizes.size(), "server_cost datasizes");
  double c = 0.0;
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0)) throw DomainError("server_cost: budgets must be > 0");
    c += gamma * theta[i] * theta[i] /
             (t_eff * datasizes[i] * datasizes[i] * budgets[i]) +
         (1.0 - gamma) * R * budgets[i];
  }
  return c;
}

// Cost when each budget follows the linear response rho = G R + H.
inline double server_cost_response(double R, const std::vector<double>& G,
                                   const std::vector<double>& H,
                                   const std::vector<double>& theta,
                                   const std::vector<double>& datasizes, int t_eff,
                                   double gamma) {
  std::vector<double> rho(G.size());
  for (std::size_t i = 0; i < G.size(); ++i) rho[i] = G[i] * R + H[i];
  return server_cost(R, rho, theta, datasizes, t_eff, gamma);
}

inline double server_cost_derivative(double R, const std::vector<double>& G,
                                     const std::vector<double>& H,
                                     const std::vector<double>& theta,
                                     const std::vector<double>& datasizes, int t_eff,
                                     double gamma) {
  double g = 0.0;
  for (std::size_t i = 0; i < G.size(); ++i) {
    const double rho = G[i] * R + H[i];
    g += (1.0 - gamma) * (2.0 * G[i] * R + H[i]) -
         gamma * theta[i] * theta[i] * G[i] /
             (t_eff * datasizes[i] * datasizes[i] * rho * rho);
  }
  return g;
}

struct RewardResult {
  double R = 0.0;
  bool at_floor = false;
  int bracket_doublings = 0;
};

inline RewardResult optimal_reward(int t_eff, const std::vector<double>& G,
                                   const std::vector<double>& H,
                                   const std::vector<double>& theta,
                                   const std::vector<double>& datasizes, double gamma,
                                   double floor = 1e-9,
                                   double cap = 1152921504606846976.0,
                                   double rtol = 1e-13) {
  require_same_length(G.size(), H.size(), "optimal_reward");
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (G[i] < 0.0) throw DomainError("optimal_reward: G must be >= 0");
    if (G[i] * floor + H[i] <= 0.0) throw DomainError("optimal_reward: infeasible budget");
  }
  auto deriv = [&](double R) {
    return server_cost_derivative(R, G, H, theta, datasizes, t_eff, gamma);
  };
  RewardResult res;
  if (deriv(floor) >= 0.0) {
    res.R = floor;
    res.at_floor = true;
    return res;
  }
  double lo = floor;
  double hi = std::max(1.0, 2.0 * floor);
  while (deriv(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    ++res.bracket_doublings;
    if (hi > cap) {
      throw SolverError("optimal_reward: no sign change of the first-order condition up to " +
                        std::to_string(cap) + " (round " + std::to_string(t_eff) + ")");
    }
  }
  res.R = numeric::bisect_increasing(deriv, lo, hi, rtol);
  return res;
}

// Budget response of every client to the reward of round t when alpha(t-1)
// follows I R + J inside its interval: rho(R) = phi + clamp(I R + J) (rho' - phi).
struct RewardResponse {
  std::vector<double> rho_prev;
  double phi_prev = 0.0;
  std::vector<double> I;
  std::vector<double> J;
  double amax = 1.0;
  double rho_L = 0.0;
  double rho_H = std::numeric_limits<double>::infinity();

  double alpha(std::size_t i, double R) const {
    return clamp_to(I[i] * R + J[i], 0.0, amax);
  }
  double budget(std::size_t i, double R) const {
    return clamp_to(phi_prev + alpha(i, R) * (rho_prev[i] - phi_prev), rho_L, rho_H);
  }
  double slope(std::size_t i, double R) const {
    const double a = I[i] * R + J[i];
    if (a <= 0.0 || a >= amax) return 0.0;
    return I[i] * (rho_prev[i] - phi_prev);
  }
};

inline double response_cost(double R, const RewardResponse& resp,
                            const std::vector<double>& theta,
                            const std::vector<double>& datasizes, int t_eff, double gamma) {
  double c = 0.0;
  for (std::size_t i = 0; i < resp.I.size(); ++i) {
    const double rho = resp.budget(i, R);
    c += gamma * theta[i] * theta[i] / (t_eff * datasizes[i] * datasizes[i] * rho) +
         (1.0 - gamma) * R * rho;
  }
  return c;
}

inline double response_cost_derivative(double R, const RewardResponse& resp,
                                       const std::vector<double>& theta,
                                       const std::vector<double>& datasizes, int t_eff,
                                       double gamma) {
  double g = 0.0;
  for (std::size_t i = 0; i < resp.I.size(); ++i) {
    const double rho = resp.budget(i, R);
    const double G = resp.slope(i, R);
    g += (1.0 - gamma) * (rho + R * G) -
         gamma * theta[i] * theta[i] * G / (t_eff * datasizes[i] * datasizes[i] * rho * rho);
  }
  return g;
}

// Global minimizer of the server cost under the clamped response. The cost is
// convex between the rewards at which some alpha enters or leaves its
// interval, so each piece is solved by bisection on its first-order condition.
inline RewardResult optimal_reward_clamped(int t_eff, const RewardResponse& resp,
                                           const std::vector<double>& theta,
                                           const std::vector<double>& datasizes,
                                           double gamma, double floor = 1e-9,
                                           double cap = 1152921504606846976.0,
                                           double rtol = 1e-13) {
  std::vector<double> knots{floor};
  for (std::size_t i = 0; i < resp.I.size(); ++i) {
    if (resp.I[i] == 0.0) continue;
    for (double target : {0.0, resp.amax}) {
      const double r = (target - resp.J[i]) / resp.I[i];
      if (r > floor && r < cap) knots.push_back(r);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  auto cost = [&](double R) { return response_cost(R, resp, theta, datasizes, t_eff, gamma); };
  auto deriv = [&](double R) {
    return response_cost_derivative(R, resp, theta, datasizes, t_eff, gamma);
  };
  RewardResult res;
  res.R = floor;
  res.at_floor = true;
  double best = cost(floor);
  auto consider = [&](double R) {
    const double c = cost(R);
    if (c < best) {
      best = c;
      res.R = R;
      res.at_floor = false;
    }
  };
  // Past the last knot every budget is fixed and the cost grows linearly.
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double lo = knots[k], hi = knots[k + 1];
    // Derivative inside the piece, evaluated just off the knots.
    const double eps = 1e-12 * (hi - lo);
    const double glo = deriv(lo + eps);
    const double ghi = deriv(hi - eps);
    if (glo >= 0.0) {
      consider(lo);
    } else if (ghi <= 0.0) {
      consider(hi);
    } else {
      consider(numeric::bisect_increasing(deriv, lo + eps, hi - eps, rtol));
    }
  }
  return res;
}

}  // namespace game
}  // namespace pacs
