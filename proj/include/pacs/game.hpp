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
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pacs/common.hpp"
#include "pacs/game_primitives.hpp"
#include "pacs/numeric.hpp"
#include "pacs/sampling.hpp"

namespace pacs {

struct GameSolution {
  GameConfig cfg;
  std::vector<double> phi;      // mean-field trajectory, length T+1
  RealMatrix budgets;           // N x (T+1)
  RealMatrix alphas;            // N x (T+1), last column zero
  std::vector<double> rewards;  // length T+1
  std::vector<bool> reward_at_floor;
  RealMatrix lambda, S, Q, M;   // costate and auxiliaries
  RealMatrix G, H, I, J;        // reward response, column 0 unused
  Matrix<unsigned char> responsive;  // alpha(t-1) strictly inside its interval
  std::vector<SamplingDistribution> distributions;

  // Diagnostics.
  bool converged = false;
  int outer_iterations = 0;           // iterations until the eps0 test passed
  int total_iterations = 0;           // including refinement
  double final_residual = 0.0;
  std::vector<double> residual_history;
  std::vector<double> reward_change_history;
  double sqrt_nu = 0.0;
  double final_damping = 1.0;
  int best_response_sweeps = 0;
  double seconds = 0.0;
};

namespace game {

// One client's control problem for frozen phi and rewards.
class ClientProblem {
 public:
  ClientProblem(const GameConfig& cfg, std::size_t client, const std::vector<double>& phi,
                const std::vector<double>& rewards)
      : cfg_(cfg),
        phi_(phi),
        R_(rewards),
        T_(static_cast<std::size_t>(cfg.T)),
        K_(cfg.subset_size()),
        v_(cfg.varphi[client]),
        amax_(1.0 - cfg.alpha_clamp) {
    inv_nphi_.resize(phi.size());
    for (std::size_t t = 0; t < phi.size(); ++t) {
      inv_nphi_[t] = 1.0 / (static_cast<double>(cfg.N) * phi[t]);
    }
  }

  double amax() const { return amax_; }

  double inclusion(std::size_t t, double rho) const {
    const double x = rho * inv_nphi_[t];
    return x >= 1.0 ? 1.0 : 1.0 - ipow(1.0 - x, K_);
  }

  double payoff(std::size_t t, double rho, double a) const {
    return inclusion(t, rho) * (rho * R_[t] - v_ * rho * rho - (1.0 - v_) * a * a);
  }

  // d payoff_t / d rho.
  double payoff_slope(std::size_t t, double rho, double a) const {
    const double x = rho * inv_nphi_[t];
    if (x >= 1.0) return R_[t] - 2.0 * v_ * rho;
    const double q1 = ipow(1.0 - x, K_ - 1);
    const double P = 1.0 - q1 * (1.0 - x);
    const double dP = K_ * inv_nphi_[t] * q1;
    return dP * (rho * R_[t] - v_ * rho * rho - (1.0 - v_) * a * a) +
           P * (R_[t] - 2.0 * v_ * rho);
  }

  double propagate_from(const std::vector<double>& alpha, std::vector<double>& rho,
                        std::size_t t) const {
    double u = 0.0;
    for (std::size_t s = t; s <= T_; ++s) {
      if (s > t) rho[s] = budget_update(rho[s - 1], alpha[s - 1], phi_[s - 1], cfg_);
      u += payoff(s, rho[s], alpha[s]);
    }
    return u;
  }

  double utility(const std::vector<double>& alpha, std::vector<double>& rho) const {
    return propagate_from(alpha, rho, 0);
  }

  // Sets alpha[t] = a, re-propagates budgets after t and returns the payoff
  // from round t on; if deriv is given also returns d/da of that payoff.
  double eval(std::vector<double>& alpha, std::vector<double>& rho, std::size_t t, double a,
              double* deriv) const {
    alpha[t] = a;
    const double u = propagate_from(alpha, rho, t);
    if (deriv) {
      double lam = 0.0;
      for (std::size_t s = T_; s > t; --s) {
        const double unclamped =
            (1.0 - alpha[s]) * phi_[s] + alpha[s] * rho[s];
        const bool pass = s < T_ && unclamped > cfg_.rho_L && unclamped < cfg_.rho_H;
        lam = payoff_slope(s, rho[s], alpha[s]) + (pass ? alpha[s] * lam : 0.0);
      }
      const double raw = (1.0 - a) * phi_[t] + a * rho[t];
      const bool pass = raw > cfg_.rho_L && raw < cfg_.rho_H;
      *deriv = -2.0 * inclusion(t, rho[t]) * (1.0 - v_) * a +
               (pass ? (rho[t] - phi_[t]) * lam : 0.0);
    }
    return u;
  }

  // Maximizes the payoff over alpha[t] with the other coordinates fixed.
  double coordinate_update(std::vector<double>& alpha, std::vector<double>& rho,
                           std::size_t t, bool scan) const {
    if (rho[t] == phi_[t]) {
      eval(alpha, rho, t, 0.0, nullptr);
      return 0.0;
    }
    double best = alpha[t];
    double g = 0.0;
    double fbest = eval(alpha, rho, t, best, &g);
    if (scan) {
      const int n = std::max(cfg_.scan_points, 2);
      for (int k = 0; k < n; ++k) {
        const double a = amax_ * static_cast<double>(k) / (n - 1);
        const double f = eval(alpha, rho, t, a, nullptr);
        if (f > fbest) {
          fbest = f;
          best = a;
        }
      }
      eval(alpha, rho, t, best, &g);
    }
    double cand = best;
    if (g != 0.0) {
      const double curv = 2.0 * inclusion(t, rho[t]) * (1.0 - v_);
      double h = std::max(1.5 * std::abs(g) / std::max(curv, 1e-300), 1e-12);
      auto fp = [&](double a) {
        double d = 0.0;
        eval(alpha, rho, t, a, &d);
        return d;
      };
      const double dir = g > 0.0 ? 1.0 : -1.0;
      const double edge = g > 0.0 ? amax_ : 0.0;
      double lo = best, glo = g;
      bool bracketed = false;
      double hi = best, ghi = g;
      for (int k = 0; k < 200; ++k) {
        hi = best + dir * h;
        if ((dir > 0.0 && hi >= edge) || (dir < 0.0 && hi <= edge)) hi = edge;
        ghi = fp(hi);
        if ((ghi > 0.0) != (glo > 0.0) || ghi == 0.0) {
          bracketed = true;
          break;
        }
        if (hi == edge) break;
        lo = hi;
        glo = ghi;
        h *= 4.0;
      }
      if (bracketed) {
        cand = numeric::brent_root(fp, lo, hi, glo, ghi, 1e-16).x;
      } else {
        cand = edge;
      }
    }
    const double fc = eval(alpha, rho, t, cand, nullptr);
    if (fc >= fbest) return cand;
    eval(alpha, rho, t, best, nullptr);
    return best;
  }

  // Gradient of the whole utility in alpha(0..T-1); budgets must be current.
  void gradient(const std::vector<double>& alpha, const std::vector<double>& rho,
                std::vector<double>& grad) const {
    grad.assign(T_, 0.0);
    double lam = 0.0;
    for (std::size_t s = T_ + 1; s-- > 0;) {
      if (s < T_) {
        const double raw = (1.0 - alpha[s]) * phi_[s] + alpha[s] * rho[s];
        const bool pass = raw > cfg_.rho_L && raw < cfg_.rho_H;
        grad[s] = -2.0 * inclusion(s, rho[s]) * (1.0 - v_) * alpha[s] +
                  (pass ? (rho[s] - phi_[s]) * lam : 0.0);
        lam = payoff_slope(s, rho[s], alpha[s]) + (pass ? alpha[s] * lam : 0.0);
      } else {
        lam = payoff_slope(s, rho[s], alpha[s]);
      }
    }
  }

  // Newton steps on the interior coordinates; coordinate ascent alone crawls
  // when several interior alphas are strongly coupled.
  void newton_polish(std::vector<double>& alpha, std::vector<double>& rho,
                     int max_iter = 8) const {
    std::vector<std::size_t> free;
    for (std::size_t t = 0; t < T_; ++t) {
      if (alpha[t] > 0.0 && alpha[t] < amax_ && rho[t] != phi_[t]) free.push_back(t);
    }
    if (free.empty()) return;
    const std::size_t m = free.size();
    std::vector<double> g, gp, gm;
    for (int it = 0; it < max_iter; ++it) {
      const double u0 = utility(alpha, rho);
      gradient(alpha, rho, g);
      double gnorm = 0.0;
      for (std::size_t k : free) gnorm = std::max(gnorm, std::abs(g[k]));
      if (gnorm == 0.0) return;
      Eigen::MatrixXd H(m, m);
      Eigen::VectorXd rhs(m);
      for (std::size_t c = 0; c < m; ++c) {
        const std::size_t t = free[c];
        const double keep = alpha[t];
        const double h = 1e-6 * std::max(1e-3, std::min(keep, amax_ - keep));
        alpha[t] = keep + h;
        utility(alpha, rho);
        gradient(alpha, rho, gp);
        alpha[t] = keep - h;
        utility(alpha, rho);
        gradient(alpha, rho, gm);
        alpha[t] = keep;
        for (std::size_t r = 0; r < m; ++r) H(r, c) = (gp[free[r]] - gm[free[r]]) / (2.0 * h);
        rhs(c) = -g[t];
      }
      utility(alpha, rho);
      H = 0.5 * (H + H.transpose());
      const Eigen::VectorXd step = H.ldlt().solve(rhs);
      if (!step.allFinite()) return;
      std::vector<double> trial = alpha;
      bool inside = true;
      for (std::size_t c = 0; c < m; ++c) {
        trial[free[c]] += step(c);
        if (!(trial[free[c]] > 0.0 && trial[free[c]] < amax_)) inside = false;
      }
      if (!inside) return;
      std::vector<double> trial_rho = rho;
      const double u1 = utility(trial, trial_rho);
      std::vector<double> g1;
      gradient(trial, trial_rho, g1);
      double gnorm1 = 0.0;
      for (std::size_t k : free) gnorm1 = std::max(gnorm1, std::abs(g1[k]));
      // Accept only steps that keep the payoff and shrink the gradient.
      if (u1 < u0 - 1e-15 * std::abs(u0) || gnorm1 >= gnorm) {
        utility(alpha, rho);
        return;
      }
      alpha = trial;
      rho = trial_rho;
    }
  }

  // Coordinate ascent to a point where no single alpha(t) can improve.
  int best_response(std::vector<double>& alpha, std::vector<double>& rho,
                    double tol = 1e-13) const {
    alpha[T_] = 0.0;
    utility(alpha, rho);
    bool scan = true;
    int sweeps = 0;
    for (; sweeps < cfg_.max_sweeps; ++sweeps) {
      double change = 0.0;
      for (std::size_t t = T_; t-- > 0;) {
        const double before = alpha[t];
        const double after = coordinate_update(alpha, rho, t, scan);
        change = std::max(change, std::abs(after - before));
      }
      if (change <= tol) {
        if (scan) {
          newton_polish(alpha, rho);
          return sweeps + 1;
        }
        scan = true;
      } else {
        scan = false;
      }
    }
    return sweeps;
  }

 private:
  const GameConfig& cfg_;
  const std::vector<double>& phi_;
  const std::vector<double>& R_;
  std::size_t T_;
  int K_;
  double v_;
  double amax_;
  std::vector<double> inv_nphi_;
};

// Costates, reward response coefficients and distributions for the current
// budgets, alphas and rewards.
inline void compute_auxiliaries(GameSolution& sol, CostateForm form = CostateForm::kExact) {
  const GameConfig& cfg = sol.cfg;
  const auto n = static_cast<std::size_t>(cfg.N);
  const auto T = static_cast<std::size_t>(cfg.T);
  sol.lambda = RealMatrix(n, T + 1);
  sol.S = RealMatrix(n, T + 1);
  sol.Q = RealMatrix(n, T + 1);
  sol.M = RealMatrix(n, T + 1);
  sol.G = RealMatrix(n, T + 1);
  sol.H = RealMatrix(n, T + 1);
  sol.I = RealMatrix(n, T + 1);
  sol.J = RealMatrix(n, T + 1);
  sol.responsive = Matrix<unsigned char>(n, T + 1, 0);
  const int K = cfg.subset_size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = T + 1; t-- > 0;) {
      const CostateTerms ct = costate_terms(i, sol.budgets(i, t), sol.alphas(i, t),
                                            sol.rewards[t], sol.phi[t], cfg, form);
      sol.Q(i, t) = ct.Q;
      sol.M(i, t) = ct.M;
      sol.S(i, t) = ct.S;
      sol.lambda(i, t) = t == T ? ct.S : sol.alphas(i, t) * sol.lambda(i, t + 1) + ct.S;
    }
    const double v = cfg.varphi[i];
    for (std::size_t t = 1; t <= T; ++t) {
      const double rp = sol.budgets(i, t - 1);
      const double fp = sol.phi[t - 1];
      const double diff = rp - fp;
      const double P = sampling::inclusion_probability(share(rp, fp, cfg.N), K);
      const double den = 2.0 * (1.0 - v) * P;
      const double Ii = diff * sol.Q(i, t) / den;
      const double Ji = diff * (sol.lambda(i, t) - sol.Q(i, t) * sol.rewards[t]) / den;
      sol.I(i, t) = Ii;
      sol.J(i, t) = Ji;
      const double a = sol.alphas(i, t - 1);
      const bool interior = diff != 0.0 && a > 0.0 && a < 1.0 - cfg.alpha_clamp;
      sol.responsive(i, t) = interior ? 1 : 0;
      if (interior) {
        sol.G(i, t) = diff * Ii;
        sol.H(i, t) = (1.0 - Ji) * fp + Ji * rp;
      } else {
        sol.G(i, t) = 0.0;
        sol.H(i, t) = sol.budgets(i, t);
      }
    }
  }
  sol.distributions.clear();
  for (std::size_t t = 0; t <= T; ++t) {
    sol.distributions.push_back(sampling::distribution(sol.budgets.col_vector(t),
                                                       static_cast<int>(t)));
  }
}

inline double estimate_sqrt_nu(const GameSolution& sol) {
  const auto T = static_cast<std::size_t>(sol.cfg.T);
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < sol.alphas.rows(); ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      lo = std::min(lo, sol.alphas(i, t));
      hi = std::max(hi, sol.alphas(i, t));
    }
  }
  const double rl = sol.cfg.rho_L, rh = sol.cfg.rho_H;
  return std::max(std::abs(lo * rl - hi * rh), std::abs(hi * rl - lo * rh)) /
         std::abs(rl - rh);
}

inline RewardResponse reward_response(const GameSolution& sol, std::size_t t) {
  RewardResponse resp;
  resp.rho_prev = sol.budgets.col_vector(t - 1);
  resp.phi_prev = sol.phi[t - 1];
  resp.I = sol.I.col_vector(t);
  resp.J = sol.J.col_vector(t);
  resp.amax = 1.0 - sol.cfg.alpha_clamp;
  resp.rho_L = sol.cfg.rho_L;
  resp.rho_H = sol.cfg.rho_H;
  return resp;
}

// Rewards for rounds 1..T from the first-order condition; round 0 has no
// budget response and sits at the floor.
inline double update_rewards(GameSolution& sol) {
  const GameConfig& cfg = sol.cfg;
  const auto T = static_cast<std::size_t>(cfg.T);
  double change = 0.0;
  sol.reward_at_floor.assign(T + 1, false);
  const double old0 = sol.rewards[0];
  sol.rewards[0] = cfg.reward_floor;
  sol.reward_at_floor[0] = true;
  change = std::max(change, std::abs(sol.rewards[0] - old0) / std::max(old0, cfg.reward_floor));
  for (std::size_t t = 1; t <= T; ++t) {
    const RewardResponse resp = reward_response(sol, t);
    const RewardResult r =
        optimal_reward_clamped(static_cast<int>(t) + 1, resp, cfg.theta, cfg.datasizes,
                               cfg.gamma, cfg.reward_floor, cfg.reward_cap);
    change = std::max(change, std::abs(r.R - sol.rewards[t]) / std::max(r.R, sol.rewards[t]));
    sol.rewards[t] = r.R;
    sol.reward_at_floor[t] = r.at_floor;
  }
  return change;
}

inline GameSolution mean_field_fixed_point(const GameConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  if (!config.complete()) throw ConfigError("game config: per-client attributes missing");
  GameSolution sol;
  sol.cfg = config;
  const GameConfig& cfg = sol.cfg;
  const auto n = static_cast<std::size_t>(cfg.N);
  const auto T = static_cast<std::size_t>(cfg.T);
  const double mean0 = stable_sum(cfg.initial_budgets.begin(), cfg.initial_budgets.end()) /
                       static_cast<double>(n);
  sol.phi.assign(T + 1, mean0);
  if (cfg.fixed_rewards.empty()) {
    sol.rewards.assign(T + 1, cfg.initial_reward);
  } else {
    sol.rewards = cfg.fixed_rewards;
  }
  sol.reward_at_floor.assign(T + 1, false);
  sol.alphas = RealMatrix(n, T + 1, cfg.initial_alpha);
  sol.budgets = RealMatrix(n, T + 1);
  for (std::size_t i = 0; i < n; ++i) {
    sol.alphas(i, T) = 0.0;
    sol.budgets(i, 0) = cfg.initial_budgets[i];
  }

  std::vector<double> alpha(T + 1), rho(T + 1);
  double step = 1.0;
  int stalls = 0;
  const int limit = cfg.max_outer_iters + cfg.max_polish_iters;
  for (int m = 1; m <= limit; ++m) {
    // Clients' best responses to the current mean field and rewards.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t <= T; ++t) alpha[t] = sol.alphas(i, t);
      rho[0] = cfg.initial_budgets[i];
      ClientProblem prob(cfg, i, sol.phi, sol.rewards);
      sol.best_response_sweeps += prob.best_response(alpha, rho);
      for (std::size_t t = 0; t <= T; ++t) sol.alphas(i, t) = alpha[t];
    }
    // Forward pass with the mean field taken round by round. The residual is
    // the gap between the induced mean and the field the clients answered.
    std::vector<double> next_phi(T + 1);
    double residual = 0.0;
    for (std::size_t t = 0; t <= T; ++t) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (t > 0) {
          sol.budgets(i, t) =
              budget_update(sol.budgets(i, t - 1), sol.alphas(i, t - 1), next_phi[t - 1], cfg);
        }
        acc += sol.budgets(i, t);
      }
      const double mean = acc / static_cast<double>(n);
      residual = std::max(residual, std::abs(mean - sol.phi[t]));
      next_phi[t] = sol.phi[t] + step * (mean - sol.phi[t]);
    }
    sol.phi = next_phi;
    // Halve the step when the residual stops shrinking (cycling best responses).
    if (m > 1 && residual >= 0.95 * sol.residual_history.back() && residual > cfg.eps0) {
      if (++stalls >= 2) {
        step = std::max(0.5 * step, cfg.min_damping);
        stalls = 0;
      }
    } else {
      stalls = 0;
    }
    compute_auxiliaries(sol);
    const double reward_change = cfg.fixed_rewards.empty() ? update_rewards(sol) : 0.0;
    sol.residual_history.push_back(residual);
    sol.reward_change_history.push_back(reward_change);
    sol.total_iterations = m;
    sol.final_residual = residual;
    if (!sol.converged && residual <= cfg.eps0) {
      sol.converged = true;
      sol.outer_iterations = m;
    }
    if (!sol.converged && m >= cfg.max_outer_iters) break;
    if (sol.converged &&
        ((residual <= cfg.polish_tol && reward_change <= cfg.polish_tol) ||
         m - sol.outer_iterations >= cfg.max_polish_iters)) {
      break;
    }
  }
  if (!sol.converged) {
    throw SolverError("mean-field fixed point did not reach eps0 within " +
                          std::to_string(cfg.max_outer_iters) + " iterations",
                      sol.residual_history);
  }
  // Leave budgets, costates and responses consistent with the final rewards.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t <= T; ++t) alpha[t] = sol.alphas(i, t);
    rho[0] = cfg.initial_budgets[i];
    ClientProblem prob(cfg, i, sol.phi, sol.rewards);
    sol.best_response_sweeps += prob.best_response(alpha, rho);
    for (std::size_t t = 0; t <= T; ++t) {
      sol.alphas(i, t) = alpha[t];
      sol.budgets(i, t) = rho[t];
    }
  }
  compute_auxiliaries(sol);
  sol.sqrt_nu = estimate_sqrt_nu(sol);
  sol.final_damping = step;
  sol.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

struct DeviationGrid {
  int alpha_points = 50;
  int reward_points = 50;
  double reward_decades = 1.0;  // R* x 10^[-d, d]
};

struct DeviationReport {
  double worst_client_gain = 0.0;      // absolute
  double worst_client_gain_rel = 0.0;  // relative to |U_i|
  std::size_t worst_client = 0;
  std::size_t worst_client_round = 0;
  double worst_server_reduction = 0.0;
  double worst_server_reduction_rel = 0.0;
  std::size_t worst_server_round = 0;
  bool client_ok(double rel_tol) const { return worst_client_gain_rel <= rel_tol; }
  bool server_ok(double rel_tol) const { return worst_server_reduction_rel <= rel_tol; }
};

inline DeviationReport verify_sne(const GameSolution& sol, const DeviationGrid& grid = {}) {
  const GameConfig& cfg = sol.cfg;
  const auto n = static_cast<std::size_t>(cfg.N);
  const auto T = static_cast<std::size_t>(cfg.T);
  DeviationReport rep;
  const std::vector<double> agrid =
      numeric::linspace(0.0, 1.0 - cfg.alpha_clamp, grid.alpha_points);
  std::vector<double> alpha(T + 1), rho(T + 1);
  for (std::size_t i = 0; i < n; ++i) {
    ClientProblem prob(cfg, i, sol.phi, sol.rewards);
    for (std::size_t t = 0; t <= T; ++t) alpha[t] = sol.alphas(i, t);
    rho[0] = cfg.initial_budgets[i];
    const double base = prob.utility(alpha, rho);
    const double scale = std::max(std::abs(base), std::numeric_limits<double>::min());
    for (std::size_t t = 0; t < T; ++t) {
      const double keep = alpha[t];
      for (double a : agrid) {
        alpha[t] = a;
        const double gain = prob.utility(alpha, rho) - base;
        if (gain / scale > rep.worst_client_gain_rel) {
          rep.worst_client_gain_rel = gain / scale;
          rep.worst_client_gain = gain;
          rep.worst_client = i;
          rep.worst_client_round = t;
        }
      }
      alpha[t] = keep;
    }
  }
  const std::vector<double> ugrid =
      numeric::linspace(-grid.reward_decades, grid.reward_decades, grid.reward_points);
  for (std::size_t t = 1; t <= T; ++t) {
    const RewardResponse resp = reward_response(sol, t);
    const int t_eff = static_cast<int>(t) + 1;
    const double base =
        response_cost(sol.rewards[t], resp, cfg.theta, cfg.datasizes, t_eff, cfg.gamma);
    for (double u : ugrid) {
      const double R = std::max(cfg.reward_floor, sol.rewards[t] * std::pow(10.0, u));
      const double red =
          base - response_cost(R, resp, cfg.theta, cfg.datasizes, t_eff, cfg.gamma);
      if (red / std::abs(base) > rep.worst_server_reduction_rel) {
        rep.worst_server_reduction_rel = red / std::abs(base);
        rep.worst_server_reduction = red;
        rep.worst_server_round = t;
      }
    }
  }
  return rep;
}

struct ConsistencyReport {
  double lambda_residual = 0.0;          // max |lambda(t) - alpha lambda(t+1) - S(t)|
  double lambda_terminal_residual = 0.0; // max |lambda(T) - S(T)|
  double response_residual_rel = 0.0;    // max |rho - (G R + H)| / rho on responsive rounds
  double correction_residual = 0.0;      // max |alpha - correction_factor| over all t < T
  double fixed_point_residual = 0.0;     // max |phi(t) - mean rho(t)|
  bool terminal_alpha_zero = true;
  std::size_t responsive_rounds = 0;
};

// Recomputes costates from scratch with the given form and checks the
// identities that hold at a solved profile.
inline ConsistencyReport check_consistency(const GameSolution& sol,
                                           CostateForm form = CostateForm::kExact) {
  const GameConfig& cfg = sol.cfg;
  const auto n = static_cast<std::size_t>(cfg.N);
  const auto T = static_cast<std::size_t>(cfg.T);
  ConsistencyReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.alphas(i, T) != 0.0) rep.terminal_alpha_zero = false;
    std::vector<double> S(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
      S[t] = costate_terms(i, sol.budgets(i, t), sol.alphas(i, t), sol.rewards[t],
                           sol.phi[t], cfg, form).S;
    }
    rep.lambda_terminal_residual =
        std::max(rep.lambda_terminal_residual, std::abs(sol.lambda(i, T) - S[T]));
    for (std::size_t t = 0; t < T; ++t) {
      rep.lambda_residual =
          std::max(rep.lambda_residual, std::abs(sol.lambda(i, t) -
                                                 sol.alphas(i, t) * sol.lambda(i, t + 1) -
                                                 S[t]));
      std::vector<double> fa(sol.alphas.row(i) + t + 1, sol.alphas.row(i) + T);
      std::vector<double> fs(S.begin() + static_cast<std::ptrdiff_t>(t) + 1, S.end());
      const double cf = correction_factor(i, sol.budgets(i, t), sol.phi[t], fa, fs, cfg);
      rep.correction_residual =
          std::max(rep.correction_residual, std::abs(cf - sol.alphas(i, t)));
    }
    for (std::size_t t = 1; t <= T; ++t) {
      if (!sol.responsive(i, t)) continue;
      ++rep.responsive_rounds;
      const double pred = sol.G(i, t) * sol.rewards[t] + sol.H(i, t);
      rep.response_residual_rel =
          std::max(rep.response_residual_rel,
                   std::abs(sol.budgets(i, t) - pred) / sol.budgets(i, t));
    }
  }
  for (std::size_t t = 0; t <= T; ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += sol.budgets(i, t);
    rep.fixed_point_residual =
        std::max(rep.fixed_point_residual, std::abs(sol.phi[t] - acc / static_cast<double>(n)));
  }
  return rep;
}

}  // namespace game
}  // namespace pacs
