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
#include <limits>
#include <vector>

#include "pacs/common.hpp"
#include "pacs/fltrain.hpp"

namespace pacs::fl {

struct BoundConstants {
  double beta = 0.0;
  double psi = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  double kappa_G = 0.0;
  double M = 0.0;
  double M_V = 0.0;
  double D = 0.0;       // local gradient bound
  double V = 0.0;       // global gradient bound
  double g_norm = 0.0;  // subgradient norm for the non-convex bound
  int d = 0;
  double W = 0.0;
  double eta = 0.0;
  double rho_L = 0.0;
  double rho_H = 0.0;
  int N = 0;
  int K = 0;

  // Learning-rate condition for the rate/error bounds.
  double eta_max() const { return kappa / (beta * (M_V + kappa_G * kappa_G)); }
  bool eta_ok() const { return eta <= eta_max(); }
  // [(N-1) rho_H + rho_L] / (K rho_L)
  double spread() const {
    return ((N - 1) * rho_H + rho_L) / (static_cast<double>(K) * rho_L);
  }
};

// Trajectory estimates of the assumption constants. Lower-bound constants are
// divided by `inflate`, upper-bound constants multiplied. With full-batch
// local gradients the variance constants are exactly zero.
inline BoundConstants estimate_constants(const SyntheticTask& task, const GameConfig& cfg,
                                         const std::vector<FLRunRecord>& runs,
                                         const RunOptions& opt, double inflate = 1.1) {
  if (runs.empty()) throw DomainError("estimate_constants: no runs");
  BoundConstants c;
  c.beta = task.beta;
  c.psi = task.psi;
  c.mu = task.mu;
  c.d = task.dimension;
  c.W = cfg.W;
  c.eta = opt.eta;
  c.rho_L = cfg.rho_L;
  c.rho_H = cfg.rho_H;
  c.N = cfg.N;
  c.K = runs.front().K;

  double kappa = std::numeric_limits<double>::infinity();
  double kappa_g = 0.0, dmax = 0.0, vmax = 0.0, var_max = 0.0;
  const bool stochastic = opt.epochs > 1 || opt.batch > 0;
  for (const FLRunRecord& r : runs) {
    for (const auto& wv : r.models) {
      const Eigen::VectorXd w = to_eigen(wv);
      const Eigen::VectorXd g = task.gradient(w);
      const double gn2 = g.squaredNorm();
      vmax = std::max(vmax, std::sqrt(gn2));
      for (std::size_t i = 0; i < task.size(); ++i) {
        const Eigen::VectorXd gi = task.local_gradient(i, w);
        dmax = std::max(dmax, gi.norm());
        if (gn2 > 0.0) {
          kappa = std::min(kappa, g.dot(gi) / gn2);
          kappa_g = std::max(kappa_g, gi.norm() / std::sqrt(gn2));
        }
      }
    }
  }
  if (stochastic) {
    // Sample variance of the local estimator at the final models.
    for (const FLRunRecord& r : runs) {
      const Eigen::VectorXd w = to_eigen(r.final_model);
      for (std::size_t i = 0; i < task.size(); ++i) {
        const Eigen::VectorXd mean = task.local_gradient(i, w);
        double acc = 0.0;
        constexpr int kDraws = 16;
        for (int k = 0; k < kDraws; ++k) {
          RandomStream s = RandomStream(r.seed).split({0xa55, i, static_cast<std::uint64_t>(k)});
          acc += (local_sgd(task, i, w, opt.eta, opt.epochs, opt.batch, s) - mean).squaredNorm();
        }
        var_max = std::max(var_max, acc / kDraws);
      }
    }
  }
  c.kappa = kappa / inflate;
  c.kappa_G = kappa_g * inflate;
  c.D = dmax * inflate;
  c.V = vmax * inflate;
  c.g_norm = c.V;
  c.M = var_max * inflate;
  c.M_V = 0.0;
  return c;
}

// Accuracy loss bound at iteration t.
inline double accuracy_loss_upper_bound(const BoundConstants& c,
                                        const std::vector<double>& budgets,
                                        const std::vector<double>& theta,
                                        const std::vector<double>& datasizes, double t) {
  require_same_length(budgets.size(), theta.size(), "accuracy_loss_upper_bound");
  require_same_length(budgets.size(), datasizes.size(), "accuracy_loss_upper_bound");
  if (!(t > 0.0)) throw DomainError("accuracy_loss_upper_bound: t must be >= 1");
  double s = 0.0;
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    s += theta[i] * theta[i] / (datasizes[i] * datasizes[i] * budgets[i]);
  }
  return c.beta / (2.0 * c.mu * c.mu * t) * (c.V * c.V + 2.0 * c.d * c.W * c.W * s);
}

struct GapBounds {
  double convex = 0.0;
  double nonconvex = 0.0;
  double decay = 0.0;
  bool convex_valid = false;  // decay factor inside (0, 1)
};

// Expected optimality gap after T rounds for convex and non-convex losses.
inline GapBounds optimality_gap_bounds(const BoundConstants& c, int T, double init_dist_sq,
                                       double total_datasize) {
  const double r = c.spread();
  const double eta = c.eta;
  const double K = c.K;
  const double noise = c.D * c.D + 2.0 * c.d * K * c.W * c.W /
                                       (c.rho_L * total_datasize * total_datasize);
  GapBounds out;
  out.decay = 1.0 - c.psi * eta * r;
  out.convex_valid = out.decay > 0.0 && out.decay < 1.0;
  const double inner = c.beta * c.D * c.D * eta * eta * eta * r + eta * eta * r * r * noise +
                       c.beta * eta * eta * eta * r * r * r * noise;
  double geo = 0.0, pw = 1.0;
  for (int s = 0; s < T; ++s) {
    geo += pw;
    pw *= out.decay;
  }
  out.convex = pw * init_dist_sq + geo * inner;
  const double Td = T;
  out.nonconvex = (1.0 + 2.0 * Td * eta * c.g_norm * r) * init_dist_sq +
                  Td * c.beta * eta * eta * eta * r * r * r * noise +
                  Td * eta * eta * r * r * ((Td - 1.0) * c.g_norm * c.D + noise) +
                  Td * c.beta * c.D * c.D * eta * eta * eta * r;
  return out;
}

// Expected one-round change of F. probs and sigma2 are those used by the
// update that produced w(t) from w(t-1).
inline double one_round_progress_bound(const BoundConstants& c,
                                       const std::vector<double>& theta,
                                       const std::vector<double>& probs,
                                       const std::vector<double>& sigma2,
                                       double grad_norm_sq_prev) {
  require_same_length(theta.size(), probs.size(), "one_round_progress_bound");
  require_same_length(theta.size(), sigma2.size(), "one_round_progress_bound");
  const double eta = c.eta;
  double noise = 0.0, sample = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double t2 = theta[i] * theta[i];
    noise += t2 * sigma2[i];
    sample += t2 / probs[i] * (c.D * c.D + c.d * sigma2[i]);
  }
  return -eta * c.kappa / 2.0 * grad_norm_sq_prev + c.d * c.beta * eta * eta / 2.0 * noise +
         c.beta * eta / (2.0 * c.K) * sample + c.M * c.beta * eta * eta * c.N / 2.0;
}

struct ConvergenceBounds {
  double rate = 0.0;   // bound on E[F(w(T))] - F(w*)
  double error = 0.0;  // bound on (1/T) sum E||grad F(w(t))||^2
  double contraction = 0.0;  // 1 - mu eta kappa
  bool valid = false;        // learning-rate condition and contraction in (0,1)
};

// Rate and error bounds over rounds 0..T-1 of a run's x and sigma trajectories.
inline ConvergenceBounds convergence_rate_and_error_bounds(const BoundConstants& c,
                                                           const std::vector<double>& theta,
                                                           const RealMatrix& probs,
                                                           const RealMatrix& sigma2, int T,
                                                           double initial_gap) {
  if (T < 1) throw DomainError("convergence bounds: T must be >= 1");
  const double eta = c.eta;
  const double K = c.K;
  ConvergenceBounds out;
  out.contraction = 1.0 - c.mu * eta * c.kappa;
  out.valid = c.eta_ok() && out.contraction > 0.0 && out.contraction < 1.0;
  double rate_sum = 0.0, err_sum = 0.0, pw = 1.0;
  for (int t = 0; t < T; ++t) {
    const auto col = static_cast<std::size_t>(t);
    double rate_term = c.M * c.N * eta;
    double err_term = c.M * c.beta * eta * eta * c.N / 2.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double t2 = theta[i] * theta[i];
      const double kx = K * probs(i, col);
      const double s2 = sigma2(i, col);
      rate_term += t2 * c.D * c.D / kx + (1.0 / kx + eta) * c.d * t2 * s2;
      err_term += t2 / kx * (c.D * c.D + c.d * s2) + c.d * eta * t2 * s2;
    }
    rate_sum += pw * rate_term;
    err_sum += err_term;
    pw *= out.contraction;
  }
  out.rate = pw * initial_gap + c.beta * eta / 2.0 * rate_sum;
  out.error = 2.0 / (eta * c.kappa * T) * initial_gap + c.beta * eta / (2.0 * T) * err_sum;
  return out;
}

}  // namespace pacs::fl
