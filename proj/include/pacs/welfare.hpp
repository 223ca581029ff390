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
#include <limits>
#include <vector>

#include "pacs/common.hpp"

namespace pacs::welfare {

inline double social_welfare(const RealMatrix& budgets, const std::vector<double>& rewards,
                             const std::vector<double>& varphi) {
  require_same_length(budgets.rows(), varphi.size(), "social_welfare varphi");
  require_same_length(budgets.cols(), rewards.size(), "social_welfare rewards");
  double sw = 0.0;
  for (std::size_t t = 0; t < budgets.cols(); ++t) {
    for (std::size_t i = 0; i < budgets.rows(); ++i) {
      const double rho = budgets(i, t);
      sw += rho * rewards[t] - varphi[i] * rho * rho;
    }
  }
  return sw;
}

struct OptimalBudget {
  double unclamped = 0.0;
  double clamped = 0.0;
};

inline OptimalBudget socially_optimal_budget(double R, double varphi, double rho_l,
                                             double rho_h) {
  if (!(varphi > 0.0 && varphi < 1.0)) throw DomainError("varphi must be in (0, 1)");
  const double rho = R / (2.0 * varphi);
  return {rho, clamp_to(rho, rho_l, rho_h)};
}

inline double sum_inverse(const std::vector<double>& varphi) {
  double s = 0.0;
  for (double v : varphi) s += 1.0 / v;
  return s;
}

inline double optimal_social_welfare(const std::vector<double>& rewards,
                                     const std::vector<double>& varphi) {
  double r2 = 0.0;
  for (double r : rewards) r2 += r * r;
  return 0.25 * r2 * sum_inverse(varphi);
}

struct PoaValue {
  double value = 0.0;
  bool finite = true;  // false when the Nash welfare is not positive
};

inline PoaValue poa(double sw_opt, double sw_nash) {
  if (!(sw_nash > 0.0)) return {std::numeric_limits<double>::infinity(), false};
  return {sw_opt / sw_nash, true};
}

// Welfare when every client sits at budget rho in every round.
inline double uniform_budget_welfare(const std::vector<double>& rewards,
                                     const std::vector<double>& varphi, double rho,
                                     std::size_t n, int T) {
  double sum_r = 0.0, sum_v = 0.0;
  for (double r : rewards) sum_r += r;
  for (double v : varphi) sum_v += v;
  return static_cast<double>(n) * rho * sum_r - (T + 1) * rho * rho * sum_v;
}

// Worst-case Nash under random sampling: everyone at rho_L.
inline double random_nash_welfare(const std::vector<double>& rewards,
                                  const std::vector<double>& varphi, double rho_l,
                                  std::size_t n, int T) {
  return uniform_budget_welfare(rewards, varphi, rho_l, n, T);
}

// Worst-case Nash under privacy-aware sampling: everyone at rho_H.
inline double privacy_worst_nash_welfare(const std::vector<double>& rewards,
                                         const std::vector<double>& varphi, double rho_h,
                                         std::size_t n, int T) {
  return uniform_budget_welfare(rewards, varphi, rho_h, n, T);
}

inline double random_poa_lower_bound(const std::vector<double>& rewards,
                                     const std::vector<double>& varphi, double rho_l,
                                     std::size_t n, int T) {
  double sum_r = 0.0;
  for (double r : rewards) sum_r += r;
  return sum_r * sum_inverse(varphi) / (4.0 * static_cast<double>(n) * rho_l * (T + 1));
}

struct PrivacyPoaBound {
  double value = std::numeric_limits<double>::infinity();
  double limit = 0.0;            // rho_H -> infinity
  bool denominator_positive = false;
  bool premise_holds = false;    // N sum R <= (T+1) sum varphi
  bool applicable() const { return denominator_positive && premise_holds; }
};

inline PrivacyPoaBound privacy_poa_upper_bound(double r_max, std::size_t n,
                                               const std::vector<double>& varphi,
                                               double rho_h,
                                               const std::vector<double>& rewards, int T) {
  double sum_r = 0.0, sum_v = 0.0;
  for (double r : rewards) sum_r += r;
  for (double v : varphi) sum_v += v;
  const double nd = static_cast<double>(n);
  PrivacyPoaBound b;
  b.limit = r_max * sum_inverse(varphi) / (2.0 * nd);
  const double den = nd - (T + 1) * sum_v / (rho_h * sum_r);
  b.denominator_positive = den > 0.0;
  b.premise_holds = nd * sum_r <= (T + 1) * sum_v;
  if (b.denominator_positive) b.value = r_max * sum_inverse(varphi) / (2.0 * den);
  return b;
}

struct WelfareReport {
  double sw_opt = 0.0;
  double sw_nash = 0.0;        // solved privacy-aware profile
  double sw_rand = 0.0;        // worst-case random Nash
  double sw_pri_worst = 0.0;   // worst-case privacy-aware Nash
  PoaValue poa_nash;
  PoaValue poa_rand;
  PoaValue poa_pri_worst;
  double rand_lower_bound = 0.0;
  PrivacyPoaBound pri_upper_bound;
  double r_max = 0.0;
  double cauchy_schwarz_ratio = 0.0;  // sum R^2 / sum R
};

inline WelfareReport welfare_report(const RealMatrix& budgets,
                                    const std::vector<double>& rewards,
                                    const std::vector<double>& varphi, double rho_l,
                                    double rho_h) {
  const std::size_t n = budgets.rows();
  const int T = static_cast<int>(rewards.size()) - 1;
  WelfareReport w;
  w.sw_opt = optimal_social_welfare(rewards, varphi);
  w.sw_nash = social_welfare(budgets, rewards, varphi);
  w.sw_rand = random_nash_welfare(rewards, varphi, rho_l, n, T);
  w.sw_pri_worst = privacy_worst_nash_welfare(rewards, varphi, rho_h, n, T);
  w.poa_nash = poa(w.sw_opt, w.sw_nash);
  w.poa_rand = poa(w.sw_opt, w.sw_rand);
  w.poa_pri_worst = poa(w.sw_opt, w.sw_pri_worst);
  w.rand_lower_bound = random_poa_lower_bound(rewards, varphi, rho_l, n, T);
  w.r_max = *std::max_element(rewards.begin(), rewards.end());
  w.pri_upper_bound = privacy_poa_upper_bound(w.r_max, n, varphi, rho_h, rewards, T);
  double r1 = 0.0, r2 = 0.0;
  for (double r : rewards) {
    r1 += r;
    r2 += r * r;
  }
  w.cauchy_schwarz_ratio = r1 > 0.0 ? r2 / r1 : 0.0;
  return w;
}

}  // namespace pacs::welfare
