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
#include <cstddef>
#include <string>
#include <vector>

#include "pacs/common.hpp"
#include "pacs/rng.hpp"

namespace pacs {

enum class SamplingMode { kWithReplacement, kWithoutReplacement };

inline const char* to_string(SamplingMode mode) {
  return mode == SamplingMode::kWithReplacement ? "with-replacement"
                                                : "without-replacement";
}

inline SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "with-replacement" || s == "with") return SamplingMode::kWithReplacement;
  if (s == "without-replacement" || s == "without") {
    return SamplingMode::kWithoutReplacement;
  }
  throw ConfigError("unknown sampling mode '" + s + "'");
}

struct SamplingDistribution {
  std::vector<double> probs;
  int round = 0;

  std::size_t size() const { return probs.size(); }
};

struct SampledSubset {
  // Draw order; with replacement a client may appear several times.
  std::vector<std::size_t> members;
  SamplingMode mode = SamplingMode::kWithoutReplacement;

  std::size_t multiplicity(std::size_t client) const {
    return static_cast<std::size_t>(
        std::count(members.begin(), members.end(), client));
  }
};

struct ProbabilityBounds {
  double lower = 0.0;
  double upper = 0.0;
};

namespace sampling {

inline SamplingDistribution distribution(const std::vector<double>& budgets,
                                         int round = 0) {
  if (budgets.empty()) throw DomainError("sampling_distribution: no budgets");
  for (double b : budgets) {
    if (!(b > 0.0)) throw DomainError("sampling_distribution: budgets must be > 0");
  }
  const double total = stable_sum(budgets.begin(), budgets.end());
  SamplingDistribution dist;
  dist.round = round;
  dist.probs.resize(budgets.size());
  for (std::size_t i = 0; i < budgets.size(); ++i) dist.probs[i] = budgets[i] / total;
  return dist;
}

inline SamplingDistribution uniform(std::size_t n, int round = 0) {
  if (n == 0) throw DomainError("uniform distribution: N must be >= 1");
  SamplingDistribution dist;
  dist.round = round;
  dist.probs.assign(n, 1.0 / static_cast<double>(n));
  return dist;
}

inline double inclusion_probability(double x, int k) {
  if (k < 1) throw DomainError("inclusion_probability: K must be >= 1");
  return 1.0 - ipow(1.0 - x, k);
}

// Range of x_i when every budget lies in [rho_l, rho_h].
inline ProbabilityBounds probability_bounds(std::size_t n, double rho_l, double rho_h) {
  const double m = static_cast<double>(n) - 1.0;
  return {rho_l / (m * rho_h + rho_l), rho_h / (m * rho_l + rho_h)};
}

inline double normalization_error(const SamplingDistribution& dist) {
  return std::abs(stable_sum(dist.probs.begin(), dist.probs.end()) - 1.0);
}

inline SampledSubset sample_clients(const SamplingDistribution& dist, std::size_t k,
                                    SamplingMode mode, RandomStream& rng) {
  const std::size_t n = dist.size();
  if (n == 0) throw DomainError("sample_clients: empty distribution");
  SampledSubset out;
  out.mode = mode;
  out.members.reserve(k);
  if (mode == SamplingMode::kWithReplacement) {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) cdf[i] = (acc += dist.probs[i]);
    for (std::size_t draw = 0; draw < k; ++draw) {
      const double u = rng.uniform() * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
      out.members.push_back(std::min(idx, n - 1));
    }
    return out;
  }
  if (k > n) throw DomainError("sample_clients: K exceeds N without replacement");
  std::vector<double> w = dist.probs;
  for (std::size_t draw = 0; draw < k; ++draw) {
    const double total = stable_sum(w.begin(), w.end());
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = n;
    std::size_t last_live = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] <= 0.0) continue;
      last_live = i;
      acc += w[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    if (pick == n) pick = last_live;
    out.members.push_back(pick);
    w[pick] = 0.0;
  }
  return out;
}

// Inverse-probability estimate sum_j theta_j / (K x_j) * v_j over the draws.
inline double inverse_probability_estimate(const SampledSubset& subset,
                                           const SamplingDistribution& dist,
                                           const std::vector<double>& theta,
                                           const std::vector<double>& values) {
  const double k = static_cast<double>(subset.members.size());
  double est = 0.0;
  for (std::size_t i : subset.members) {
    est += theta[i] / (k * dist.probs[i]) * values[i];
  }
  return est;
}

}  // namespace sampling
}  // namespace pacs
