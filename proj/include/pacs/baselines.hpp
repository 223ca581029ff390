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

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacs/common.hpp"
#include "pacs/sampling.hpp"

namespace pacs {

enum class Strategy { kPrivacyAware, kRandom, kGradientNorm, kFedCbs, kDelta };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kPrivacyAware: return "fedpcs";
    case Strategy::kRandom: return "random";
    case Strategy::kGradientNorm: return "gradnorm";
    case Strategy::kFedCbs: return "fedcbs";
    case Strategy::kDelta: return "delta";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "fedpcs" || s == "privacy-aware") return Strategy::kPrivacyAware;
  if (s == "random") return Strategy::kRandom;
  if (s == "gradnorm" || s == "gradient-norm" || s == "aocs") return Strategy::kGradientNorm;
  if (s == "fedcbs" || s == "fed-cbs") return Strategy::kFedCbs;
  if (s == "delta") return Strategy::kDelta;
  throw ConfigError("strategy: unknown strategy '" + s + "'");
}

namespace baselines {

class NotImplemented : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

[[noreturn]] inline void not_implemented(Strategy s) {
  throw NotImplemented(std::string("strategy '") + to_string(s) + "': not implemented");
}

// Fixed sampling probability 1/N.
inline SamplingDistribution random_distribution(std::size_t n, int round = 0) {
  if (n == 0) throw DomainError("random_distribution: N must be >= 1");
  return sampling::uniform(n, round);
}

// Probabilities proportional to the l2 norm of each client's update. All-zero
// norms fall back to uniform and set *fallback.
inline SamplingDistribution gradient_norm_distribution(const std::vector<double>& norms,
                                                       bool* fallback = nullptr) {
  if (norms.empty()) throw DomainError("gradient_norm_distribution: no clients");
  double total = 0.0;
  for (double v : norms) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("gradient_norm_distribution: norms must be finite and >= 0");
    }
    total += v;
  }
  if (fallback) *fallback = !(total > 0.0);
  if (!(total > 0.0)) return sampling::uniform(norms.size());
  SamplingDistribution d;
  d.probs.resize(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) d.probs[i] = norms[i] / total;
  return d;
}

inline SamplingDistribution gradient_norm_distribution(
    const std::vector<std::vector<double>>& gradients, bool* fallback = nullptr) {
  std::vector<double> norms;
  norms.reserve(gradients.size());
  for (const auto& g : gradients) {
    double sq = 0.0;
    for (double v : g) sq += v * v;
    norms.push_back(std::sqrt(sq));
  }
  return gradient_norm_distribution(norms, fallback);
}

// Named placeholders; both need label-distribution statistics.
inline SamplingDistribution fedcbs_distribution(std::size_t) {
  not_implemented(Strategy::kFedCbs);
}

inline SamplingDistribution delta_distribution(std::size_t) {
  not_implemented(Strategy::kDelta);
}

}  // namespace baselines
}  // namespace pacs
