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
#include <string>
#include <vector>

#include "pacs/common.hpp"
#include "pacs/rng.hpp"

namespace pacs::zcdp {

struct NoiseSpec {
  double variance = 0.0;
  std::size_t dimension = 0;
  double clip = 1.0;
};

// Gaussian variance meeting rho-zCDP for sensitivity 2W/|D|.
inline double noise_variance(double budget, double datasize, double clip) {
  if (!(budget > 0.0)) throw DomainError("noise_variance: budget must be > 0");
  if (!(datasize > 0.0)) throw DomainError("noise_variance: datasize must be > 0");
  if (!(clip > 0.0)) throw DomainError("noise_variance: clip must be > 0");
  return 2.0 * clip * clip / (budget * datasize * datasize);
}

inline double sensitivity(double datasize, double clip) {
  return 2.0 * clip / datasize;
}

inline NoiseSpec make_spec(double budget, double datasize, double clip,
                           std::size_t dimension) {
  return {noise_variance(budget, datasize, clip), dimension, clip};
}

inline std::vector<double> perturb_gradient(const std::vector<double>& gradient,
                                            const NoiseSpec& spec,
                                            RandomStream& rng) {
  require_same_length(gradient.size(), spec.dimension, "perturb_gradient");
  if (spec.variance < 0.0) throw DomainError("perturb_gradient: negative variance");
  std::vector<double> out = gradient;
  if (spec.variance == 0.0) return out;
  const double sd = std::sqrt(spec.variance);
  for (double& v : out) v += sd * rng.normal();
  return out;
}

inline std::vector<double> clip_norm(const std::vector<double>& params, double clip) {
  if (!(clip > 0.0)) throw DomainError("clip_norm: clip must be > 0");
  double sq = 0.0;
  for (double v : params) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm <= clip) return params;
  std::vector<double> out = params;
  const double scale = clip / norm;
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace pacs::zcdp
