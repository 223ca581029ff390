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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pacs/zcdp.hpp"

namespace pacs::zcdp {
namespace {

TEST(NoiseVariance, KnownValues) {
  EXPECT_DOUBLE_EQ(noise_variance(2.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(noise_variance(2.0, 2.0, 1.0), 0.25);
  EXPECT_NEAR(noise_variance(0.5, 10.0, 3.0), 0.36, 1e-15);
}

TEST(NoiseVariance, RejectsNonPositiveInputs) {
  EXPECT_THROW(noise_variance(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(noise_variance(-1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(noise_variance(1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(noise_variance(1.0, 1.0, 0.0), DomainError);
}

TEST(NoiseVariance, DecreasesInBudgetAndDatasize) {
  for (double rho = 0.1; rho < 5.0; rho += 0.1) {
    for (double d = 1.0; d < 100.0; d *= 1.7) {
      const double v = noise_variance(rho, d, 1.0);
      EXPECT_LT(noise_variance(rho * 1.01, d, 1.0), v);
      EXPECT_LT(noise_variance(rho, d * 1.01, 1.0), v);
    }
  }
}

TEST(NoiseVariance, MatchesGaussianMechanismIdentity) {
  for (double rho : {0.05, 0.7, 3.0}) {
    for (double d : {1.0, 13.0, 400.0}) {
      const double s = sensitivity(d, 2.5);
      EXPECT_NEAR(noise_variance(rho, d, 2.5), s * s / (2.0 * rho),
                  1e-14 * noise_variance(rho, d, 2.5));
    }
  }
}

TEST(Perturb, ZeroVarianceIsIdentity) {
  RandomStream rng(3);
  const std::vector<double> g{1.0, -2.0, 0.5};
  EXPECT_EQ(perturb_gradient(g, NoiseSpec{0.0, 3, 1.0}, rng), g);
}

TEST(Perturb, RejectsShapeMismatch) {
  RandomStream rng(3);
  EXPECT_THROW(perturb_gradient({1.0, 2.0}, NoiseSpec{1.0, 3, 1.0}, rng), ShapeError);
}

TEST(Perturb, SameSeedSameNoise) {
  const std::vector<double> g(16, 0.25);
  const NoiseSpec spec = make_spec(0.3, 5.0, 1.0, 16);
  RandomStream a(42), b(42), c(43);
  const auto x = perturb_gradient(g, spec, a);
  EXPECT_EQ(x, perturb_gradient(g, spec, b));
  EXPECT_NE(x, perturb_gradient(g, spec, c));
}

TEST(Perturb, EmpiricalMomentsMatchSpec) {
  const std::size_t dim = 100000;
  const NoiseSpec spec = make_spec(0.5, 10.0, 3.0, dim);
  RandomStream rng(2026);
  const auto x = perturb_gradient(std::vector<double>(dim, 0.0), spec, rng);
  double m = 0.0, v = 0.0;
  for (double e : x) m += e;
  m /= dim;
  for (double e : x) v += (e - m) * (e - m);
  v /= dim - 1;
  EXPECT_NEAR(v, 0.36, 0.02 * 0.36);
  EXPECT_LT(std::abs(m), 3.0 * std::sqrt(0.36 / dim));
}

TEST(ClipNorm, ScalesOnlyWhenOutside) {
  EXPECT_EQ(clip_norm({0.3, 0.4}, 1.0), (std::vector<double>{0.3, 0.4}));
  const auto c = clip_norm({3.0, 4.0}, 1.0);
  EXPECT_NEAR(c[0], 0.6, 1e-15);
  EXPECT_NEAR(c[1], 0.8, 1e-15);
  EXPECT_THROW(clip_norm({1.0}, 0.0), DomainError);
}

}  // namespace
}  // namespace pacs::zcdp
