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

#include "pacs/adaptive.hpp"

namespace pacs::adaptive {
namespace {

// gamma = 0.5, theta = 2, |D| = 1, t = 1 gives upsilon = 2 and
// 2 G upsilon / (1 - gamma) = 8.
TEST(ClosedForm, FullParticipationExample) {
  const Decision d = reward_and_ratio(1.0, 10.0, 1.0, 0.0, 0.5, 2.0, 1.0, 5);
  EXPECT_DOUBLE_EQ(d.upsilon, 2.0);
  EXPECT_NEAR(d.R, 2.0, 1e-14);
  EXPECT_EQ(d.K, 5);
  EXPECT_DOUBLE_EQ(d.tau, 1.0);
  EXPECT_FALSE(d.tau_clipped);
}

TEST(ClosedForm, FloorExample) {
  const Decision d = reward_and_ratio(1.0, 7.0, 1.0, 0.0, 0.5, 2.0, 1.0, 5);
  EXPECT_EQ(d.K, 3);
  EXPECT_DOUBLE_EQ(d.tau, 0.6);
}

TEST(ClosedForm, ClipsAndRaisesK) {
  EXPECT_TRUE(reward_and_ratio(1.0, 100.0, 1.0, 0.0, 0.5, 2.0, 1.0, 5).tau_clipped);
  const Decision low = reward_and_ratio(1.0, 1.0, 1.0, 0.0, 0.5, 2.0, 1.0, 5);
  EXPECT_TRUE(low.k_raised);
  EXPECT_EQ(low.K, 1);
}

TEST(ClosedForm, DegenerateGameRejected) {
  EXPECT_THROW(reward_and_ratio(1.0, 10.0, 0.0, 0.0, 0.5, 2.0, 1.0, 5), DomainError);
}

TEST(ClosedForm, StationarityHolds) {
  RandomStream rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    const double G = rng.uniform(0.1, 3.0), H = rng.uniform(-0.5, 0.5);
    const double gamma = rng.uniform(0.05, 0.95);
    const double B = rng.uniform(0.5, 50.0);
    const Decision d = reward_and_ratio(1.0 + rng.below(30), B, G, H, gamma,
                                        rng.uniform(0.01, 1.0), rng.uniform(1.0, 100.0), 20);
    const KktResiduals r = kkt_residuals(d, B, G, H, gamma);
    EXPECT_LT(r.stationarity_R, 1e-8);
    EXPECT_LT(r.stationarity_K, 1e-8);
    EXPECT_LT(r.slackness, 1e-8 * std::max(1.0, std::abs(d.delta)));
  }
}

TEST(ClosedForm, MultiplierNegativeForPositiveReward) {
  // With H = 0 the multiplier is -(3/2)(1 - gamma) s / G.
  RandomStream rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    const double G = rng.uniform(0.1, 3.0), gamma = rng.uniform(0.05, 0.95);
    const Decision d = reward_and_ratio(1.0, 5.0, G, 0.0, gamma, 0.5, 10.0, 10);
    EXPECT_GT(d.R, 0.0);
    EXPECT_LT(d.delta, 0.0);
    EXPECT_FALSE(d.constraint_active);
    EXPECT_NEAR(d.delta, -1.5 * (1.0 - gamma) * d.rho / G, 1e-12 * d.rho / G);
  }
}

TEST(GridOracle, InequalityConstrainedOptimumUsesOneClient) {
  // Cost grows with K at fixed R, so the literal problem picks K = 1.
  const GridResult g = grid_search(10.0, 1.0, 0.0, 2.0, 0.5, 5, 0.01, 10.0, 2000);
  ASSERT_TRUE(g.feasible);
  EXPECT_EQ(g.K, 1);
  EXPECT_NEAR(g.R, std::cbrt(2.0), g.cell);
}

TEST(GridOracle, BudgetExhaustingOptimumMatchesClosedForm) {
  // With K rho = B imposed, the cost B ups / rho^2 + (1 - gamma) B R is
  // minimized at the closed-form reward.
  const double B = 10.0, ups = 2.0, gamma = 0.5;
  double best = 0.0, best_cost = 1e300;
  for (int j = 1; j <= 100000; ++j) {
    const double R = j * 1e-4;
    const double cost = round_cost(R, B / R, 1.0, 0.0, ups, gamma);
    if (cost < best_cost) {
      best_cost = cost;
      best = R;
    }
  }
  EXPECT_NEAR(best, reward_and_ratio(1.0, B, 1.0, 0.0, gamma, 2.0, 1.0, 5).R, 1e-4);
}

struct Fixture {
  GameConfig cfg;
  fl::SyntheticTask task;
};

Fixture homogeneous(int T) {
  GameConfig cfg;
  cfg.N = 10;
  cfg.T = T;
  cfg.d = 4;
  cfg.rho_L = 0.01;
  cfg.rho_H = 5.0;
  cfg.datasize_min = cfg.datasize_max = 30.0;
  cfg = populate_clients(cfg, 2);
  fl::TaskSpec spec;
  return {cfg, fl::make_task(spec, cfg, 2)};
}

TEST(Driver, UsageNeverExceedsBudget) {
  const Fixture f = homogeneous(12);
  Schedule s;
  for (int t = 0; t <= 12; ++t) s.B.push_back(0.02 + 0.01 * t);
  for (auto strategy : {Strategy::kPrivacyAware, Strategy::kRandom}) {
    AdaptiveOptions opt;
    opt.strategy = strategy;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const AdaptiveRun run = run_adaptive(f.cfg, s, f.task, seed, opt);
      for (const PlanRow& r : run.plan) {
        EXPECT_LE(r.usage_ratio, 1.0 + 1e-12);
        if (!r.skipped && r.t < 12) {
          EXPECT_EQ(run.subsets[static_cast<std::size_t>(r.t)].size(),
                    static_cast<std::size_t>(r.K));
        }
      }
    }
  }
}

TEST(Driver, ConstantBudgetFrozenIndexGivesConstantRatio) {
  const Fixture f = homogeneous(10);
  Schedule s{std::vector<double>(11, 0.05)};
  AdaptiveOptions opt;
  opt.freeze_round_index = true;
  const AdaptiveRun run = run_adaptive(f.cfg, s, f.task, 1, opt);
  for (const PlanRow& r : run.plan) EXPECT_DOUBLE_EQ(r.tau, run.plan[0].tau);
}

TEST(Driver, DecreasingBudgetGivesNonIncreasingK) {
  const Fixture f = homogeneous(10);
  Schedule s;
  for (int t = 0; t <= 10; ++t) s.B.push_back(0.1 * std::pow(0.8, t));
  AdaptiveOptions opt;
  opt.freeze_round_index = true;
  const AdaptiveRun run = run_adaptive(f.cfg, s, f.task, 1, opt);
  for (std::size_t t = 1; t < run.plan.size(); ++t) {
    EXPECT_LE(run.plan[t].K, run.plan[t - 1].K);
  }
}

TEST(Driver, SameSeedSameRun) {
  const Fixture f = homogeneous(6);
  Schedule s{std::vector<double>(7, 0.05)};
  const AdaptiveRun a = run_adaptive(f.cfg, s, f.task, 3);
  const AdaptiveRun b = run_adaptive(f.cfg, s, f.task, 3);
  EXPECT_EQ(a.plan, b.plan);
  EXPECT_EQ(a.final_model, b.final_model);
}

TEST(Driver, RejectsHeterogeneousClientsAndBadSchedule) {
  Fixture f = homogeneous(4);
  Schedule bad{std::vector<double>(3, 1.0)};
  EXPECT_THROW(run_adaptive(f.cfg, bad, f.task, 0), ConfigError);
  Schedule ok{std::vector<double>(5, 1.0)};
  f.cfg.datasizes[0] = 31.0;
  EXPECT_THROW(run_adaptive(f.cfg, ok, f.task, 0), ConfigError);
}

}  // namespace
}  // namespace pacs::adaptive
