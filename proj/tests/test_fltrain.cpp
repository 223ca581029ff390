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

#include "pacs/bounds.hpp"
#include "pacs/fltrain.hpp"
#include "pacs/game.hpp"

namespace pacs::fl {
namespace {

GameConfig small_config(bool homogeneous, int N = 6, int T = 8) {
  GameConfig cfg;
  cfg.N = N;
  cfg.T = T;
  cfg.K = 3;
  cfg.d = 5;
  cfg.rho_L = 0.05;
  cfg.rho_H = 4.0;
  cfg.datasize_min = 20.0;
  cfg.datasize_max = homogeneous ? 20.0 : 60.0;
  if (homogeneous) {
    cfg.varphi.assign(N, 0.3);
    cfg.initial_budgets.assign(N, 1.0);
  }
  return populate_clients(cfg, 21);
}

double max_rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

TEST(Task, QuadraticGradientVanishesAtClientOptimum) {
  TaskSpec spec;
  spec.label_noise = 0.0;
  const GameConfig cfg = small_config(false);
  const SyntheticTask task = make_task(spec, cfg, 1);
  for (std::size_t i = 0; i < task.size(); ++i) {
    EXPECT_LT(task.local_gradient(i, task.clients[i].center).norm(), 1e-12);
  }
}

TEST(Task, GradientsMatchFiniteDifferences) {
  const GameConfig cfg = small_config(false);
  for (TaskKind kind : {TaskKind::kQuadratic, TaskKind::kLogistic}) {
    TaskSpec spec;
    spec.kind = kind;
    const SyntheticTask task = make_task(spec, cfg, 2);
    RandomStream rng(3);
    for (int p = 0; p < 20; ++p) {
      Eigen::VectorXd w(cfg.d);
      for (int k = 0; k < cfg.d; ++k) w(k) = rng.normal();
      const std::size_t i = rng.below(task.size());
      const Eigen::VectorXd g = task.local_gradient(i, w);
      Eigen::VectorXd fd(cfg.d);
      const double h = 1e-6;
      for (int k = 0; k < cfg.d; ++k) {
        Eigen::VectorXd a = w, b = w;
        a(k) += h;
        b(k) -= h;
        fd(k) = (task.local_loss(i, a) - task.local_loss(i, b)) / (2 * h);
      }
      EXPECT_LT((g - fd).norm() / std::max(g.norm(), 1e-12), 1e-5) << to_string(kind);
    }
  }
}

TEST(Task, GlobalOptimumIsStationary) {
  const GameConfig cfg = small_config(false);
  for (TaskKind kind : {TaskKind::kQuadratic, TaskKind::kLogistic}) {
    TaskSpec spec;
    spec.kind = kind;
    const SyntheticTask task = make_task(spec, cfg, 4);
    EXPECT_LT(task.gradient(task.w_star).norm(), 1e-10);
    EXPECT_GT(task.mu, 0.0);
    EXPECT_GE(task.beta, task.mu);
  }
}

TEST(Task, IdenticalDataGivesIdenticalGradients) {
  SyntheticTask task = make_task(TaskSpec{}, small_config(false), 5);
  task.clients[1] = task.clients[0];
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(task.dimension, 0.3);
  EXPECT_EQ(task.local_gradient(0, w), task.local_gradient(1, w));
}

TEST(LocalSgd, FullBatchSingleEpochIsExactGradient) {
  const SyntheticTask task = make_task(TaskSpec{}, small_config(false), 5);
  RandomStream rng(1);
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(task.dimension, -0.2);
  EXPECT_EQ(local_sgd(task, 2, w, 0.1, 1, 0, rng), task.local_gradient(2, w));
  EXPECT_THROW(local_sgd(task, 2, w, 0.0, 1, 0, rng), DomainError);
}

TEST(Aggregate, UniformFullParticipationIsPlainAverage) {
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(2, 1.0);
  std::vector<Eigen::VectorXd> g{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 2),
                                 Eigen::Vector2d(3, 3), Eigen::Vector2d(-1, 1)};
  const auto out = aggregate(w, {2, 0, 3, 1}, {g[2], g[0], g[3], g[1]},
                             std::vector<double>(4, 0.25), sampling::uniform(4), 0.5);
  EXPECT_NEAR(out(0), 1.0 - 0.5 * 0.75, 1e-15);
  EXPECT_NEAR(out(1), 1.0 - 0.5 * 1.5, 1e-15);
  const auto same = aggregate(w, {0, 1}, {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()},
                              std::vector<double>(4, 0.25), sampling::uniform(4), 0.5);
  EXPECT_EQ(same, w);
}

TEST(Aggregate, WithReplacementStepIsUnbiased) {
  const std::vector<double> theta{0.1, 0.2, 0.3, 0.4};
  const auto dist = sampling::distribution({0.5, 2.0, 1.0, 3.0});
  std::vector<Eigen::VectorXd> g;
  RandomStream grng(1);
  for (int i = 0; i < 4; ++i) g.push_back(Eigen::Vector2d(grng.normal(), grng.normal()));
  Eigen::VectorXd full = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < 4; ++i) full -= theta[i] * g[i];
  const int reps = 10000;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(2), m2 = Eigen::VectorXd::Zero(2);
  RandomStream root(2);
  for (int r = 0; r < reps; ++r) {
    RandomStream rng = root.split(r);
    const auto s = sampling::sample_clients(dist, 2, SamplingMode::kWithReplacement, rng);
    std::vector<Eigen::VectorXd> u;
    for (std::size_t i : s.members) u.push_back(g[i]);
    const Eigen::VectorXd step = aggregate(Eigen::VectorXd::Zero(2), s.members, u, theta, dist, 1.0);
    m += step;
    m2 += step.cwiseProduct(step);
  }
  m /= reps;
  for (int k = 0; k < 2; ++k) {
    const double sd = std::sqrt(m2(k) / reps - m(k) * m(k));
    EXPECT_NEAR(m(k), full(k), 3.0 * sd / std::sqrt(reps));
  }
}

TEST(AccuracyLoss, KnownValuesAndHomogeneity) {
  EXPECT_DOUBLE_EQ(accuracy_loss_metric({1.0}, {1.0}, {1.0}, 1.0), 1.0);
  const std::vector<double> b{0.3, 1.2}, th{0.4, 0.6}, D{10.0, 30.0};
  EXPECT_NEAR(accuracy_loss_metric({0.6, 2.4}, th, D, 3.0),
              0.5 * accuracy_loss_metric(b, th, D, 3.0), 1e-18);
  EXPECT_THROW(accuracy_loss_metric(b, th, D, 0.0), DomainError);
}

TEST(Run, ZeroNoiseFullParticipationIsGradientDescent) {
  GameConfig cfg = small_config(true);
  cfg.K = cfg.N;
  const GameSolution sol = game::mean_field_fixed_point(cfg);
  const SyntheticTask task = make_task(TaskSpec{}, cfg, 6);
  RunOptions opt;
  opt.add_noise = false;
  opt.clip_parameters = false;
  opt.eta = 0.1;
  const FLRunRecord rec = run_fedpcs(sol, task, 7, opt);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(task.dimension);
  for (int t = 0; t <= cfg.T; ++t) {
    EXPECT_LT(max_rel_diff(to_eigen(rec.models[static_cast<std::size_t>(t)]), w), 1e-10);
    w -= opt.eta * task.gradient(w);
  }
}

TEST(Run, SameSeedSameRecord) {
  const GameConfig cfg = small_config(false);
  const GameSolution sol = game::mean_field_fixed_point(cfg);
  const SyntheticTask task = make_task(TaskSpec{}, cfg, 8);
  for (auto mode : {SamplingMode::kWithReplacement, SamplingMode::kWithoutReplacement}) {
    RunOptions opt;
    opt.mode = mode;
    opt.batch = 5;
    EXPECT_EQ(run_fedpcs(sol, task, 9, opt), run_fedpcs(sol, task, 9, opt));
    EXPECT_NE(run_fedpcs(sol, task, 9, opt).final_model,
              run_fedpcs(sol, task, 10, opt).final_model);
  }
}

TEST(Run, SolvedBudgetNoiseBeatsFloorBudgetNoise) {
  // Same seed and uniform sampling, so the subsets and the unit noise draws
  // are shared; only the noise scale differs.
  GameConfig cfg = small_config(false, 12, 10);
  cfg.rho_L = 0.01;
  const GameSolution sol = game::mean_field_fixed_point(cfg);
  const SyntheticTask task = make_task(TaskSpec{}, cfg, 11);
  RunOptions solved;
  solved.strategy = Strategy::kRandom;
  solved.baseline_budgets = BaselineBudgets::kSolved;
  RunOptions floor = solved;
  floor.baseline_budgets = BaselineBudgets::kWorstCase;
  std::vector<double> a(cfg.T + 1, 0.0), b(cfg.T + 1, 0.0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto ra = run_fedpcs(sol, task, seed, solved);
    const auto rb = run_fedpcs(sol, task, seed, floor);
    ASSERT_EQ(ra.subsets, rb.subsets);
    for (int t = 0; t <= cfg.T; ++t) {
      a[t] += ra.loss[t];
      b[t] += rb.loss[t];
    }
    for (int t = 0; t <= cfg.T; ++t) EXPECT_LT(ra.accuracy_loss[t], rb.accuracy_loss[t]);
  }
  for (int t = 1; t <= cfg.T; ++t) EXPECT_LE(a[t], b[t]) << "round " << t;
}

TEST(Run, UnsupportedBaselineThrows) {
  const GameConfig cfg = small_config(true);
  const GameSolution sol = game::mean_field_fixed_point(cfg);
  const SyntheticTask task = make_task(TaskSpec{}, cfg, 1);
  RunOptions opt;
  opt.strategy = Strategy::kFedCbs;
  EXPECT_THROW(run_fedpcs(sol, task, 0, opt), baselines::NotImplemented);
}

BoundConstants toy_constants() {
  BoundConstants c;
  c.beta = 2.0;
  c.psi = c.mu = 0.5;
  c.kappa = 0.8;
  c.kappa_G = 1.5;
  c.M = 0.1;
  c.D = 1.2;
  c.V = 0.9;
  c.g_norm = 0.9;
  c.d = 5;
  c.W = 1.0;
  c.eta = 0.01;
  c.rho_L = 0.5;
  c.rho_H = 1.0;
  c.N = 4;
  c.K = 2;
  return c;
}

TEST(Bounds, AccuracyBoundNoiselessTermAndDecay) {
  BoundConstants c = toy_constants();
  const std::vector<double> b{1.0, 2.0}, th{0.5, 0.5}, D{10.0, 20.0};
  double prev = accuracy_loss_upper_bound(c, b, th, D, 1.0);
  for (double t = 2.0; t < 20.0; t += 1.0) {
    const double v = accuracy_loss_upper_bound(c, b, th, D, t);
    EXPECT_LT(v, prev);
    prev = v;
  }
  c.W = 0.0;
  EXPECT_DOUBLE_EQ(accuracy_loss_upper_bound(c, b, th, D, 3.0),
                   c.beta * c.V * c.V / (2.0 * c.mu * c.mu * 3.0));
}

TEST(Bounds, GapBoundsAtZeroRoundsAndMonotonicity) {
  const BoundConstants c = toy_constants();
  const GapBounds g0 = optimality_gap_bounds(c, 0, 2.5, 100.0);
  EXPECT_DOUBLE_EQ(g0.convex, 2.5);
  EXPECT_DOUBLE_EQ(g0.nonconvex, 2.5);
  EXPECT_NEAR(g0.decay, 1.0 - 0.5 * 0.01 * (3.0 * 1.0 + 0.5) / (2.0 * 0.5), 1e-15);
  EXPECT_TRUE(g0.convex_valid);
  double prev = g0.nonconvex;
  for (int T = 1; T < 50; ++T) {
    const double v = optimality_gap_bounds(c, T, 2.5, 100.0).nonconvex;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Bounds, OneRoundBoundIncreasesWithNoise) {
  const BoundConstants c = toy_constants();
  const std::vector<double> th{0.25, 0.25, 0.25, 0.25}, x{0.1, 0.2, 0.3, 0.4};
  double prev = one_round_progress_bound(c, th, x, {0, 0, 0, 0}, 1.0);
  for (double s = 0.1; s < 2.0; s += 0.1) {
    const double v = one_round_progress_bound(c, th, x, {s, s, s, s}, 1.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Bounds, OneRoundBoundZeroNoiseForm) {
  const BoundConstants c = toy_constants();
  const std::vector<double> th{0.1, 0.2, 0.3, 0.4}, x{0.25, 0.25, 0.25, 0.25};
  double sample = 0.0;
  for (int i = 0; i < 4; ++i) sample += th[i] * th[i] * c.D * c.D / x[i];
  const double expect = -c.eta * c.kappa / 2.0 * 1.7 + c.beta * c.eta / (2.0 * c.K) * sample +
                        c.M * c.beta * c.eta * c.eta * c.N / 2.0;
  EXPECT_NEAR(one_round_progress_bound(c, th, x, {0, 0, 0, 0}, 1.7), expect, 1e-15);
}

TEST(Bounds, ContractionInsideUnitIntervalUnderStepCondition) {
  BoundConstants c = toy_constants();
  ASSERT_TRUE(c.eta_ok());
  RealMatrix x(4, 3, 0.25), s(4, 3, 0.0);
  const auto r = convergence_rate_and_error_bounds(c, {0.25, 0.25, 0.25, 0.25}, x, s, 3, 1.0);
  EXPECT_TRUE(r.valid);
  EXPECT_GT(r.contraction, 0.0);
  EXPECT_LT(r.contraction, 1.0);
  c.eta = 10.0 * c.eta_max();
  EXPECT_FALSE(
      convergence_rate_and_error_bounds(c, {0.25, 0.25, 0.25, 0.25}, x, s, 3, 1.0).valid);
}

}  // namespace
}  // namespace pacs::fl
