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
#include <cstdint>
#include <string>
#include <vector>

#include "pacs/baselines.hpp"
#include "pacs/common.hpp"
#include "pacs/game.hpp"
#include "pacs/rng.hpp"
#include "pacs/sampling.hpp"
#include "pacs/zcdp.hpp"

namespace pacs::fl {

enum class TaskKind { kQuadratic, kLogistic };

inline const char* to_string(TaskKind k) {
  return k == TaskKind::kQuadratic ? "quadratic" : "logistic";
}

inline TaskKind parse_task_kind(const std::string& s) {
  if (s == "quadratic") return TaskKind::kQuadratic;
  if (s == "logistic") return TaskKind::kLogistic;
  throw ConfigError("task.kind: unknown task '" + s + "'");
}

struct TaskSpec {
  TaskKind kind = TaskKind::kQuadratic;
  double regularization = 0.1;
  double heterogeneity = 0.2;  // norm of the per-client optimum shift
  double optimum_norm = 0.5;   // norm of the shared optimum component
  double label_noise = 0.1;
  // 0 keeps the game's datasizes; otherwise every client gets this many rows.
  int samples_per_client = 0;
};

struct ClientData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd center;  // ridge centre: the client optimum (quadratic), zero (logistic)
};

// Synthetic convex task. The global loss is F(w) = sum_i theta_i F_i(w).
class SyntheticTask {
 public:
  TaskKind kind = TaskKind::kQuadratic;
  int dimension = 0;
  double reg = 0.0;
  std::vector<ClientData> clients;
  std::vector<double> theta;
  Eigen::VectorXd w_star;
  double f_star = 0.0;
  double beta = 0.0;  // max over local and global smoothness
  double psi = 0.0;   // strong convexity of F
  double mu = 0.0;    // PL constant

  std::size_t size() const { return clients.size(); }

  double local_loss(std::size_t i, const Eigen::VectorXd& w) const {
    const ClientData& c = clients[i];
    const double n = static_cast<double>(c.X.rows());
    double data = 0.0;
    if (kind == TaskKind::kQuadratic) {
      data = 0.5 * (c.X * w - c.y).squaredNorm() / n;
    } else {
      const Eigen::ArrayXd m = c.y.array() * (c.X * w).array();
      data = softplus(-m).sum() / n;
    }
    return data + 0.5 * reg * (w - c.center).squaredNorm();
  }

  Eigen::VectorXd local_gradient(std::size_t i, const Eigen::VectorXd& w) const {
    const ClientData& c = clients[i];
    const double n = static_cast<double>(c.X.rows());
    Eigen::VectorXd g;
    if (kind == TaskKind::kQuadratic) {
      g = c.X.transpose() * (c.X * w - c.y) / n;
    } else {
      const Eigen::ArrayXd m = c.y.array() * (c.X * w).array();
      const Eigen::VectorXd coef = (-c.y.array() * sigmoid(-m)).matrix();
      g = c.X.transpose() * coef / n;
    }
    return g + reg * (w - c.center);
  }

  Eigen::VectorXd local_gradient_rows(std::size_t i, const Eigen::VectorXd& w,
                                      const std::vector<Eigen::Index>& rows) const {
    const ClientData& c = clients[i];
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension);
    for (Eigen::Index r : rows) {
      const double z = c.X.row(r).dot(w);
      if (kind == TaskKind::kQuadratic) {
        g += (z - c.y(r)) * c.X.row(r).transpose();
      } else {
        const double m = c.y(r) * z;
        g += (-c.y(r) / (1.0 + std::exp(m))) * c.X.row(r).transpose();
      }
    }
    return g / static_cast<double>(rows.size()) + reg * (w - c.center);
  }

  double loss(const Eigen::VectorXd& w) const {
    double f = 0.0;
    for (std::size_t i = 0; i < size(); ++i) f += theta[i] * local_loss(i, w);
    return f;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension);
    for (std::size_t i = 0; i < size(); ++i) g += theta[i] * local_gradient(i, w);
    return g;
  }

 private:
  static Eigen::ArrayXd softplus(const Eigen::ArrayXd& z) {
    return z.max(0.0) + (-z.abs()).exp().log1p();
  }
  static Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) {
    return 1.0 / (1.0 + (-z).exp());
  }
};

namespace detail {

inline Eigen::VectorXd gaussian_vector(int d, RandomStream& rng) {
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v(k) = rng.normal();
  return v;
}

inline Eigen::VectorXd scaled_direction(int d, double norm, RandomStream& rng) {
  Eigen::VectorXd v = gaussian_vector(d, rng);
  const double n = v.norm();
  return n > 0.0 ? Eigen::VectorXd(v * (norm / n)) : v;
}

// Symmetric eigenvalue range.
inline std::pair<double, double> eig_range(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace detail

// Builds per-client data sized by the game config. Quadratic: least squares
// with client optimum c_i = w_c + shift_i and a ridge term centred at c_i, so
// zero shift and zero label noise give every client the same minimizer. Logistic: two Gaussian classes whose
// means are shifted per client.
inline SyntheticTask make_task(const TaskSpec& spec, const GameConfig& cfg,
                               std::uint64_t seed) {
  if (!cfg.complete()) throw ConfigError("make_task: client attributes not populated");
  if (!(spec.regularization > 0.0)) throw ConfigError("task.regularization: must be > 0");
  SyntheticTask task;
  task.kind = spec.kind;
  task.dimension = cfg.d;
  task.reg = spec.regularization;
  task.theta = cfg.theta;
  const int d = cfg.d;
  const auto n = static_cast<std::size_t>(cfg.N);
  RandomStream root = RandomStream(seed).split(0x7a5c);
  RandomStream shared = root.split(0);
  const Eigen::VectorXd center = detail::scaled_direction(d, spec.optimum_norm, shared);

  task.clients.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream s = root.split({1, i});
    const int rows = spec.samples_per_client > 0
                         ? spec.samples_per_client
                         : static_cast<int>(std::lround(cfg.datasizes[i]));
    if (rows < 1) throw DomainError("make_task: empty client dataset");
    const Eigen::VectorXd shift = detail::scaled_direction(d, spec.heterogeneity, s);
    ClientData& c = task.clients[i];
    c.X.resize(rows, d);
    c.y.resize(rows);
    c.center = Eigen::VectorXd::Zero(d);
    if (spec.kind == TaskKind::kQuadratic) {
      const Eigen::VectorXd wi = center + shift;
      c.center = wi;
      for (int r = 0; r < rows; ++r) {
        for (int k = 0; k < d; ++k) c.X(r, k) = s.normal();
        c.y(r) = c.X.row(r).dot(wi) + spec.label_noise * s.normal();
      }
    } else {
      const Eigen::VectorXd mean = center + shift;
      for (int r = 0; r < rows; ++r) {
        const double label = s.uniform() < 0.5 ? -1.0 : 1.0;
        for (int k = 0; k < d; ++k) c.X(r, k) = label * mean(k) + s.normal();
        c.y(r) = label;
      }
    }
  }

  // Curvature constants.
  Eigen::MatrixXd global = Eigen::MatrixXd::Zero(d, d);
  double local_max = 0.0;
  const double scale = spec.kind == TaskKind::kQuadratic ? 1.0 : 0.25;
  for (std::size_t i = 0; i < n; ++i) {
    const ClientData& c = task.clients[i];
    const Eigen::MatrixXd A = scale * (c.X.transpose() * c.X) / static_cast<double>(c.X.rows());
    local_max = std::max(local_max, detail::eig_range(A).second + task.reg);
    global += task.theta[i] * A;
  }
  global.diagonal().array() += task.reg;
  const auto [lo, hi] = detail::eig_range(global);
  task.beta = std::max(hi, local_max);

  if (spec.kind == TaskKind::kQuadratic) {
    task.psi = lo;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < n; ++i) {
      const ClientData& c = task.clients[i];
      rhs += task.theta[i] * ((c.X.transpose() * c.y) / static_cast<double>(c.X.rows()) +
                              task.reg * c.center);
    }
    task.w_star = global.ldlt().solve(rhs);
  } else {
    // The logistic Hessian is only bounded below by the ridge term.
    task.psi = task.reg;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    const double step = 1.0 / task.beta;
    for (int it = 0; it < 200000; ++it) {
      const Eigen::VectorXd g = task.gradient(w);
      if (g.norm() < 1e-13) break;
      w -= step * g;
    }
    task.w_star = w;
  }
  task.mu = task.psi;
  task.f_star = task.loss(task.w_star);
  return task;
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Local training. With one epoch and batch equal to the dataset this is the
// exact local gradient at the global model. Otherwise the client runs
// mini-batch SGD and returns (w - w_local) / (eta * steps).
inline Eigen::VectorXd local_sgd(const SyntheticTask& task, std::size_t client,
                                 const Eigen::VectorXd& model, double eta, int epochs,
                                 int batch, RandomStream& rng) {
  if (!(eta > 0.0)) throw DomainError("local_sgd: eta must be > 0");
  const auto rows = static_cast<int>(task.clients.at(client).X.rows());
  if (rows == 0) throw DomainError("local_sgd: empty dataset");
  if (batch <= 0 || batch > rows) batch = rows;
  if (epochs <= 1 && batch == rows) return task.local_gradient(client, model);

  Eigen::VectorXd w = model;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
  int steps = 0;
  for (int e = 0; e < std::max(epochs, 1); ++e) {
    for (int r = 0; r < rows; ++r) order[static_cast<std::size_t>(r)] = r;
    for (int r = rows - 1; r > 0; --r) {
      const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(r) + 1));
      std::swap(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(j)]);
    }
    for (int start = 0; start + batch <= rows; start += batch) {
      std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + start + batch);
      w -= eta * task.local_gradient_rows(client, w, idx);
      ++steps;
    }
  }
  return (model - w) / (eta * steps);
}

// w <- w - eta * sum theta_i / (K x_i) * g_i, in ascending client order.
// Repeated draws (with replacement) contribute once per draw.
inline Eigen::VectorXd aggregate(const Eigen::VectorXd& model,
                                 const std::vector<std::size_t>& members,
                                 const std::vector<Eigen::VectorXd>& updates,
                                 const std::vector<double>& theta,
                                 const SamplingDistribution& dist, double eta) {
  require_same_length(members.size(), updates.size(), "aggregate");
  const double k = static_cast<double>(members.size());
  std::vector<std::size_t> order(members.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return members[a] < members[b]; });
  Eigen::VectorXd step = Eigen::VectorXd::Zero(model.size());
  for (std::size_t j : order) {
    const std::size_t i = members[j];
    const double x = dist.probs.at(i);
    if (!(x > 0.0)) throw DomainError("aggregate: sampled client with zero probability");
    step += (theta[i] / (k * x)) * updates[j];
  }
  return model - eta * step;
}

// A = sum_i theta_i^2 / (t |D_i|^2 rho_i), t being the shifted round index.
inline double accuracy_loss_metric(const std::vector<double>& budgets,
                                   const std::vector<double>& theta,
                                   const std::vector<double>& datasizes, double t_eff) {
  require_same_length(budgets.size(), theta.size(), "accuracy_loss_metric");
  require_same_length(budgets.size(), datasizes.size(), "accuracy_loss_metric");
  if (!(t_eff > 0.0)) throw DomainError("accuracy_loss_metric: t must be >= 1");
  double a = 0.0;
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    a += theta[i] * theta[i] / (t_eff * datasizes[i] * datasizes[i] * budgets[i]);
  }
  return a;
}

// Budgets held by clients under a strategy whose sampling ignores budgets.
enum class BaselineBudgets { kWorstCase, kSolved };

// kInverseTime uses eta / (t + 1) at round t.
enum class StepSchedule { kConstant, kInverseTime };

struct RunOptions {
  Strategy strategy = Strategy::kPrivacyAware;
  SamplingMode mode = SamplingMode::kWithoutReplacement;
  BaselineBudgets baseline_budgets = BaselineBudgets::kWorstCase;
  double eta = 0.05;
  StepSchedule schedule = StepSchedule::kConstant;
  int epochs = 1;
  int batch = 0;  // 0 = full batch
  bool add_noise = true;
  bool clip_parameters = true;
  int K = 0;      // 0 = cfg.subset_size()
};

struct FLRunRecord {
  std::string strategy;
  std::uint64_t seed = 0;
  int K = 0;
  // Telemetry at w(0..T).
  std::vector<double> loss;
  std::vector<double> grad_norm_sq;
  std::vector<double> dist_sq;
  std::vector<double> accuracy_loss;  // A with shifted index t+1
  std::vector<double> rewards;
  RealMatrix budgets;                  // N x (T+1), budgets actually held
  RealMatrix probs;                    // N x (T+1), sampling distribution
  RealMatrix sigma2;                   // N x (T+1), per-coordinate noise variance
  std::vector<std::vector<std::size_t>> subsets;  // rounds 0..T-1, empty at T
  std::vector<double> noise_norm;      // summed noise norm per round
  std::vector<bool> gradnorm_fallback;
  std::vector<std::vector<double>> models;  // w(0..T)
  std::vector<double> final_model;

  bool operator==(const FLRunRecord&) const = default;
};

inline std::vector<double> strategy_budgets(const GameSolution& sol, std::size_t t,
                                            const RunOptions& opt) {
  std::vector<double> b = sol.budgets.col_vector(t);
  const bool ignores_budget = opt.strategy != Strategy::kPrivacyAware;
  if (ignores_budget && opt.baseline_budgets == BaselineBudgets::kWorstCase) {
    std::fill(b.begin(), b.end(), sol.cfg.rho_L);
  }
  return b;
}

// Privacy-aware client sampling training loop over T rounds.
inline FLRunRecord run_fedpcs(const GameSolution& sol, const SyntheticTask& task,
                              std::uint64_t seed, const RunOptions& opt = {}) {
  if (opt.strategy == Strategy::kFedCbs || opt.strategy == Strategy::kDelta) {
    baselines::not_implemented(opt.strategy);
  }
  const GameConfig& cfg = sol.cfg;
  const auto n = static_cast<std::size_t>(cfg.N);
  const auto T = static_cast<std::size_t>(cfg.T);
  if (task.size() != n) throw ShapeError("run_fedpcs: task has a different client count");
  if (task.dimension != cfg.d) throw ShapeError("run_fedpcs: task dimension differs from d");
  const int K = opt.K > 0 ? opt.K : cfg.subset_size();
  if (!(opt.eta > 0.0)) throw ConfigError("eta: must be > 0");

  FLRunRecord rec;
  rec.strategy = to_string(opt.strategy);
  rec.seed = seed;
  rec.K = K;
  rec.rewards = sol.rewards;
  rec.budgets = RealMatrix(n, T + 1);
  rec.probs = RealMatrix(n, T + 1);
  rec.sigma2 = RealMatrix(n, T + 1);
  rec.subsets.resize(T + 1);
  rec.noise_norm.assign(T + 1, 0.0);
  rec.gradnorm_fallback.assign(T + 1, false);

  const RandomStream root = RandomStream(seed).split(0xf1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(task.dimension);

  auto record_state = [&](const Eigen::VectorXd& model) {
    const Eigen::VectorXd g = task.gradient(model);
    rec.loss.push_back(task.loss(model));
    rec.grad_norm_sq.push_back(g.squaredNorm());
    rec.dist_sq.push_back((model - task.w_star).squaredNorm());
    rec.models.push_back(to_std(model));
  };

  for (std::size_t t = 0; t <= T; ++t) {
    const std::vector<double> budgets = strategy_budgets(sol, t, opt);
    for (std::size_t i = 0; i < n; ++i) {
      rec.budgets(i, t) = budgets[i];
      rec.sigma2(i, t) = opt.add_noise
                             ? zcdp::noise_variance(budgets[i], cfg.datasizes[i], cfg.W)
                             : 0.0;
    }
    rec.accuracy_loss.push_back(
        accuracy_loss_metric(budgets, cfg.theta, cfg.datasizes, static_cast<double>(t + 1)));
    record_state(w);

    const Eigen::VectorXd model =
        opt.clip_parameters ? to_eigen(zcdp::clip_norm(to_std(w), cfg.W)) : w;

    SamplingDistribution dist;
    std::vector<Eigen::VectorXd> all_grads;
    switch (opt.strategy) {
      case Strategy::kPrivacyAware:
        dist = sampling::distribution(budgets, static_cast<int>(t));
        break;
      case Strategy::kRandom:
        dist = baselines::random_distribution(n, static_cast<int>(t));
        break;
      case Strategy::kGradientNorm: {
        std::vector<double> norms(n);
        all_grads.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          all_grads[i] = task.local_gradient(i, model);
          norms[i] = all_grads[i].norm();
        }
        bool fallback = false;
        dist = baselines::gradient_norm_distribution(norms, &fallback);
        dist.round = static_cast<int>(t);
        rec.gradnorm_fallback[t] = fallback;
        break;
      }
      default:
        baselines::not_implemented(opt.strategy);
    }
    for (std::size_t i = 0; i < n; ++i) rec.probs(i, t) = dist.probs[i];
    if (t == T) break;

    const double step = opt.schedule == StepSchedule::kConstant
                            ? opt.eta
                            : opt.eta / static_cast<double>(t + 1);
    RandomStream pick = root.split({t, 0});
    const SampledSubset subset =
        sampling::sample_clients(dist, static_cast<std::size_t>(K), opt.mode, pick);
    rec.subsets[t] = subset.members;

    std::vector<Eigen::VectorXd> updates;
    updates.reserve(subset.members.size());
    for (std::size_t j = 0; j < subset.members.size(); ++j) {
      const std::size_t i = subset.members[j];
      // Keyed by (round, client, draw) so repeated draws get fresh noise.
      RandomStream local = root.split({t, 1, i, j});
      Eigen::VectorXd g = opt.epochs <= 1 && opt.batch <= 0
                              ? task.local_gradient(i, model)
                              : local_sgd(task, i, model, step, opt.epochs, opt.batch, local);
      if (rec.sigma2(i, t) > 0.0) {
        RandomStream noise = root.split({t, 2, i, j});
        const zcdp::NoiseSpec spec{rec.sigma2(i, t), static_cast<std::size_t>(task.dimension),
                                   cfg.W};
        const Eigen::VectorXd noisy = to_eigen(zcdp::perturb_gradient(to_std(g), spec, noise));
        rec.noise_norm[t] += (noisy - g).norm();
        g = noisy;
      }
      updates.push_back(std::move(g));
    }
    w = aggregate(w, subset.members, updates, cfg.theta, dist, step);
  }
  rec.final_model = to_std(w);
  return rec;
}

}  // namespace pacs::fl
