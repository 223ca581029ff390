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

// Smallest end-to-end use of the library: solve a game, then train on a
// synthetic quadratic task with the solved budgets and with random sampling.

#include <cstdio>

#include "pacs/fltrain.hpp"
#include "pacs/game.hpp"
#include "pacs/welfare.hpp"

int main() {
  pacs::GameConfig cfg;
  cfg.N = 20;
  cfg.T = 10;
  cfg.K = 5;
  cfg.rho_L = 0.01;
  cfg.rho_H = 5.0;
  cfg.datasize_min = 50;
  cfg.datasize_max = 200;
  cfg = pacs::populate_clients(cfg, 7);

  const pacs::GameSolution sol = pacs::game::mean_field_fixed_point(cfg);
  std::printf("game: converged=%d iterations=%d residual=%.3g\n", sol.converged,
              sol.total_iterations, sol.final_residual);
  for (int t = 0; t <= cfg.T; ++t) {
    std::printf("  t=%2d phi=%.4f R=%.4g\n", t, sol.phi[t], sol.rewards[t]);
  }

  const pacs::fl::SyntheticTask task = pacs::fl::make_task(pacs::fl::TaskSpec{}, cfg, 7);
  pacs::fl::RunOptions opt;
  const auto fedpcs = pacs::fl::run_fedpcs(sol, task, 1, opt);
  opt.strategy = pacs::Strategy::kRandom;
  const auto random = pacs::fl::run_fedpcs(sol, task, 1, opt);
  std::printf("final loss: fedpcs=%.6f random=%.6f (optimum %.6f)\n", fedpcs.loss.back(),
              random.loss.back(), task.f_star);
  std::printf("final accuracy loss: fedpcs=%.3g random=%.3g\n", fedpcs.accuracy_loss.back(),
              random.accuracy_loss.back());
  return 0;
}
