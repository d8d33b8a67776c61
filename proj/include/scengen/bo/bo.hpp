// Copyright 2026 The scengen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SCENGEN_BO_BO_HPP
#define SCENGEN_BO_BO_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scengen/bo/space.hpp"
#include "scengen/error.hpp"
#include "scengen/gp/hyperopt.hpp"
#include "scengen/gp/model.hpp"
#include "scengen/random.hpp"

namespace scengen::bo {

struct BoConfig {
  enum class InitMode { Raster, Random };

  InitMode init_mode = InitMode::Raster;
  int init_count = 2;
  int batch_size = 1;      // N in the batch Thompson-sampling scheme
  int max_iterations = 1;
  int candidate_pool = 1000;  // M candidates per Thompson draw
  double convergence_tol = 1e-3;
  int convergence_window = 2;
  std::uint64_t seed = 0;

  void validate() const {
    if (init_count < 2) throw ValidationError("bo: init_count must be >= 2");
    if (batch_size < 1) throw ValidationError("bo: batch_size must be >= 1");
    if (max_iterations < 1) {
      throw ValidationError("bo: max_iterations must be >= 1");
    }
    if (candidate_pool < 1) {
      throw ValidationError("bo: candidate_pool must be >= 1");
    }
    if (!(convergence_tol > 0.0)) {
      throw ValidationError("bo: convergence_tol must be > 0");
    }
    if (convergence_window < 1) {
      throw ValidationError("bo: convergence_window must be >= 1");
    }
  }
};

struct HistoryEntry {
  Eigen::VectorXd point;  // original (denormalized) units
  double cost = 0.0;
  int iteration = 0;  // 0 = initial design
};

struct BoRun {
  std::vector<HistoryEntry> history;
  gp::GpModel final_model;  // fitted on normalized inputs
  bool converged = false;
  int iterations_run = 0;
  Eigen::VectorXd best_point;
  double best_cost = std::numeric_limits<double>::infinity();
};

/// Batch evaluator contract: given a batch of points, return one cost per
/// point, in order. Evaluations may run concurrently internally.
using BatchEvaluator =
    std::function<std::vector<double>(const std::vector<Eigen::VectorXd>&)>;

/// Thrown when the evaluator fails mid-run; carries the history collected
/// so far.
class BoAborted : public NumericError {
public:
  BoAborted(const std::string& what, std::vector<HistoryEntry> partial)
      : NumericError(what), partial_history(std::move(partial)) {}

  std::vector<HistoryEntry> partial_history;
};

/// Full Cartesian raster over the box: per-axis resolution k is the largest
/// integer with k^d <= count, evenly spaced including both bounds.
inline std::vector<Eigen::VectorXd> raster_grid(const ParameterSpace& space,
                                                int count) {
  const int d = static_cast<int>(space.size());
  int k = 2;
  auto fits = [d, count](int side) {
    long long total = 1;
    for (int i = 0; i < d; ++i) {
      total *= side;
      if (total > count) return false;
    }
    return true;
  };
  if (!fits(2)) {
    throw ValidationError("bo: raster init needs at least 2^d points (" +
                          std::to_string(count) + " given for d = " +
                          std::to_string(d) + ")");
  }
  while (fits(k + 1)) ++k;

  std::vector<Eigen::VectorXd> points;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) {
      const Param& p = space[i];
      x[i] = p.lower + (p.upper - p.lower) *
                           (static_cast<double>(idx[static_cast<std::size_t>(i)]) /
                            static_cast<double>(k - 1));
    }
    points.push_back(std::move(x));
    int axis = d - 1;
    while (axis >= 0 && ++idx[static_cast<std::size_t>(axis)] == k) {
      idx[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return points;
}

inline std::vector<Eigen::VectorXd> random_design(const ParameterSpace& space,
                                                  int count, Rng& rng) {
  if (count < 1) throw ValidationError("bo: design count must be >= 1");
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) points.push_back(space.sample_uniform(rng));
  return points;
}

/// Batch Thompson sampling: per batch slot, draw a fresh uniform candidate
/// pool, sample the posterior jointly at it, and keep the argmin candidate.
/// A duplicate of an earlier slot is re-drawn once, then accepted.
inline std::vector<Eigen::VectorXd> thompson_select(const gp::GpModel& model,
                                                    const ParameterSpace& space,
                                                    int batch, int pool,
                                                    Rng& rng) {
  if (batch < 1) throw ValidationError("bo: batch must be >= 1");
  if (pool < 1) throw ValidationError("bo: pool must be >= 1");
  std::vector<Eigen::VectorXd> selected;
  selected.reserve(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      Eigen::MatrixXd cand(pool, space.size());
      for (int i = 0; i < pool; ++i) {
        cand.row(i) = space.sample_uniform(rng).transpose();
      }
      Eigen::VectorXd f = model.sample_at(space.normalize_rows(cand), rng);
      Eigen::Index arg = 0;
      f.minCoeff(&arg);
      Eigen::VectorXd pick = cand.row(arg).transpose();
      bool dup = false;
      for (const auto& s : selected) {
        if ((space.normalize(s) - space.normalize(pick))
                .cwiseAbs()
                .maxCoeff() < 1e-12) {
          dup = true;
          break;
        }
      }
      if (!dup || attempt == 1) {
        selected.push_back(std::move(pick));
        break;
      }
    }
  }
  return selected;
}

/// The adaptive sampling loop: evaluate an initial design, then iterate
/// hyperparameter refit, posterior fit, batch Thompson selection, and batch
/// evaluation until the best observed cost stagnates or the iteration
/// budget is exhausted.
inline BoRun run_bo(const BatchEvaluator& evaluate,
                    const ParameterSpace& space, const BoConfig& config) {
  config.validate();
  Rng rng(config.seed);

  std::vector<HistoryEntry> history;
  auto evaluate_into = [&](const std::vector<Eigen::VectorXd>& pts,
                           int iteration) {
    std::vector<double> costs;
    try {
      costs = evaluate(pts);
    } catch (const std::exception& e) {
      throw BoAborted(std::string("bo: evaluator failed: ") + e.what(),
                      std::move(history));
    }
    if (costs.size() != pts.size()) {
      throw BoAborted("bo: evaluator returned " +
                          std::to_string(costs.size()) + " costs for " +
                          std::to_string(pts.size()) + " points",
                      std::move(history));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!std::isfinite(costs[i]) || costs[i] < 0.0) {
        throw BoAborted("bo: evaluator returned an invalid cost",
                        std::move(history));
      }
      history.push_back(HistoryEntry{pts[i], costs[i], iteration});
    }
  };

  std::vector<Eigen::VectorXd> init =
      config.init_mode == BoConfig::InitMode::Raster
          ? raster_grid(space, config.init_count)
          : random_design(space, config.init_count, rng);
  evaluate_into(init, 0);

  auto fit_current = [&]() {
    Eigen::MatrixXd X(history.size(), space.size());
    Eigen::VectorXd y(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
      X.row(static_cast<Eigen::Index>(i)) =
          space.normalize(history[i].point).transpose();
      y[static_cast<Eigen::Index>(i)] = history[i].cost;
    }
    gp::KernelHyper hyper = gp::optimize_hyperparams(X, y);
    return gp::GpModel::fit(X, y, hyper);
  };

  auto best_cost_now = [&]() {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& h : history) best = std::min(best, h.cost);
    return best;
  };

  bool converged = false;
  int iterations_run = 0;
  int stagnant = 0;
  std::optional<gp::GpModel> model;
  for (int it = 1; it <= config.max_iterations; ++it) {
    model = fit_current();
    double best_before = best_cost_now();
    std::vector<Eigen::VectorXd> batch = thompson_select(
        *model, space, config.batch_size, config.candidate_pool, rng);
    evaluate_into(batch, it);
    iterations_run = it;
    double improvement = best_before - best_cost_now();
    stagnant = improvement < config.convergence_tol ? stagnant + 1 : 0;
    if (stagnant >= config.convergence_window) {
      converged = true;
      break;
    }
  }

  gp::GpModel final_model = fit_current();
  BoRun run{std::move(history), std::move(final_model), converged,
            iterations_run, Eigen::VectorXd(), 0.0};
  run.best_cost = std::numeric_limits<double>::infinity();
  for (const auto& h : run.history) {
    if (h.cost < run.best_cost) {
      run.best_cost = h.cost;
      run.best_point = h.point;
    }
  }
  return run;
}

}  // namespace scengen::bo

#endif  // SCENGEN_BO_BO_HPP
