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

#ifndef SCENGEN_GP_HYPEROPT_HPP
#define SCENGEN_GP_HYPEROPT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/gp/kernel.hpp"
#include "scengen/gp/model.hpp"
#include "scengen/random.hpp"

namespace scengen::gp {

namespace detail {

constexpr double kLengthscaleLo = 0.01;
constexpr double kLengthscaleHi = 10.0;
constexpr double kVarianceLo = 1e-4;
constexpr int kHyperStarts = 8;
constexpr int kMaxSweeps = 6;
// Fixed internal stream so refits are reproducible without threading a
// caller seed through every BO iteration.
constexpr std::uint64_t kHyperSeed = 0x5ca1ab1e;

// Golden-section maximization of fn over [lo, hi].
template <typename Fn>
double golden_max(Fn&& fn, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > 1e-2 * (hi - lo)) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  return fc > fd ? c : d;
}

}  // namespace detail

/// Maximizes the log marginal likelihood over lengthscales in [0.01, 10]
/// (inputs are expected normalized to the unit cube) and signal variance in
/// [1e-4, max(1e-4, 1e4 var(y))], using 8 deterministic multi-starts with
/// coordinate descent and golden-section line search in log space.
inline KernelHyper optimize_hyperparams(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 3) {
    throw ValidationError("gp: hyperparameter fit requires n >= 3");
  }
  if (y.size() != n) {
    throw ValidationError("gp: target count does not match input rows");
  }

  const double var_y = (y.array() - y.mean()).square().sum() /
                       static_cast<double>(n);
  const double s2_lo = detail::kVarianceLo;
  const double s2_hi = std::max(detail::kVarianceLo, 1e4 * var_y);

  const double log_l_lo = std::log(detail::kLengthscaleLo);
  const double log_l_hi = std::log(detail::kLengthscaleHi);
  const double log_s2_lo = std::log(s2_lo);
  const double log_s2_hi = std::log(s2_hi);

  // theta = [log l_1 .. log l_d, log s2]
  auto to_hyper = [d](const Eigen::VectorXd& theta) {
    KernelHyper h;
    h.lengthscales = theta.head(d).array().exp();
    h.signal_variance = std::exp(theta[d]);
    return h;
  };
  auto objective = [&](const Eigen::VectorXd& theta) {
    return log_marginal_likelihood(X, y, to_hyper(theta));
  };

  std::vector<Eigen::VectorXd> starts;
  {
    Eigen::VectorXd mid(d + 1);
    mid.head(d).setConstant(0.5 * (log_l_lo + log_l_hi));
    double s2_start = std::clamp(var_y, s2_lo, s2_hi);
    mid[d] = std::log(std::max(s2_start, s2_lo));
    starts.push_back(mid);
    Rng rng(detail::kHyperSeed);
    for (int s = 1; s < detail::kHyperStarts; ++s) {
      Eigen::VectorXd t(d + 1);
      for (Eigen::Index i = 0; i < d; ++i) {
        t[i] = rng.uniform(log_l_lo, log_l_hi);
      }
      t[d] = rng.uniform(log_s2_lo, log_s2_hi);
      starts.push_back(t);
    }
  }

  Eigen::VectorXd best_theta;
  double best_value = -std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& start : starts) {
    Eigen::VectorXd theta = start;
    double value = objective(theta);
    if (std::isinf(value) && value < 0.0) continue;
    for (int sweep = 0; sweep < detail::kMaxSweeps; ++sweep) {
      double before = value;
      for (Eigen::Index coord = 0; coord <= d; ++coord) {
        double lo = coord < d ? log_l_lo : log_s2_lo;
        double hi = coord < d ? log_l_hi : log_s2_hi;
        if (hi - lo < 1e-12) continue;
        Eigen::VectorXd probe = theta;
        double cand = detail::golden_max(
            [&](double v) {
              probe[coord] = v;
              return objective(probe);
            },
            lo, hi);
        probe[coord] = cand;
        double cand_value = objective(probe);
        if (cand_value > value) {
          theta = probe;
          value = cand_value;
        }
      }
      if (value - before < 1e-4) break;
    }
    if (value > best_value) {
      best_value = value;
      best_theta = theta;
    }
  }
  if (std::isinf(best_value) && best_value < 0.0) {
    throw NumericError("gp: every hyperparameter start failed factorization");
  }
  return to_hyper(best_theta);
}

}  // namespace scengen::gp

#endif  // SCENGEN_GP_HYPEROPT_HPP
