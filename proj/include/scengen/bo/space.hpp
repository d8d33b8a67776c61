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

#ifndef SCENGEN_BO_SPACE_HPP
#define SCENGEN_BO_SPACE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/random.hpp"

namespace scengen::bo {

struct Param {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
};

/// Ordered box over named real parameters. Points are plain Eigen vectors
/// in declaration order.
class ParameterSpace {
public:
  explicit ParameterSpace(std::vector<Param> params)
      : params_(std::move(params)) {
    if (params_.empty()) {
      throw ValidationError("parameter space: at least one parameter");
    }
    std::set<std::string> names;
    for (const Param& p : params_) {
      if (p.name.empty()) {
        throw ValidationError("parameter space: empty parameter name");
      }
      if (!names.insert(p.name).second) {
        throw ValidationError("parameter space: duplicate parameter '" +
                              p.name + "'");
      }
      if (!std::isfinite(p.lower) || !std::isfinite(p.upper) ||
          !(p.lower < p.upper)) {
        throw ValidationError("parameter '" + p.name +
                              "': lower bound must be below upper bound");
      }
    }
  }

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(params_.size());
  }
  const Param& operator[](Eigen::Index i) const {
    return params_[static_cast<std::size_t>(i)];
  }
  const std::vector<Param>& params() const { return params_; }

  /// Maps a point into the unit cube.
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
    check_dim(x);
    Eigen::VectorXd u(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      const Param& p = params_[static_cast<std::size_t>(i)];
      u[i] = (x[i] - p.lower) / (p.upper - p.lower);
    }
    return u;
  }

  Eigen::VectorXd denormalize(const Eigen::VectorXd& u) const {
    check_dim(u);
    Eigen::VectorXd x(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      const Param& p = params_[static_cast<std::size_t>(i)];
      x[i] = p.lower + u[i] * (p.upper - p.lower);
    }
    return x;
  }

  /// Rows of `points` normalized into the unit cube.
  Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd out(points.rows(), points.cols());
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
      out.row(r) = normalize(points.row(r)).transpose();
    }
    return out;
  }

  Eigen::VectorXd sample_uniform(Rng& rng) const {
    Eigen::VectorXd x(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      const Param& p = params_[static_cast<std::size_t>(i)];
      x[i] = rng.uniform(p.lower, p.upper);
    }
    return x;
  }

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
    check_dim(x);
    for (Eigen::Index i = 0; i < size(); ++i) {
      const Param& p = params_[static_cast<std::size_t>(i)];
      if (x[i] < p.lower - tol || x[i] > p.upper + tol) return false;
    }
    return true;
  }

private:
  void check_dim(const Eigen::VectorXd& x) const {
    if (x.size() != size()) {
      throw ValidationError("parameter space: point dimension mismatch");
    }
  }

  std::vector<Param> params_;
};

}  // namespace scengen::bo

#endif  // SCENGEN_BO_SPACE_HPP
