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

#ifndef SCENGEN_GMM_MODEL_HPP
#define SCENGEN_GMM_MODEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scengen/bo/space.hpp"
#include "scengen/error.hpp"
#include "scengen/random.hpp"

namespace scengen::gmm {

/// Smallest admissible covariance eigenvalue. Survivor sets can be nearly
/// degenerate along ridges; the floor keeps every component full-rank.
constexpr double kCovFloor = 1e-8;

constexpr double kLog2Pi = 1.8378770664093453;

struct GmmComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Weighted sum of full-covariance Gaussians over R^d. Immutable once
/// constructed; density evaluation and sampling are pure given the rng.
class Gmm {
public:
  explicit Gmm(std::vector<GmmComponent> components)
      : components_(std::move(components)) {
    if (components_.empty()) {
      throw ValidationError("gmm: at least one component required");
    }
    const Eigen::Index d = components_.front().mean.size();
    if (d < 1) throw ValidationError("gmm: component dimension must be >= 1");
    double weight_sum = 0.0;
    for (const GmmComponent& c : components_) {
      if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
        throw ValidationError("gmm: weights must be positive");
      }
      weight_sum += c.weight;
      if (c.mean.size() != d || c.cov.rows() != d || c.cov.cols() != d) {
        throw ValidationError("gmm: component dimension mismatch");
      }
      if (!c.mean.allFinite() || !c.cov.allFinite()) {
        throw ValidationError("gmm: non-finite component parameters");
      }
      if ((c.cov - c.cov.transpose()).cwiseAbs().maxCoeff() >
          1e-9 * std::max(1.0, c.cov.cwiseAbs().maxCoeff())) {
        throw ValidationError("gmm: covariance must be symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.cov);
      if (eig.eigenvalues().minCoeff() < kCovFloor - 1e-10) {
        throw ValidationError(
            "gmm: covariance eigenvalue below the floor of 1e-8");
      }
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
      throw ValidationError("gmm: weights must sum to 1");
    }

    chols_.reserve(components_.size());
    log_norms_.reserve(components_.size());
    for (const GmmComponent& c : components_) {
      Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
      if (llt.info() != Eigen::Success) {
        throw NumericError("gmm: covariance factorization failed");
      }
      Eigen::MatrixXd L = llt.matrixL();
      double log_det_half = L.diagonal().array().log().sum();
      log_norms_.push_back(std::log(c.weight) -
                           0.5 * static_cast<double>(d) * kLog2Pi -
                           log_det_half);
      chols_.push_back(std::move(L));
    }
  }

  Eigen::Index dim() const { return components_.front().mean.size(); }
  std::size_t component_count() const { return components_.size(); }
  const std::vector<GmmComponent>& components() const { return components_; }

  double log_density(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) {
      throw ValidationError("gmm: query dimension mismatch");
    }
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k) {
      Eigen::VectorXd z = chols_[k].triangularView<Eigen::Lower>().solve(
          x - components_[k].mean);
      terms[k] = log_norms_[k] - 0.5 * z.squaredNorm();
      max_term = std::max(max_term, terms[k]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
  }

  double density(const Eigen::VectorXd& x) const {
    return std::exp(log_density(x));
  }

  /// One unconstrained draw: categorical component choice, then an affine
  /// transform of standard normals through the covariance factor.
  Eigen::VectorXd sample(Rng& rng) const {
    double u = rng.uniform01();
    std::size_t k = components_.size() - 1;
    double cum = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      cum += components_[i].weight;
      if (u < cum) {
        k = i;
        break;
      }
    }
    Eigen::VectorXd z(dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return components_[k].mean + chols_[k] * z;
  }

  /// Draws restricted to the box by rejection; a sample that cannot be
  /// placed within `kMaxRejects` attempts signals that most mixture mass
  /// lies outside the bounds.
  Eigen::MatrixXd sample_box(int n, const bo::ParameterSpace& bounds,
                             Rng& rng) const {
    if (n < 1) throw ValidationError("gmm: sample count must be >= 1");
    if (bounds.size() != dim()) {
      throw ValidationError("gmm: bounds dimension mismatch");
    }
    Eigen::MatrixXd out(n, dim());
    for (int i = 0; i < n; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < kMaxRejects; ++attempt) {
        Eigen::VectorXd x = sample(rng);
        if (bounds.contains(x)) {
          out.row(i) = x.transpose();
          placed = true;
          break;
        }
      }
      if (!placed) {
        throw NumericError(
            "gmm: rejection budget exhausted after " +
            std::to_string(kMaxRejects) +
            " attempts; mixture mass lies mostly outside the bounds");
      }
    }
    return out;
  }

  static constexpr int kMaxRejects = 1000;

private:
  std::vector<GmmComponent> components_;
  std::vector<Eigen::MatrixXd> chols_;
  std::vector<double> log_norms_;
};

}  // namespace scengen::gmm

#endif  // SCENGEN_GMM_MODEL_HPP
