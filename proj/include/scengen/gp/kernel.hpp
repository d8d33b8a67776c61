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

#ifndef SCENGEN_GP_KERNEL_HPP
#define SCENGEN_GP_KERNEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "scengen/error.hpp"

namespace scengen::gp {

/// Matern nu = 5/2 kernel hyperparameters with per-dimension lengthscales.
struct KernelHyper {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;

  void validate(Eigen::Index dim) const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
      throw ValidationError("kernel: signal variance must be positive");
    }
    if (lengthscales.size() != dim) {
      throw ValidationError(
          "kernel: lengthscale count " + std::to_string(lengthscales.size()) +
          " does not match input dimension " + std::to_string(dim));
    }
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
      if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i])) {
        throw ValidationError("kernel: lengthscales must be positive");
      }
    }
  }

  static KernelHyper isotropic(double signal_variance, double lengthscale,
                               Eigen::Index dim) {
    KernelHyper h;
    h.signal_variance = signal_variance;
    h.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
    return h;
  }
};

namespace detail {

// k(r2) = sigma^2 (1 + s + 5 r2 / 3) exp(-s), s = sqrt(5 r2), where r2 is
// the squared lengthscale-weighted distance.
inline double matern52_from_r2(double r2, double signal_variance) {
  if (r2 < 0.0) r2 = 0.0;
  const double s = std::sqrt(5.0 * r2);
  return signal_variance * (1.0 + s + 5.0 * r2 / 3.0) * std::exp(-s);
}

// Squared scaled distances between row sets: D2(i,j) = |a_i - b_j|^2 after
// dividing each dimension by its lengthscale.
inline Eigen::MatrixXd scaled_sq_dists(const Eigen::MatrixXd& A,
                                       const Eigen::MatrixXd& B,
                                       const Eigen::VectorXd& lengthscales) {
  Eigen::MatrixXd As = A * lengthscales.cwiseInverse().asDiagonal();
  Eigen::MatrixXd Bs = B * lengthscales.cwiseInverse().asDiagonal();
  Eigen::VectorXd an = As.rowwise().squaredNorm();
  Eigen::VectorXd bn = Bs.rowwise().squaredNorm();
  Eigen::MatrixXd D2 = (-2.0 * As * Bs.transpose());
  D2.colwise() += an;
  D2.rowwise() += bn.transpose();
  return D2.cwiseMax(0.0);
}

}  // namespace detail

/// Matern 5/2 covariance between two points.
inline double matern_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const KernelHyper& hyper) {
  if (x.size() != y.size()) {
    throw ValidationError("kernel: point dimensions differ");
  }
  hyper.validate(x.size());
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = (x[i] - y[i]) / hyper.lengthscales[i];
    r2 += d * d;
  }
  return detail::matern52_from_r2(r2, hyper.signal_variance);
}

namespace detail {

// Vectorized Matern 5/2 transform of a squared-distance matrix.
inline Eigen::MatrixXd matern52_transform(const Eigen::MatrixXd& D2,
                                          double signal_variance) {
  Eigen::ArrayXXd S = (5.0 * D2.array()).sqrt();
  return (signal_variance * (1.0 + S + (5.0 / 3.0) * D2.array()) *
          (-S).exp())
      .matrix();
}

}  // namespace detail

/// Symmetric kernel matrix over the rows of X.
inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X,
                                     const KernelHyper& hyper) {
  hyper.validate(X.cols());
  Eigen::MatrixXd D2 = detail::scaled_sq_dists(X, X, hyper.lengthscales);
  D2.diagonal().setZero();
  return detail::matern52_transform(D2, hyper.signal_variance);
}

/// Cross-kernel matrix between the rows of A and the rows of B.
inline Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& B,
                                    const KernelHyper& hyper) {
  if (A.cols() != B.cols()) {
    throw ValidationError("kernel: point dimensions differ");
  }
  hyper.validate(A.cols());
  Eigen::MatrixXd D2 = detail::scaled_sq_dists(A, B, hyper.lengthscales);
  return detail::matern52_transform(D2, hyper.signal_variance);
}

}  // namespace scengen::gp

#endif  // SCENGEN_GP_KERNEL_HPP
