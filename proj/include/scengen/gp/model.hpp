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

#ifndef SCENGEN_GP_MODEL_HPP
#define SCENGEN_GP_MODEL_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "scengen/error.hpp"
#include "scengen/gp/kernel.hpp"
#include "scengen/random.hpp"

namespace scengen::gp {

namespace detail {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;

// Cholesky of K + jitter I, escalating jitter by x10 from 1e-10 to 1e-6.
// Returns the lower factor and the jitter that succeeded.
inline std::pair<Eigen::MatrixXd, double> cholesky_with_jitter(
    const Eigen::MatrixXd& K) {
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001;
       jitter *= 10.0) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      return {llt.matrixL(), jitter};
    }
  }
  throw NumericError(
      "gp: Cholesky factorization failed after jitter escalation "
      "(near-duplicate inputs?)");
}

}  // namespace detail

/// Noise-free Gaussian-process regressor. Targets are centered on their
/// mean internally; predictions add the offset back, so a constant shift of
/// the targets shifts predictions by exactly that constant.
class GpModel {
public:
  static GpModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const KernelHyper& hyper) {
    if (X.rows() < 1) throw ValidationError("gp: empty training set");
    if (y.size() != X.rows()) {
      throw ValidationError("gp: target count does not match input rows");
    }
    hyper.validate(X.cols());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (!std::isfinite(y[i])) {
        throw ValidationError("gp: non-finite training target");
      }
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
        if ((X.row(i) - X.row(j)).cwiseAbs().maxCoeff() < 1e-10) {
          throw ValidationError("gp: duplicate training inputs (rows " +
                                std::to_string(i) + ", " + std::to_string(j) +
                                ")");
        }
      }
    }
    GpModel m;
    m.X_ = X;
    m.hyper_ = hyper;
    m.offset_ = y.mean();
    m.y_ = y.array() - m.offset_;
    Eigen::MatrixXd K = kernel_matrix(X, hyper);
    auto [L, jitter] = detail::cholesky_with_jitter(K);
    m.L_ = std::move(L);
    m.jitter_ = jitter;
    m.alpha_ = m.L_.triangularView<Eigen::Lower>().solve(m.y_);
    m.alpha_ =
        m.L_.transpose().triangularView<Eigen::Upper>().solve(m.alpha_);
    return m;
  }

  struct Prediction {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
  };

  /// Posterior mean and covariance at the rows of Xs. The covariance is
  /// symmetrized and its diagonal clamped to be non-negative.
  Prediction predict(const Eigen::MatrixXd& Xs) const {
    check_query(Xs);
    Eigen::MatrixXd Ks = cross_kernel(Xs, X_, hyper_);
    Prediction out;
    out.mean = Ks * alpha_;
    out.mean.array() += offset_;
    Eigen::MatrixXd V =
        L_.triangularView<Eigen::Lower>().solve(Ks.transpose());
    out.cov = kernel_matrix(Xs, hyper_) - V.transpose() * V;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    for (Eigen::Index i = 0; i < out.cov.rows(); ++i) {
      if (out.cov(i, i) < 0.0) out.cov(i, i) = 0.0;
    }
    return out;
  }

  /// Posterior mean only (cheaper than predict for large query sets).
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& Xs) const {
    check_query(Xs);
    Eigen::VectorXd mean = cross_kernel(Xs, X_, hyper_) * alpha_;
    mean.array() += offset_;
    return mean;
  }

  /// One joint posterior draw at the rows of Xs.
  Eigen::VectorXd sample_at(const Eigen::MatrixXd& Xs, Rng& rng) const {
    Prediction p = predict(Xs);
    auto [L, jitter] = detail::cholesky_with_jitter(p.cov);
    (void)jitter;
    Eigen::VectorXd z(Xs.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return p.mean + L * z;
  }

  Eigen::Index dim() const { return X_.cols(); }
  Eigen::Index train_count() const { return X_.rows(); }
  const Eigen::MatrixXd& train_inputs() const { return X_; }
  /// Raw (uncentered) training targets.
  Eigen::VectorXd train_targets() const {
    return (y_.array() + offset_).matrix();
  }
  double target_offset() const { return offset_; }
  const KernelHyper& hyper() const { return hyper_; }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& chol_lower() const { return L_; }

private:
  GpModel() = default;

  void check_query(const Eigen::MatrixXd& Xs) const {
    if (Xs.rows() < 1) throw ValidationError("gp: empty query set");
    if (Xs.cols() != X_.cols()) {
      throw ValidationError("gp: query dimension does not match training");
    }
  }

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  double offset_ = 0.0;
  KernelHyper hyper_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Log marginal likelihood of (X, y) under the given hyperparameters, with
/// the same centering and jitter schedule as GpModel::fit. Returns -inf when
/// factorization fails, so hyperparameter search can skip the point.
inline double log_marginal_likelihood(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y,
                                      const KernelHyper& hyper) {
  hyper.validate(X.cols());
  const Eigen::Index n = X.rows();
  Eigen::VectorXd yc = y.array() - y.mean();
  Eigen::MatrixXd K = kernel_matrix(X, hyper);
  Eigen::MatrixXd L;
  try {
    L = detail::cholesky_with_jitter(K).first;
  } catch (const NumericError&) {
    return -std::numeric_limits<double>::infinity();
  }
  Eigen::VectorXd v = L.triangularView<Eigen::Lower>().solve(yc);
  double logdet_half = L.diagonal().array().log().sum();
  return -0.5 * v.squaredNorm() - logdet_half -
         0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

}  // namespace scengen::gp

#endif  // SCENGEN_GP_MODEL_HPP
