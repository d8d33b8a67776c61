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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "scengen/gp/hyperopt.hpp"
#include "scengen/gp/kernel.hpp"
#include "scengen/gp/model.hpp"
#include "scengen/random.hpp"

using scengen::NumericError;
using scengen::Rng;
using scengen::ValidationError;
using scengen::gp::GpModel;
using scengen::gp::KernelHyper;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

// Random training set with a minimum separation so the noise-free kernel
// matrix stays invertible at test tolerances.
struct RandomSet {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  KernelHyper hyper;
};

// Separation 0.12 with lengthscales <= 0.6 keeps the smallest kernel
// eigenvalue far above the 1e-10 jitter, so noise-free interpolation holds
// at the 1e-6 test tolerance.
RandomSet random_set(Rng& rng) {
  const int d = 1 + static_cast<int>(rng.index(3));
  const int max_n = d == 1 ? 9 : 20;
  const int want = 3 + static_cast<int>(rng.index(max_n - 2));
  std::vector<Eigen::RowVectorXd> rows;
  int attempts = 0;
  while (static_cast<int>(rows.size()) < want && attempts < 2000) {
    ++attempts;
    Eigen::RowVectorXd p(d);
    for (int j = 0; j < d; ++j) p[j] = rng.uniform01();
    bool ok = true;
    for (const auto& q : rows) {
      if ((q - p).cwiseAbs().maxCoeff() < 0.12) {
        ok = false;
        break;
      }
    }
    if (ok) rows.push_back(p);
  }
  // Keep however many separated points we managed to place (>= 3: three
  // points at 0.12 separation always fit in the unit cube).
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) X.row(i) = rows[static_cast<std::size_t>(i)];
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.uniform(-2.0, 2.0);
  KernelHyper hyper;
  hyper.signal_variance = rng.uniform(0.5, 2.0);
  hyper.lengthscales = Eigen::VectorXd::NullaryExpr(
      d, [&rng](Eigen::Index) { return rng.uniform(0.2, 0.6); });
  return {X, y, hyper};
}

}  // namespace

TEST(GpKernel, ValueAtZeroDistanceIsSignalVariance) {
  KernelHyper h = KernelHyper::isotropic(2.5, 0.7, 3);
  Eigen::VectorXd x(3);
  x << 0.1, -0.4, 2.0;
  EXPECT_DOUBLE_EQ(scengen::gp::matern_kernel(x, x, h), 2.5);
}

TEST(GpKernel, DecaysToZero) {
  KernelHyper h = KernelHyper::isotropic(1.0, 1.0, 1);
  EXPECT_LT(scengen::gp::matern_kernel(vec1(0.0), vec1(50.0), h), 1e-12);
}

TEST(GpKernel, UnitDistanceClosedForm) {
  KernelHyper h = KernelHyper::isotropic(1.0, 1.0, 1);
  // (1 + sqrt(5) + 5/3) e^{-sqrt(5)}
  EXPECT_NEAR(scengen::gp::matern_kernel(vec1(0.0), vec1(1.0), h),
              0.5239941088318203, 1e-12);
}

TEST(GpKernel, MatchesScalarOracleAndIsSymmetric) {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    int d = 1 + static_cast<int>(rng.index(4));
    Eigen::VectorXd x(d), y(d);
    KernelHyper h;
    h.signal_variance = rng.uniform(0.1, 3.0);
    h.lengthscales = Eigen::VectorXd(d);
    for (int i = 0; i < d; ++i) {
      x[i] = rng.uniform(-3.0, 3.0);
      y[i] = rng.uniform(-3.0, 3.0);
      h.lengthscales[i] = rng.uniform(0.1, 2.0);
    }
    double k1 = scengen::gp::matern_kernel(x, y, h);
    double k2 = scengen::gp::matern_kernel(y, x, h);
    EXPECT_DOUBLE_EQ(k1, k2);
    EXPECT_NEAR(k1, oracles::matern52(x, y, h.signal_variance, h.lengthscales),
                1e-13);
  }
}

TEST(GpKernel, RejectsBadInputs) {
  KernelHyper h = KernelHyper::isotropic(1.0, 1.0, 2);
  Eigen::VectorXd x2(2), x3(3);
  x2.setZero();
  x3.setZero();
  EXPECT_THROW(scengen::gp::matern_kernel(x2, x3, h), ValidationError);
  EXPECT_THROW(scengen::gp::matern_kernel(x3, x3, h), ValidationError);
  KernelHyper bad = KernelHyper::isotropic(-1.0, 1.0, 2);
  EXPECT_THROW(scengen::gp::matern_kernel(x2, x2, bad), ValidationError);
}

TEST(GpKernel, MatrixIsPsdBeforeJitter) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    RandomSet s = random_set(rng);
    Eigen::MatrixXd K = scengen::gp::kernel_matrix(s.X, s.hyper);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(GpFit, SingleTrainingPointInterpolates) {
  Eigen::MatrixXd X(1, 1);
  X << 0.5;
  GpModel m = GpModel::fit(X, vec1(2.0), KernelHyper::isotropic(1.0, 1.0, 1));
  auto p = m.predict(X);
  EXPECT_NEAR(p.mean[0], 2.0, 1e-9);
  EXPECT_LE(p.cov(0, 0), 1e-8);
}

TEST(GpFit, DuplicateRowsRejected) {
  Eigen::MatrixXd X(2, 2);
  X << 0.25, 0.5, 0.25, 0.5;
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  EXPECT_THROW(GpModel::fit(X, y, KernelHyper::isotropic(1.0, 1.0, 2)),
               ValidationError);
}

TEST(GpFit, ConstantTargetsPredictThatConstant) {
  Eigen::MatrixXd X(4, 1);
  X << 0.0, 0.3, 0.6, 1.0;
  Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 3.7);
  GpModel m = GpModel::fit(X, y, KernelHyper::isotropic(1.0, 0.5, 1));
  Eigen::MatrixXd q(3, 1);
  q << 0.1, 0.45, 5.0;
  Eigen::VectorXd mean = m.predict_mean(q);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(mean[i], 3.7, 1e-9);
}

TEST(GpPredict, FarQueryRecoversPrior) {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 0.4, 0.9;
  Eigen::VectorXd y(3);
  y << 1.0, 3.0, 2.0;
  KernelHyper h = KernelHyper::isotropic(1.7, 0.3, 1);
  GpModel m = GpModel::fit(X, y, h);
  auto p = m.predict(Eigen::MatrixXd::Constant(1, 1, 100.0));
  EXPECT_NEAR(p.mean[0], m.target_offset(), 1e-9);
  EXPECT_NEAR(p.cov(0, 0), 1.7, 1e-9);
}

TEST(GpPredict, DualPathClosedFormAgreement) {
  // 1-D, X = {0, 1}, y = {0, 1}, l = 1, s2 = 1, queried at 0.5.
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1.0;
  Eigen::VectorXd y(2);
  y << 0.0, 1.0;
  KernelHyper h = KernelHyper::isotropic(1.0, 1.0, 1);
  GpModel m = GpModel::fit(X, y, h);
  auto p = m.predict(Eigen::MatrixXd::Constant(1, 1, 0.5));

  // Direct evaluation with an explicit 2x2 inverse.
  const double k01 = oracles::matern52(vec1(0.0), vec1(1.0), 1.0,
                                       Eigen::VectorXd::Ones(1));
  const double ks = oracles::matern52(vec1(0.5), vec1(0.0), 1.0,
                                      Eigen::VectorXd::Ones(1));
  const double j = m.jitter();
  const double a11 = 1.0 + j;
  const double det = a11 * a11 - k01 * k01;
  // Centered targets are {-0.5, 0.5}; by symmetry both cross-covariances
  // equal ks.
  const double mean = ks * ((a11 * -0.5 - k01 * 0.5) / det) +
                      ks * ((a11 * 0.5 - k01 * -0.5) / det) + 0.5;
  EXPECT_NEAR(p.mean[0], mean, 1e-10);
}

TEST(GpPredict, CholeskyPathMatchesDenseSolve) {
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    RandomSet s = random_set(rng);
    GpModel m = GpModel::fit(s.X, s.y, s.hyper);
    Eigen::MatrixXd q(5, s.X.cols());
    for (int i = 0; i < q.rows(); ++i) {
      for (int jj = 0; jj < q.cols(); ++jj) q(i, jj) = rng.uniform01();
    }
    auto p = m.predict(q);
    auto ref = oracles::dense_gp_predict(s.X, s.y, s.hyper.signal_variance,
                                         s.hyper.lengthscales, m.jitter(), q);
    for (int i = 0; i < q.rows(); ++i) {
      EXPECT_NEAR(p.mean[i], ref.mean[i], 1e-9);
      for (int jj = 0; jj < q.rows(); ++jj) {
        EXPECT_NEAR(p.cov(i, jj), ref.cov(i, jj), 1e-9);
      }
    }
  }
}

TEST(GpPredict, InterpolatesTrainingPoints) {
  Rng rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    RandomSet s = random_set(rng);
    GpModel m = GpModel::fit(s.X, s.y, s.hyper);
    auto p = m.predict(s.X);
    for (int i = 0; i < s.X.rows(); ++i) {
      EXPECT_NEAR(p.mean[i], s.y[i], 1e-6);
      EXPECT_LE(p.cov(i, i), 1e-8);
    }
  }
}

TEST(GpPredict, TargetTranslationShiftsMeansOnly) {
  Rng rng(45);
  RandomSet s = random_set(rng);
  const double c = 11.25;
  GpModel a = GpModel::fit(s.X, s.y, s.hyper);
  GpModel b = GpModel::fit(s.X, (s.y.array() + c).matrix(), s.hyper);
  Eigen::MatrixXd q(7, s.X.cols());
  for (int i = 0; i < q.rows(); ++i) {
    for (int jj = 0; jj < q.cols(); ++jj) q(i, jj) = rng.uniform01();
  }
  auto pa = a.predict(q);
  auto pb = b.predict(q);
  for (int i = 0; i < q.rows(); ++i) {
    EXPECT_NEAR(pb.mean[i] - pa.mean[i], c, 1e-10);
    for (int jj = 0; jj < q.rows(); ++jj) {
      // Covariance never depends on targets.
      EXPECT_EQ(pa.cov(i, jj), pb.cov(i, jj));
    }
  }
}

TEST(GpSample, TrainingCandidatesReproduceTargets) {
  Rng rng(46);
  RandomSet s = random_set(rng);
  GpModel m = GpModel::fit(s.X, s.y, s.hyper);
  Rng draw(99);
  Eigen::VectorXd f = m.sample_at(s.X, draw);
  for (int i = 0; i < s.X.rows(); ++i) EXPECT_NEAR(f[i], s.y[i], 1e-3);
}

TEST(GpSample, DeterministicGivenSeed) {
  Rng rng(47);
  RandomSet s = random_set(rng);
  GpModel m = GpModel::fit(s.X, s.y, s.hyper);
  Eigen::MatrixXd q(6, s.X.cols());
  for (int i = 0; i < q.rows(); ++i) {
    for (int jj = 0; jj < q.cols(); ++jj) q(i, jj) = rng.uniform01();
  }
  Rng d1(12345), d2(12345);
  Eigen::VectorXd f1 = m.sample_at(q, d1);
  Eigen::VectorXd f2 = m.sample_at(q, d2);
  EXPECT_EQ(f1, f2);
}

TEST(GpSample, FarPointDrawsMatchPriorMoments) {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 0.5, 1.0;
  Eigen::VectorXd y(3);
  y << 2.0, 4.0, 3.0;
  KernelHyper h = KernelHyper::isotropic(1.5, 0.2, 1);
  GpModel m = GpModel::fit(X, y, h);
  Eigen::MatrixXd far = Eigen::MatrixXd::Constant(1, 1, 80.0);
  const int kDraws = 10000;
  Rng rng(321);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    double v = m.sample_at(far, rng)[0];
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / kDraws;
  const double var = sumsq / kDraws - mean * mean;
  const double sigma = std::sqrt(1.5);
  EXPECT_NEAR(mean, m.target_offset(), 3.0 * sigma / std::sqrt(kDraws));
  EXPECT_NEAR(var, 1.5, 3.0 * 1.5 * std::sqrt(2.0 / (kDraws - 1)));
}

TEST(GpHyper, RequiresThreePoints) {
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1.0;
  Eigen::VectorXd y(2);
  y << 0.0, 1.0;
  EXPECT_THROW(scengen::gp::optimize_hyperparams(X, y), ValidationError);
}

TEST(GpHyper, ConstantTargetsDriveLengthscaleToUpperBound) {
  Eigen::MatrixXd X(6, 1);
  X << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0;
  Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 1.5);
  KernelHyper h = scengen::gp::optimize_hyperparams(X, y);
  EXPECT_GE(h.lengthscales[0], 8.0);
  EXPECT_NEAR(h.signal_variance, 1e-4, 1e-10);
}

TEST(GpHyper, BeatsCoarseGridSweep) {
  Rng rng(48);
  Eigen::MatrixXd X(10, 1);
  for (int i = 0; i < 10; ++i) X(i, 0) = i / 9.0;
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    y[i] = std::sin(6.0 * X(i, 0)) + 0.1 * rng.normal();
  }
  KernelHyper h = scengen::gp::optimize_hyperparams(X, y);
  double lml = scengen::gp::log_marginal_likelihood(X, y, h);
  double grid_best = -1e300;
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 20; ++b) {
      KernelHyper g;
      g.lengthscales = vec1(0.01 * std::pow(1000.0, a / 19.0));
      double var_y = (y.array() - y.mean()).square().mean();
      g.signal_variance = 1e-4 * std::pow(1e4 * var_y / 1e-4, b / 19.0);
      grid_best = std::max(
          grid_best, scengen::gp::log_marginal_likelihood(X, y, g));
    }
  }
  EXPECT_GE(lml, grid_best - 0.1);
}

TEST(GpHyper, RecoversKnownLengthscaleWithinFactorTwo) {
  // Draw one function from a known Matern GP and fit it back.
  const int n = 60;
  Eigen::MatrixXd X(n, 1);
  Rng rng(50);
  for (int i = 0; i < n; ++i) X(i, 0) = rng.uniform01();
  KernelHyper truth = KernelHyper::isotropic(1.0, 0.3, 1);
  Eigen::MatrixXd K = scengen::gp::kernel_matrix(X, truth);
  auto [L, jitter] = scengen::gp::detail::cholesky_with_jitter(K);
  (void)jitter;
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  Eigen::VectorXd y = L * z;
  KernelHyper h = scengen::gp::optimize_hyperparams(X, y);
  EXPECT_GE(h.lengthscales[0], 0.15);
  EXPECT_LE(h.lengthscales[0], 0.6);
}
