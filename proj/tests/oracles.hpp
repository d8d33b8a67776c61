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

// Reference implementations used only by the tests. Each is written as a
// direct, slow transcription of the defining equations, structured
// differently from the library code it checks.

#ifndef SCENGEN_TESTS_ORACLES_HPP
#define SCENGEN_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/stl/formula.hpp"
#include "scengen/stl/trace.hpp"

namespace oracles {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// STL reference monitor: pointwise recursion over sample indices.

inline double expr_value(const scengen::stl::Expr& e,
                         const scengen::stl::Trace& tr, long long k) {
  using Op = scengen::stl::Expr::Op;
  switch (e.op()) {
    case Op::Constant: return e.value();
    case Op::Signal: return tr.signal(e.name()).at(static_cast<std::size_t>(k));
    case Op::Add: return expr_value(*e.lhs(), tr, k) + expr_value(*e.rhs(), tr, k);
    case Op::Sub: return expr_value(*e.lhs(), tr, k) - expr_value(*e.rhs(), tr, k);
    case Op::Mul: return expr_value(*e.lhs(), tr, k) * expr_value(*e.rhs(), tr, k);
    case Op::Div: return expr_value(*e.lhs(), tr, k) / expr_value(*e.rhs(), tr, k);
    case Op::Neg: return -expr_value(*e.lhs(), tr, k);
    case Op::Abs: return std::fabs(expr_value(*e.lhs(), tr, k));
    case Op::Min:
      return std::min(expr_value(*e.lhs(), tr, k), expr_value(*e.rhs(), tr, k));
    case Op::Max:
      return std::max(expr_value(*e.lhs(), tr, k), expr_value(*e.rhs(), tr, k));
  }
  return 0.0;
}

// Sample offsets j whose time j*dt falls inside [a, b]. Throws when the
// interval contains no grid point at all.
inline std::vector<long long> window_offsets(double a, double b, double dt,
                                             long long n) {
  std::vector<long long> J;
  for (long long j = 0; j < 2 * n + 4; ++j) {
    double t = static_cast<double>(j) * dt;
    if (!std::isinf(b) && t > b + 1e-9) break;
    if (t >= a - 1e-9) J.push_back(j);
    if (std::isinf(b) && j >= n) break;
  }
  if (J.empty()) throw scengen::ValidationError("oracle: empty window");
  return J;
}

// Robustness of f at sample k; nullopt when the trace is too short to
// decide f there.
inline std::optional<double> rho(const scengen::stl::Formula& f,
                                 const scengen::stl::Trace& tr, long long k) {
  using Kind = scengen::stl::Formula::Kind;
  const long long n = static_cast<long long>(tr.size());
  switch (f.kind()) {
    case Kind::True:
      if (k >= n) return std::nullopt;
      return kInf;
    case Kind::Predicate:
      if (k >= n) return std::nullopt;
      return expr_value(*f.pred(), tr, k);
    case Kind::Not: {
      auto r = rho(*f.lhs(), tr, k);
      if (!r) return std::nullopt;
      return -*r;
    }
    case Kind::And:
    case Kind::Or: {
      auto ra = rho(*f.lhs(), tr, k);
      auto rb = rho(*f.rhs(), tr, k);
      if (!ra || !rb) return std::nullopt;
      return f.kind() == Kind::And ? std::min(*ra, *rb) : std::max(*ra, *rb);
    }
    case Kind::Eventually:
    case Kind::Always: {
      auto J = window_offsets(f.window_lo(), f.window_hi(), tr.dt(), n);
      auto first = rho(*f.lhs(), tr, k + J.front());
      if (!first) return std::nullopt;
      double acc = f.kind() == Kind::Eventually ? -kInf : kInf;
      for (long long j : J) {
        auto r = rho(*f.lhs(), tr, k + j);
        if (!r) break;  // windows truncate at the recorded horizon
        acc = f.kind() == Kind::Eventually ? std::max(acc, *r)
                                           : std::min(acc, *r);
      }
      return acc;
    }
    case Kind::Until: {
      auto J = window_offsets(f.window_lo(), f.window_hi(), tr.dt(), n);
      auto fa = rho(*f.lhs(), tr, k + J.front());
      auto fb = rho(*f.rhs(), tr, k + J.front());
      if (!fa || !fb) return std::nullopt;
      double best = -kInf;
      for (long long j : J) {
        auto rb = rho(*f.rhs(), tr, k + j);
        if (!rb) break;
        double hold = kInf;
        bool ok = true;
        for (long long i = 0; i <= j; ++i) {
          auto ra = rho(*f.lhs(), tr, k + i);
          if (!ra) {
            ok = false;
            break;
          }
          hold = std::min(hold, *ra);
        }
        if (!ok) break;
        best = std::max(best, std::min(*rb, hold));
      }
      return best;
    }
  }
  return std::nullopt;
}

inline std::optional<bool> sat(const scengen::stl::Formula& f,
                               const scengen::stl::Trace& tr, long long k) {
  using Kind = scengen::stl::Formula::Kind;
  const long long n = static_cast<long long>(tr.size());
  switch (f.kind()) {
    case Kind::True:
      if (k >= n) return std::nullopt;
      return true;
    case Kind::Predicate:
      if (k >= n) return std::nullopt;
      return expr_value(*f.pred(), tr, k) > 0.0;
    case Kind::Not: {
      auto r = sat(*f.lhs(), tr, k);
      if (!r) return std::nullopt;
      return !*r;
    }
    case Kind::And:
    case Kind::Or: {
      auto ra = sat(*f.lhs(), tr, k);
      auto rb = sat(*f.rhs(), tr, k);
      if (!ra || !rb) return std::nullopt;
      return f.kind() == Kind::And ? (*ra && *rb) : (*ra || *rb);
    }
    case Kind::Eventually:
    case Kind::Always: {
      auto J = window_offsets(f.window_lo(), f.window_hi(), tr.dt(), n);
      auto first = sat(*f.lhs(), tr, k + J.front());
      if (!first) return std::nullopt;
      bool acc = f.kind() != Kind::Eventually;
      for (long long j : J) {
        auto r = sat(*f.lhs(), tr, k + j);
        if (!r) break;
        acc = f.kind() == Kind::Eventually ? (acc || *r) : (acc && *r);
      }
      return acc;
    }
    case Kind::Until: {
      auto J = window_offsets(f.window_lo(), f.window_hi(), tr.dt(), n);
      auto fa = sat(*f.lhs(), tr, k + J.front());
      auto fb = sat(*f.rhs(), tr, k + J.front());
      if (!fa || !fb) return std::nullopt;
      bool best = false;
      for (long long j : J) {
        auto rb = sat(*f.rhs(), tr, k + j);
        if (!rb) break;
        bool hold = true;
        bool ok = true;
        for (long long i = 0; i <= j; ++i) {
          auto ra = sat(*f.lhs(), tr, k + i);
          if (!ra) {
            ok = false;
            break;
          }
          hold = hold && *ra;
        }
        if (!ok) break;
        if (*rb && hold) best = true;
      }
      return best;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Gaussian process references.

inline double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       double signal_variance,
                       const Eigen::VectorXd& lengthscales) {
  double r2 = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double d = (x[i] - y[i]) / lengthscales[i];
    r2 += d * d;
  }
  double r = std::sqrt(r2);
  double s = std::sqrt(5.0) * r;
  return signal_variance * (1.0 + s + 5.0 * r2 / 3.0) * std::exp(-s);
}

// Dense-solve GP posterior (full-pivot LU inverse), for cross-checking the
// Cholesky path. Targets are centered on their mean, mirroring the model.
struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline DensePosterior dense_gp_predict(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y,
                                       double signal_variance,
                                       const Eigen::VectorXd& lengthscales,
                                       double jitter,
                                       const Eigen::MatrixXd& Xs) {
  const long n = X.rows();
  const long m = Xs.rows();
  Eigen::MatrixXd K(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      K(i, j) = matern52(X.row(i), X.row(j), signal_variance, lengthscales);
    }
    K(i, i) += jitter;
  }
  Eigen::MatrixXd Ks(m, n);
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < n; ++j) {
      Ks(i, j) = matern52(Xs.row(i), X.row(j), signal_variance, lengthscales);
    }
  }
  Eigen::MatrixXd Kss(m, m);
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < m; ++j) {
      Kss(i, j) = matern52(Xs.row(i), Xs.row(j), signal_variance, lengthscales);
    }
  }
  const double offset = y.mean();
  Eigen::MatrixXd Kinv = Eigen::FullPivLU<Eigen::MatrixXd>(K).inverse();
  DensePosterior out;
  out.mean = Ks * Kinv * (y.array() - offset).matrix() +
             Eigen::VectorXd::Constant(m, offset);
  out.cov = Kss - Ks * Kinv * Ks.transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Mixture density via explicit inverse and determinant.

inline double gaussian_density(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov) {
  const auto d = static_cast<double>(x.size());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  Eigen::VectorXd diff = x - mean;
  double quad = diff.dot(lu.inverse() * diff);
  double norm = std::pow(2.0 * M_PI, -d / 2.0) /
                std::sqrt(lu.determinant());
  return norm * std::exp(-0.5 * quad);
}

inline double mixture_density(
    const Eigen::VectorXd& x, const std::vector<double>& weights,
    const std::vector<Eigen::VectorXd>& means,
    const std::vector<Eigen::MatrixXd>& covs) {
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k] * gaussian_density(x, means[k], covs[k]);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Benchmark function.

inline double griewank(const Eigen::VectorXd& x) {
  double s = 0.0;
  double p = 1.0;
  for (int i = 0; i < x.size(); ++i) {
    s += x[i] * x[i] / 4000.0;
    p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return 1.0 + s - p;
}

}  // namespace oracles

#endif  // SCENGEN_TESTS_ORACLES_HPP
