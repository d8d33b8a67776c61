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

#ifndef SCENGEN_GMM_EM_HPP
#define SCENGEN_GMM_EM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/gmm/model.hpp"
#include "scengen/random.hpp"

namespace scengen::gmm {

constexpr double kEmTol = 1e-6;
constexpr int kEmMaxIterations = 200;
constexpr int kEmRestarts = 5;

struct EmResult {
  Gmm model;
  double loglik = 0.0;
  std::vector<double> loglik_path;  // one entry per EM iteration
};

namespace detail {

// Mutable mixture state used inside EM; components are floored but not
// validated until the final Gmm is assembled.
struct MixtureState {
  Eigen::VectorXd weights;             // K
  std::vector<Eigen::VectorXd> means;  // K x d
  std::vector<Eigen::MatrixXd> covs;   // K x d x d
  std::vector<Eigen::MatrixXd> chols;
  Eigen::VectorXd log_norms;
};

inline Eigen::MatrixXd floored_covariance(const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(kCovFloor);
  Eigen::MatrixXd floored = eig.eigenvectors() * vals.asDiagonal() *
                            eig.eigenvectors().transpose();
  return 0.5 * (floored + floored.transpose());
}

inline void refresh_factorizations(MixtureState& state) {
  const auto d = static_cast<double>(state.means.front().size());
  state.chols.resize(state.covs.size());
  state.log_norms.resize(static_cast<Eigen::Index>(state.covs.size()));
  for (std::size_t k = 0; k < state.covs.size(); ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(state.covs[k]);
    if (llt.info() != Eigen::Success) {
      throw NumericError("em: covariance factorization failed");
    }
    state.chols[k] = llt.matrixL();
    double log_det_half = state.chols[k].diagonal().array().log().sum();
    state.log_norms[static_cast<Eigen::Index>(k)] =
        std::log(std::max(state.weights[static_cast<Eigen::Index>(k)],
                          1e-300)) -
        0.5 * d * kLog2Pi - log_det_half;
  }
}

// Joint log-density of every point under every component, n x K.
inline Eigen::MatrixXd component_log_densities(const Eigen::MatrixXd& X,
                                               const MixtureState& state) {
  const Eigen::Index n = X.rows();
  const auto K = static_cast<Eigen::Index>(state.means.size());
  Eigen::MatrixXd logp(n, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    Eigen::MatrixXd centered =
        X.rowwise() - state.means[static_cast<std::size_t>(k)].transpose();
    Eigen::MatrixXd z = state.chols[static_cast<std::size_t>(k)]
                            .triangularView<Eigen::Lower>()
                            .solve(centered.transpose());
    logp.col(k) = (-0.5 * z.colwise().squaredNorm().array() +
                   state.log_norms[k])
                      .transpose();
  }
  return logp;
}

// Returns the data log-likelihood and fills `resp` with responsibilities.
inline double e_step(const Eigen::MatrixXd& logp, Eigen::MatrixXd& resp) {
  Eigen::VectorXd row_max = logp.rowwise().maxCoeff();
  Eigen::MatrixXd shifted =
      (logp.colwise() - row_max).array().exp().matrix();
  Eigen::VectorXd row_sum = shifted.rowwise().sum();
  resp = (shifted.array().colwise() / row_sum.array()).matrix();
  return (row_max.array() + row_sum.array().log()).sum();
}

inline void m_step(const Eigen::MatrixXd& X, const Eigen::MatrixXd& resp,
                   MixtureState& state) {
  const Eigen::Index n = X.rows();
  const Eigen::Index K = resp.cols();
  for (Eigen::Index k = 0; k < K; ++k) {
    double nk = resp.col(k).sum();
    double denom = std::max(nk, 1e-300);
    state.weights[k] = nk / static_cast<double>(n);
    Eigen::VectorXd mean = X.transpose() * resp.col(k) / denom;
    Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() *
                          resp.col(k).asDiagonal() * centered / denom;
    state.means[static_cast<std::size_t>(k)] = std::move(mean);
    state.covs[static_cast<std::size_t>(k)] = floored_covariance(cov);
  }
  refresh_factorizations(state);
}

// k-means++-style seeding: first mean uniform, the rest sampled with
// probability proportional to squared distance from the chosen set.
inline std::vector<Eigen::VectorXd> kmeanspp_means(const Eigen::MatrixXd& X,
                                                   int K, Rng& rng) {
  const Eigen::Index n = X.rows();
  std::vector<Eigen::VectorXd> means;
  means.reserve(static_cast<std::size_t>(K));
  means.push_back(X.row(static_cast<Eigen::Index>(rng.index(
                            static_cast<std::size_t>(n))))
                      .transpose());
  Eigen::VectorXd d2 =
      (X.rowwise() - means.back().transpose()).rowwise().squaredNorm();
  while (static_cast<int>(means.size()) < K) {
    double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double u = rng.uniform01() * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += d2[i];
        if (u < cum) {
          chosen = i;
          break;
        }
        chosen = i;
      }
    } else {
      chosen = static_cast<Eigen::Index>(
          rng.index(static_cast<std::size_t>(n)));
    }
    means.push_back(X.row(chosen).transpose());
    d2 = d2.cwiseMin(
        (X.rowwise() - means.back().transpose()).rowwise().squaredNorm());
  }
  return means;
}

inline MixtureState initial_state(const Eigen::MatrixXd& X, int K,
                                  Rng& rng) {
  MixtureState state;
  state.means = kmeanspp_means(X, K, rng);
  state.weights =
      Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
  Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  Eigen::MatrixXd pooled = centered.transpose() * centered /
                           static_cast<double>(X.rows());
  state.covs.assign(static_cast<std::size_t>(K),
                    floored_covariance(pooled));
  refresh_factorizations(state);
  return state;
}

inline Gmm to_gmm(const MixtureState& state) {
  Eigen::VectorXd w = state.weights.cwiseMax(1e-12);
  w /= w.sum();
  std::vector<GmmComponent> components;
  components.reserve(state.means.size());
  for (std::size_t k = 0; k < state.means.size(); ++k) {
    components.push_back(GmmComponent{w[static_cast<Eigen::Index>(k)],
                                      state.means[k], state.covs[k]});
  }
  return Gmm(std::move(components));
}

}  // namespace detail

/// Maximum-likelihood mixture fit: k-means++ seeding, EM until the
/// log-likelihood improves by less than kEmTol or kEmMaxIterations is hit,
/// best of kEmRestarts restarts.
inline EmResult em_fit(const Eigen::MatrixXd& X, int K, Rng& rng) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (K < 1) throw ValidationError("em: K must be >= 1");
  if (d < 1) throw ValidationError("em: points must have dimension >= 1");
  if (!X.allFinite()) throw ValidationError("em: non-finite training point");
  if (n < static_cast<Eigen::Index>(K) * (d + 1)) {
    throw ValidationError("em: need at least K*(d+1) = " +
                          std::to_string(static_cast<long long>(K) *
                                         (d + 1)) +
                          " points, got " + std::to_string(n));
  }

  EmResult best{Gmm({GmmComponent{
                    1.0, Eigen::VectorXd::Zero(d),
                    Eigen::MatrixXd::Identity(d, d)}}),
                -std::numeric_limits<double>::infinity(),
                {}};
  for (int restart = 0; restart < kEmRestarts; ++restart) {
    detail::MixtureState state = detail::initial_state(X, K, rng);
    std::vector<double> path;
    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < kEmMaxIterations; ++it) {
      Eigen::MatrixXd logp = detail::component_log_densities(X, state);
      Eigen::MatrixXd resp;
      double loglik = detail::e_step(logp, resp);
      path.push_back(loglik);
      if (loglik - prev < kEmTol && it > 0) break;
      prev = loglik;
      detail::m_step(X, resp, state);
    }
    if (!path.empty() && path.back() > best.loglik) {
      best = EmResult{detail::to_gmm(state), path.back(), std::move(path)};
    }
  }
  return best;
}

struct ModelSelection {
  Gmm model;
  int k = 1;
  double loglik = 0.0;
  double bic = 0.0;
  std::vector<double> bic_sweep;  // BIC for K = 1..K_max (capped)
};

inline double bic_param_count(int K, Eigen::Index d) {
  const double dd = static_cast<double>(d);
  return static_cast<double>(K - 1) + K * dd + K * dd * (dd + 1.0) / 2.0;
}

/// Sweeps K = 1..K_max (capped so every fit meets the em_fit precondition)
/// and returns the minimum-BIC mixture.
inline ModelSelection select_model(const Eigen::MatrixXd& X, int K_max,
                                   Rng& rng) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (K_max < 1) throw ValidationError("select_model: K_max must be >= 1");
  if (n < 2 * (d + 1)) {
    throw ValidationError("select_model: need at least 2*(d+1) = " +
                          std::to_string(2 * (d + 1)) + " points, got " +
                          std::to_string(n));
  }
  const int cap = static_cast<int>(n / (d + 1));
  const int sweep_max = std::min(K_max, cap);

  ModelSelection chosen{Gmm({GmmComponent{
                            1.0, Eigen::VectorXd::Zero(d),
                            Eigen::MatrixXd::Identity(d, d)}}),
                        0, 0.0, std::numeric_limits<double>::infinity(),
                        {}};
  for (int K = 1; K <= sweep_max; ++K) {
    EmResult fit = em_fit(X, K, rng);
    double bic = -2.0 * fit.loglik +
                 bic_param_count(K, d) * std::log(static_cast<double>(n));
    chosen.bic_sweep.push_back(bic);
    if (bic < chosen.bic) {
      chosen.model = std::move(fit.model);
      chosen.k = K;
      chosen.loglik = fit.loglik;
      chosen.bic = bic;
    }
  }
  return chosen;
}

}  // namespace scengen::gmm

#endif  // SCENGEN_GMM_EM_HPP
