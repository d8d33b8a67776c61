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

#ifndef SCENGEN_GMM_LOW_COST_HPP
#define SCENGEN_GMM_LOW_COST_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "scengen/bo/space.hpp"
#include "scengen/error.hpp"
#include "scengen/format.hpp"
#include "scengen/gp/model.hpp"
#include "scengen/random.hpp"

namespace scengen::gmm {

constexpr int kMinProbes = 1000;
constexpr int kProbeChunk = 8192;
constexpr int kDefaultProbes = 100000;

/// Uniformly probes the box and keeps the points whose surrogate posterior
/// mean is at or below `threshold`; this is the training set for the
/// generative mixture. The surrogate must have been fitted on normalized
/// inputs. Returns survivors in original units, one per row.
inline Eigen::MatrixXd extract_low_cost_set(const gp::GpModel& model,
                                            const bo::ParameterSpace& space,
                                            double threshold, int probes,
                                            Rng& rng) {
  if (!(threshold > 0.0)) {
    throw ValidationError("low-cost set: threshold must be > 0");
  }
  if (probes < kMinProbes) {
    throw ValidationError("low-cost set: at least " +
                          std::to_string(kMinProbes) + " probes required");
  }
  if (model.dim() != space.size()) {
    throw ValidationError("low-cost set: surrogate dimension mismatch");
  }

  std::vector<Eigen::VectorXd> kept;
  int remaining = probes;
  while (remaining > 0) {
    const int chunk = std::min(remaining, kProbeChunk);
    remaining -= chunk;
    Eigen::MatrixXd pts(chunk, space.size());
    for (int i = 0; i < chunk; ++i) {
      pts.row(i) = space.sample_uniform(rng).transpose();
    }
    Eigen::VectorXd mean = model.predict_mean(space.normalize_rows(pts));
    for (int i = 0; i < chunk; ++i) {
      if (mean[i] <= threshold) kept.push_back(pts.row(i).transpose());
    }
  }

  const auto needed = 2 * (space.size() + 1);
  if (static_cast<Eigen::Index>(kept.size()) < needed) {
    throw NumericError(
        "low-cost set: only " + std::to_string(kept.size()) +
        " of " + std::to_string(probes) + " probes fell at or below " +
        format_double(threshold) + "; raise the threshold");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(kept.size()), space.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
  }
  return out;
}

}  // namespace scengen::gmm

#endif  // SCENGEN_GMM_LOW_COST_HPP
