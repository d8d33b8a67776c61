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

#ifndef SCENGEN_SIM_GRIEWANK_HPP
#define SCENGEN_SIM_GRIEWANK_HPP

#include <Eigen/Dense>
#include <cmath>

#include "scengen/error.hpp"

namespace scengen::sim {

/// Griewank benchmark: f(x) = 1 + sum(x_i^2)/4000 - prod(cos(x_i / sqrt(i))),
/// i counted from 1. Global minimum f(0) = 0; many local minima elsewhere.
inline double griewank(const Eigen::VectorXd& x) {
  if (x.size() < 1) throw ValidationError("griewank: needs at least 1 dim");
  double quad = 0.0;
  double osc = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    quad += x[i] * x[i];
    osc *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return 1.0 + quad / 4000.0 - osc;
}

}  // namespace scengen::sim

#endif  // SCENGEN_SIM_GRIEWANK_HPP
