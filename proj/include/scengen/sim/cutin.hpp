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

#ifndef SCENGEN_SIM_CUTIN_HPP
#define SCENGEN_SIM_CUTIN_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/stl/trace.hpp"

namespace scengen::sim {

/// Highway cut-in: the ego drives at constant speed in lane 0 while
/// vehicle 1 approaches in the left lane and merges in front of (or behind)
/// the ego after a trigger time. All geometry knobs are configurable; the
/// defaults are ordinary highway values.
struct CutinConfig {
  double ego_s0 = 1000.0;           // m
  double ego_v = 16.667;            // m/s
  double lane_width = 3.5;          // m, lane 0 center = 0, left positive
  double lanechange_duration = 3.0; // s
  double dt = 0.05;                 // s
  double horizon = 20.0;            // s
  double ttc_cap = 100.0;           // s
  bool dv_is_ratio = true;          // dV scales ego speed; else adds m/s

  void validate() const {
    if (!std::isfinite(ego_s0) || !std::isfinite(ego_v) ||
        !std::isfinite(lane_width) || !std::isfinite(lanechange_duration) ||
        !std::isfinite(dt) || !std::isfinite(horizon) ||
        !std::isfinite(ttc_cap)) {
      throw ValidationError("cutin: non-finite configuration value");
    }
    if (!(dt > 0.0)) throw ValidationError("cutin: dt must be > 0");
    if (!(lanechange_duration > 0.0)) {
      throw ValidationError("cutin: lane-change duration must be > 0");
    }
    if (horizon < lanechange_duration) {
      throw ValidationError(
          "cutin: horizon must cover the lane-change duration");
    }
    if (!(ttc_cap > 0.0)) throw ValidationError("cutin: ttc cap must be > 0");
    if (!(lane_width > 0.0)) {
      throw ValidationError("cutin: lane width must be > 0");
    }
    if (ego_v < 0.0) throw ValidationError("cutin: ego speed must be >= 0");
  }
};

struct VehicleState {
  double s = 0.0;      // longitudinal position, m
  double d = 0.0;      // lateral position, m
  double v = 0.0;      // longitudinal speed, m/s
  double d_dot = 0.0;  // lateral speed, m/s
};

/// Smoothstep with zero velocity and acceleration at both ends.
inline double quintic_blend(double u) {
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

inline double quintic_blend_rate(double u) {
  return u * u * (30.0 + u * (-60.0 + 30.0 * u));
}

/// Time to collision from the full 2-D relative state: project the relative
/// velocity onto the separation direction; an opening or parallel course
/// maps to the cap, exact coincidence to 0.
inline double time_to_collision(const VehicleState& ego,
                                const VehicleState& other, double cap) {
  if (!std::isfinite(ego.s) || !std::isfinite(ego.d) ||
      !std::isfinite(ego.v) || !std::isfinite(ego.d_dot) ||
      !std::isfinite(other.s) || !std::isfinite(other.d) ||
      !std::isfinite(other.v) || !std::isfinite(other.d_dot)) {
    throw ValidationError("ttc: non-finite vehicle state");
  }
  if (!(cap > 0.0)) throw ValidationError("ttc: cap must be > 0");
  const double rs = other.s - ego.s;
  const double rd = other.d - ego.d;
  const double dist = std::sqrt(rs * rs + rd * rd);
  if (dist == 0.0) return 0.0;
  const double vs = other.v - ego.v;
  const double vd = other.d_dot - ego.d_dot;
  const double closing = -(rs * vs + rd * vd) / dist;
  if (closing <= 1e-6) return cap;
  return std::min(dist / closing, cap);
}

/// Vehicle 1's lateral position at time t for a maneuver that starts at
/// `trigger` and takes `duration` seconds to move from `width` to 0.
inline double cutin_lateral(double t, double trigger, double duration,
                            double width) {
  if (t <= trigger) return width;
  if (t >= trigger + duration) return 0.0;
  return width * (1.0 - quintic_blend((t - trigger) / duration));
}

inline double cutin_lateral_rate(double t, double trigger, double duration,
                                 double width) {
  if (t <= trigger || t >= trigger + duration) return 0.0;
  return -width * quintic_blend_rate((t - trigger) / duration) / duration;
}

/// Fixed-step simulation of the cut-in scenario. Signals: ttc, ds, dd,
/// ego_v, v1_v, sampled every config.dt from t = 0 to the horizon.
inline stl::Trace simulate_cutin(double dS, double dV, double T,
                                 const CutinConfig& config = CutinConfig{}) {
  config.validate();
  if (!std::isfinite(dS) || !std::isfinite(dV) || !std::isfinite(T)) {
    throw ValidationError("cutin: non-finite scenario parameter");
  }
  const double v1_speed =
      config.dv_is_ratio ? config.ego_v * dV : config.ego_v + dV;
  if (v1_speed < 0.0) {
    throw ValidationError("cutin: vehicle 1 speed would be negative");
  }

  const auto steps =
      static_cast<std::size_t>(std::floor(config.horizon / config.dt + 1e-9));
  std::vector<double> ttc(steps + 1), ds(steps + 1), dd(steps + 1);
  std::vector<double> ego_speed(steps + 1), v1_speed_sig(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    VehicleState ego;
    ego.s = config.ego_s0 + config.ego_v * t;
    ego.d = 0.0;
    ego.v = config.ego_v;
    ego.d_dot = 0.0;
    VehicleState v1;
    v1.s = config.ego_s0 + dS + v1_speed * t;
    v1.d = cutin_lateral(t, T, config.lanechange_duration, config.lane_width);
    v1.v = v1_speed;
    v1.d_dot =
        cutin_lateral_rate(t, T, config.lanechange_duration, config.lane_width);

    ttc[k] = time_to_collision(ego, v1, config.ttc_cap);
    ds[k] = v1.s - ego.s;
    dd[k] = v1.d - ego.d;
    ego_speed[k] = ego.v;
    v1_speed_sig[k] = v1.v;
  }

  stl::Trace::SignalMap signals;
  signals["ttc"] = std::move(ttc);
  signals["ds"] = std::move(ds);
  signals["dd"] = std::move(dd);
  signals["ego_v"] = std::move(ego_speed);
  signals["v1_v"] = std::move(v1_speed_sig);
  return stl::Trace(config.dt, 0.0, std::move(signals));
}

}  // namespace scengen::sim

#endif  // SCENGEN_SIM_CUTIN_HPP
