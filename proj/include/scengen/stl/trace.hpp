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

#ifndef SCENGEN_STL_TRACE_HPP
#define SCENGEN_STL_TRACE_HPP

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scengen/error.hpp"

namespace scengen::stl {

/// Uniformly sampled record of named real-valued signals from one
/// simulation. Sample k lies at start_time + k * dt. All signals share the
/// same sampling grid and must be finite.
class Trace {
public:
  using SignalMap = std::map<std::string, std::vector<double>>;

  Trace(double dt, double start_time, SignalMap signals)
      : dt_(dt), start_(start_time), signals_(std::move(signals)) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
      throw ValidationError("trace: dt must be positive and finite");
    }
    if (!std::isfinite(start_)) {
      throw ValidationError("trace: start_time must be finite");
    }
    if (signals_.empty()) {
      throw ValidationError("trace: at least one signal required");
    }
    size_ = signals_.begin()->second.size();
    if (size_ == 0) {
      throw ValidationError("trace: signals need at least one sample");
    }
    for (const auto& [name, values] : signals_) {
      if (name.empty()) throw ValidationError("trace: empty signal name");
      if (values.size() != size_) {
        throw ValidationError("trace: signal '" + name + "' length mismatch");
      }
      for (double v : values) {
        if (!std::isfinite(v)) {
          throw ValidationError("trace: signal '" + name +
                                "' contains a non-finite value");
        }
      }
    }
  }

  double dt() const { return dt_; }
  double start_time() const { return start_; }
  double end_time() const {
    return start_ + static_cast<double>(size_ - 1) * dt_;
  }
  std::size_t size() const { return size_; }

  bool has(const std::string& name) const {
    return signals_.find(name) != signals_.end();
  }

  const std::vector<double>& signal(const std::string& name) const {
    auto it = signals_.find(name);
    if (it == signals_.end()) {
      throw ValidationError("missing signal '" + name + "'");
    }
    return it->second;
  }

  const SignalMap& signals() const { return signals_; }

  friend bool operator==(const Trace& a, const Trace& b) {
    return a.dt_ == b.dt_ && a.start_ == b.start_ && a.signals_ == b.signals_;
  }

private:
  double dt_;
  double start_;
  SignalMap signals_;
  std::size_t size_;
};

}  // namespace scengen::stl

#endif  // SCENGEN_STL_TRACE_HPP
