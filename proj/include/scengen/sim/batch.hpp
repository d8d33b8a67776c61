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

#ifndef SCENGEN_SIM_BATCH_HPP
#define SCENGEN_SIM_BATCH_HPP

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/scenario/scenario.hpp"
#include "scengen/sim/cutin.hpp"
#include "scengen/sim/griewank.hpp"
#include "scengen/sim/trace_store.hpp"
#include "scengen/stl/evaluate.hpp"
#include "scengen/stl/formula.hpp"

namespace scengen::sim {

struct BatchResult {
  int index = 0;
  double cost = 0.0;
  double robustness = 0.0;
  std::string status;  // "ok" or "error: <message>"

  bool ok() const { return status == "ok"; }
};

/// Simulates and monitors every scenario, dispatching to a bounded worker
/// pool. Results and manifest rows are merged in scenario order, so the
/// outcome is identical for any worker count. A failing scenario becomes an
/// error row; it never aborts the batch.
inline std::vector<BatchResult> run_batch(
    const std::vector<scenario::ConcreteScenario>& scenarios,
    const std::string& template_id, const stl::FormulaPtr& spec, int workers,
    TraceStore& store, const std::string& run_prefix = "run") {
  if (workers < 1) throw ValidationError("run_batch: workers must be >= 1");
  if (!spec) throw ValidationError("run_batch: null outcome spec");
  scenario::TemplateRegistry::Simulator simulator =
      scenario::TemplateRegistry::instance().get(template_id);

  const auto n = static_cast<int>(scenarios.size());
  std::vector<BatchResult> results(static_cast<std::size_t>(n));
  std::vector<ManifestRow> rows(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      const auto idx = static_cast<std::size_t>(i);
      const scenario::ConcreteScenario& sc = scenarios[idx];
      ManifestRow row;
      row.run_id = run_prefix + "-" + std::to_string(i);
      row.scenario = sc.scenario;
      row.params = sc.values;
      try {
        stl::Trace trace = simulator(sc);
        const double rho =
            stl::eval_robustness(spec, trace, trace.start_time());
        const double xi = stl::cost(spec, trace);
        row.trace_path = store.store_trace(row.run_id, trace);
        row.robustness = rho;
        row.cost = xi;
        row.status = "ok";
        results[idx] = BatchResult{i, xi, rho, "ok"};
      } catch (const std::exception& e) {
        row.robustness = nan;
        row.cost = nan;
        row.status = std::string("error: ") + e.what();
        row.trace_path.clear();
        results[idx] = BatchResult{i, nan, nan, row.status};
      }
      rows[idx] = std::move(row);
    }
  };

  if (n > 0) {
    const int pool = std::min(workers, n);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int w = 0; w < pool; ++w) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }

  for (const ManifestRow& row : rows) store.append_manifest(row);
  return results;
}

/// Registers the built-in simulator backends.
///
/// "cutin": expects parameters dS, dV, T; default CutinConfig geometry.
/// "griewank": one-sample trace with signal "value" holding the Griewank
/// value of the parameters taken in alphabetical name order.
inline void register_builtin_templates() {
  auto& registry = scenario::TemplateRegistry::instance();
  registry.add("cutin", [](const scenario::ConcreteScenario& sc) {
    return simulate_cutin(sc.value("dS"), sc.value("dV"), sc.value("T"));
  });
  registry.add("griewank", [](const scenario::ConcreteScenario& sc) {
    if (sc.values.empty()) {
      throw ValidationError("griewank template: no parameters");
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(sc.values.size()));
    Eigen::Index i = 0;
    for (const auto& [name, value] : sc.values) x[i++] = value;
    stl::Trace::SignalMap signals;
    signals["value"] = {griewank(x)};
    return stl::Trace(1.0, 0.0, std::move(signals));
  });
}

}  // namespace scengen::sim

#endif  // SCENGEN_SIM_BATCH_HPP
