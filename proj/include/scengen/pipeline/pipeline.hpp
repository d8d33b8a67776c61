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

#ifndef SCENGEN_PIPELINE_PIPELINE_HPP
#define SCENGEN_PIPELINE_PIPELINE_HPP

#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "scengen/bo/bo.hpp"
#include "scengen/error.hpp"
#include "scengen/gmm/em.hpp"
#include "scengen/gmm/low_cost.hpp"
#include "scengen/pipeline/artifacts.hpp"
#include "scengen/random.hpp"
#include "scengen/scenario/scenario.hpp"
#include "scengen/sim/batch.hpp"
#include "scengen/sim/trace_store.hpp"

namespace scengen::pipeline {

namespace detail {

inline const scenario::OutcomeSpec& resolve_spec(
    const scenario::LogicalScenario& sc, const std::string& name) {
  if (sc.specs.empty()) {
    throw ValidationError("scenario '" + sc.name + "' declares no specs");
  }
  if (!name.empty()) return sc.spec(name);
  return sc.specs.front();
}

/// Evaluate defaults to the spec the run was optimized for, then to the
/// first spec in the document.
inline const scenario::OutcomeSpec& resolve_eval_spec(
    const scenario::LogicalScenario& sc, const std::string& name,
    const std::filesystem::path& run_dir) {
  if (!name.empty() || sc.specs.empty()) return resolve_spec(sc, name);
  const auto summary_path = run_dir / kSummaryFile;
  if (std::filesystem::exists(summary_path)) {
    nlohmann::json summary = read_json(summary_path);
    if (summary.contains("spec")) {
      return sc.spec(summary.at("spec").get<std::string>());
    }
  }
  return sc.specs.front();
}

inline std::vector<scenario::ConcreteScenario> to_concrete(
    const scenario::LogicalScenario& sc,
    const std::vector<Eigen::VectorXd>& points) {
  std::vector<scenario::ConcreteScenario> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    scenario::ConcreteScenario c;
    c.scenario = sc.name;
    c.index = static_cast<int>(i);
    for (Eigen::Index j = 0; j < sc.parameters.size(); ++j) {
      c.values[sc.parameters[j].name] = points[i][j];
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Scenario view with the requested sampling distribution. "uniform" is
/// always available (the parameter box itself); "gmm" requires a fitted
/// distribution block.
inline scenario::LogicalScenario with_distribution(
    scenario::LogicalScenario sc, const std::string& distribution) {
  if (distribution == "uniform") {
    sc.distribution = scenario::Distribution{};
    sc.distribution.type = scenario::DistributionType::Uniform;
    return sc;
  }
  if (distribution == "gmm") {
    if (sc.distribution.type != scenario::DistributionType::Gmm) {
      throw ValidationError("scenario '" + sc.name +
                            "' has no fitted gmm distribution; run fit-gmm "
                            "first");
    }
    return sc;
  }
  throw ValidationError("unknown distribution '" + distribution +
                        "' (expected gmm or uniform)");
}

}  // namespace detail

inline scenario::LogicalScenario load_run_scenario(
    const std::filesystem::path& run_dir) {
  return scenario::load_logical(read_text(run_dir / kScenarioFile));
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeOptions {
  std::string spec_name;  // empty: first spec in the document
  int init = 64;
  int iters = 6;
  int batch = 10;
  int pool = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
  bool raster_init = true;
  double convergence_tol = 1e-3;
  // The CLI default runs the full iteration budget; set a positive window to
  // stop once the running best stagnates for that many iterations.
  int convergence_window = 0;
};

struct OptimizeSummary {
  bo::BoRun run;
  std::string spec_name;
};

inline OptimizeSummary run_optimize(const scenario::LogicalScenario& input,
                                    const std::filesystem::path& run_dir,
                                    const OptimizeOptions& opt) {
  if (opt.workers < 1) {
    throw ValidationError("optimize: workers must be >= 1");
  }
  std::filesystem::create_directories(run_dir);
  const scenario::OutcomeSpec& spec =
      detail::resolve_spec(input, opt.spec_name);
  write_text(run_dir / kScenarioFile, scenario::save_logical(input));

  sim::TraceStore store(run_dir / kStoreDir);
  int calls = 0;
  auto evaluate = [&](const std::vector<Eigen::VectorXd>& points) {
    auto concrete = detail::to_concrete(input, points);
    auto results =
        sim::run_batch(concrete, input.template_id, spec.formula,
                       opt.workers, store, "opt" + std::to_string(calls++));
    std::vector<double> costs;
    costs.reserve(results.size());
    for (const sim::BatchResult& r : results) {
      if (!r.ok()) throw NumericError("simulation failed: " + r.status);
      costs.push_back(r.cost);
    }
    return costs;
  };

  bo::BoConfig config;
  config.init_mode = opt.raster_init ? bo::BoConfig::InitMode::Raster
                                     : bo::BoConfig::InitMode::Random;
  config.init_count = opt.init;
  config.batch_size = opt.batch;
  config.max_iterations = opt.iters;
  config.candidate_pool = opt.pool;
  config.convergence_tol = opt.convergence_tol;
  config.convergence_window =
      opt.convergence_window >= 1 ? opt.convergence_window : opt.iters + 1;
  config.seed = opt.seed;

  bo::BoRun run = bo::run_bo(evaluate, input.parameters, config);

  save_history_csv(run_dir / kHistoryFile, input.parameters, run.history);
  save_gp_model(run_dir / kGpModelFile, run.final_model, input.parameters);

  nlohmann::ordered_json summary;
  summary["scenario"] = input.name;
  summary["template"] = input.template_id;
  summary["spec"] = spec.name;
  summary["seed"] = opt.seed;
  summary["init"] = opt.init;
  summary["batch"] = opt.batch;
  summary["iterations_requested"] = opt.iters;
  summary["iterations_run"] = run.iterations_run;
  summary["converged"] = run.converged;
  summary["evaluations"] = run.history.size();
  summary["best_cost"] = run.best_cost;
  summary["best_point"] = nlohmann::ordered_json::object();
  for (Eigen::Index j = 0; j < input.parameters.size(); ++j) {
    summary["best_point"][input.parameters[j].name] = run.best_point[j];
  }
  summary["hyper"] = {
      {"signal_variance", run.final_model.hyper().signal_variance},
      {"lengthscales", nlohmann::json::array()}};
  for (Eigen::Index j = 0; j < run.final_model.hyper().lengthscales.size();
       ++j) {
    summary["hyper"]["lengthscales"].push_back(
        run.final_model.hyper().lengthscales[j]);
  }
  write_text(run_dir / kSummaryFile, summary.dump(2) + "\n");
  return OptimizeSummary{std::move(run), spec.name};
}

// ---------------------------------------------------------------------------
// fit-gmm

struct FitGmmOptions {
  double threshold = 1.0;
  int probes = gmm::kDefaultProbes;
  int max_components = 8;
  // EM cost grows with the survivor count; larger sets are subsampled to
  // this many points before fitting.
  int max_fit_points = 2000;
  std::uint64_t seed = 0;
};

struct FitGmmSummary {
  gmm::ModelSelection selection;
  Eigen::Index survivors = 0;
  Eigen::Index fit_points = 0;
};

inline FitGmmSummary run_fit_gmm(const std::filesystem::path& run_dir,
                                 const FitGmmOptions& opt) {
  if (opt.max_components < 1) {
    throw ValidationError("fit-gmm: max components must be >= 1");
  }
  if (opt.max_fit_points < 2) {
    throw ValidationError("fit-gmm: max fit points must be >= 2");
  }
  scenario::LogicalScenario sc = load_run_scenario(run_dir);
  StoredGpModel stored = load_gp_model(run_dir / kGpModelFile);
  for (Eigen::Index j = 0; j < sc.parameters.size(); ++j) {
    if (stored.space.size() != sc.parameters.size() ||
        stored.space[j].name != sc.parameters[j].name) {
      throw ValidationError(
          "fit-gmm: stored surrogate does not match the scenario parameters");
    }
  }

  Rng rng(opt.seed);
  Eigen::MatrixXd survivors = gmm::extract_low_cost_set(
      stored.model, stored.space, opt.threshold, opt.probes, rng);

  Eigen::MatrixXd fit_points = survivors;
  if (survivors.rows() > opt.max_fit_points) {
    // Partial Fisher-Yates: the first max_fit_points rows become a uniform
    // subsample.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(survivors.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      idx[i] = static_cast<Eigen::Index>(i);
    }
    for (int i = 0; i < opt.max_fit_points; ++i) {
      const auto remaining = static_cast<double>(idx.size() - i);
      auto pick = static_cast<std::size_t>(
          static_cast<double>(i) + rng.uniform01() * remaining);
      pick = std::min(pick, idx.size() - 1);
      std::swap(idx[static_cast<std::size_t>(i)], idx[pick]);
    }
    fit_points.resize(opt.max_fit_points, survivors.cols());
    for (int i = 0; i < opt.max_fit_points; ++i) {
      fit_points.row(i) = survivors.row(idx[static_cast<std::size_t>(i)]);
    }
  }

  gmm::ModelSelection selection =
      gmm::select_model(fit_points, opt.max_components, rng);

  scenario::LogicalScenario updated =
      scenario::attach_distribution(sc, selection.model);
  write_text(run_dir / kScenarioFile, scenario::save_logical(updated));

  nlohmann::ordered_json fit;
  fit["threshold"] = opt.threshold;
  fit["probes"] = opt.probes;
  fit["seed"] = opt.seed;
  fit["survivors"] = survivors.rows();
  fit["fit_points"] = fit_points.rows();
  fit["components"] = selection.k;
  fit["loglik"] = selection.loglik;
  fit["bic"] = selection.bic;
  fit["bic_sweep"] = selection.bic_sweep;
  write_text(run_dir / kFitFile, fit.dump(2) + "\n");

  return FitGmmSummary{std::move(selection), survivors.rows(),
                       fit_points.rows()};
}

// ---------------------------------------------------------------------------
// sample

/// Draws parameter points without simulating them.
inline nlohmann::json run_sample(const scenario::LogicalScenario& sc,
                                 const std::string& distribution, int n,
                                 std::uint64_t seed) {
  scenario::LogicalScenario view = detail::with_distribution(sc, distribution);
  Rng rng(seed);
  auto concrete = scenario::concretize(view, n, rng);
  nlohmann::ordered_json doc;
  doc["scenario"] = sc.name;
  doc["distribution"] = distribution;
  doc["n"] = n;
  doc["samples"] = nlohmann::ordered_json::array();
  for (const scenario::ConcreteScenario& c : concrete) {
    nlohmann::ordered_json row;
    for (Eigen::Index j = 0; j < sc.parameters.size(); ++j) {
      row[sc.parameters[j].name] = c.value(sc.parameters[j].name);
    }
    doc["samples"].push_back(std::move(row));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string spec_name;  // empty: spec recorded by optimize, else first
  std::string distribution = "gmm";
  int n = 200;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct EvalSummary {
  std::string distribution;
  int n = 0;
  int errors = 0;
  double conformity_rate = 0.0;  // conforming / n; errors never conform
  double mean_cost = 0.0;        // over successful runs
  nlohmann::json doc;            // the eval_<distribution>.json contents
};

inline EvalSummary run_evaluate(const std::filesystem::path& run_dir,
                                const EvaluateOptions& opt) {
  if (opt.n < 0) throw ValidationError("evaluate: n must be >= 0");
  if (opt.workers < 1) {
    throw ValidationError("evaluate: workers must be >= 1");
  }
  scenario::LogicalScenario sc = load_run_scenario(run_dir);
  const scenario::OutcomeSpec& spec =
      detail::resolve_eval_spec(sc, opt.spec_name, run_dir);
  scenario::LogicalScenario view =
      detail::with_distribution(sc, opt.distribution);

  Rng rng(opt.seed);
  auto concrete = scenario::concretize(view, opt.n, rng);
  sim::TraceStore store(run_dir / kStoreDir);
  // Re-evaluation (say, after refitting with a new threshold) must not
  // collide with run ids from an earlier pass, so bump a suffix until free.
  std::string prefix = "eval-" + opt.distribution;
  for (int attempt = 2; store.has_run(prefix + "-0"); ++attempt) {
    prefix = "eval-" + opt.distribution + "-r" + std::to_string(attempt);
  }
  auto results = sim::run_batch(concrete, sc.template_id, spec.formula,
                                opt.workers, store, prefix);

  EvalSummary summary;
  summary.distribution = opt.distribution;
  summary.n = opt.n;
  int conforming = 0;
  int ok_count = 0;
  double cost_sum = 0.0;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const sim::BatchResult& r = results[i];
    if (r.ok()) {
      ++ok_count;
      cost_sum += r.cost;
      if (r.cost == 0.0) ++conforming;
    } else {
      ++summary.errors;
    }
    nlohmann::ordered_json row;
    row["run_id"] = prefix + "-" + std::to_string(i);
    row["params"] = nlohmann::ordered_json::object();
    for (Eigen::Index j = 0; j < sc.parameters.size(); ++j) {
      row["params"][sc.parameters[j].name] =
          concrete[i].value(sc.parameters[j].name);
    }
    row["cost"] = r.cost;
    row["robustness"] = r.robustness;
    row["status"] = r.status;
    runs.push_back(std::move(row));
  }
  summary.conformity_rate =
      opt.n > 0 ? static_cast<double>(conforming) / opt.n : 0.0;
  summary.mean_cost = ok_count > 0 ? cost_sum / ok_count : 0.0;

  nlohmann::ordered_json doc;
  doc["scenario"] = sc.name;
  doc["spec"] = spec.name;
  doc["distribution"] = opt.distribution;
  doc["seed"] = opt.seed;
  doc["n"] = opt.n;
  doc["errors"] = summary.errors;
  if (opt.n > 0) {
    doc["conformity_rate"] = summary.conformity_rate;
    doc["mean_cost"] = summary.mean_cost;
  }
  doc["runs"] = std::move(runs);
  summary.doc = doc;
  write_text(run_dir / eval_file(opt.distribution), doc.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------
// compare

inline constexpr int kHistogramBins = 20;

/// Builds the comparison report and plot data from the stored gmm and
/// uniform evaluations. Pure function of the artifacts: re-running it
/// rewrites identical files.
inline nlohmann::json run_compare(const std::filesystem::path& run_dir) {
  scenario::LogicalScenario sc = load_run_scenario(run_dir);
  nlohmann::json evals[2];
  const std::string names[2] = {"gmm", "uniform"};
  for (int s = 0; s < 2; ++s) {
    const auto path = run_dir / eval_file(names[s]);
    if (!std::filesystem::exists(path)) {
      throw ValidationError("compare: missing evaluation set '" + names[s] +
                            "' (" + path.string() + ")");
    }
    evals[s] = read_json(path);
    if (evals[s].at("n").get<int>() < 1) {
      throw ValidationError("compare: evaluation set '" + names[s] +
                            "' is empty");
    }
  }

  // Recompute the headline numbers from the per-run records.
  double rates[2];
  double means[2];
  int errors[2];
  std::vector<double> costs[2];
  for (int s = 0; s < 2; ++s) {
    const auto& runs = evals[s].at("runs");
    const int n = evals[s].at("n").get<int>();
    int conforming = 0;
    int ok_count = 0;
    double cost_sum = 0.0;
    errors[s] = 0;
    for (const auto& run : runs) {
      if (run.at("status").get<std::string>() != "ok") {
        ++errors[s];
        continue;
      }
      const double cost = run.at("cost").get<double>();
      costs[s].push_back(cost);
      ++ok_count;
      cost_sum += cost;
      if (cost == 0.0) ++conforming;
    }
    rates[s] = static_cast<double>(conforming) / n;
    means[s] = ok_count > 0 ? cost_sum / ok_count : 0.0;
  }

  double max_cost = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (double c : costs[s]) max_cost = std::max(max_cost, c);
  }
  const double hist_hi = max_cost > 0.0 ? max_cost : 1.0;
  std::vector<double> edges(kHistogramBins + 1);
  for (int b = 0; b <= kHistogramBins; ++b) {
    edges[static_cast<std::size_t>(b)] = hist_hi * b / kHistogramBins;
  }
  std::vector<int> hist[2];
  for (int s = 0; s < 2; ++s) {
    hist[s].assign(kHistogramBins, 0);
    for (double c : costs[s]) {
      auto bin = static_cast<int>(std::floor(c / hist_hi * kHistogramBins));
      bin = std::clamp(bin, 0, kHistogramBins - 1);
      ++hist[s][static_cast<std::size_t>(bin)];
    }
  }

  nlohmann::ordered_json report;
  report["scenario"] = sc.name;
  report["spec"] = evals[0].at("spec");
  for (int s = 0; s < 2; ++s) {
    report[names[s]] = {{"n", evals[s].at("n")},
                        {"conformity_rate", rates[s]},
                        {"mean_cost", means[s]},
                        {"errors", errors[s]}};
  }
  if (rates[0] == rates[1]) {
    report["conformity_ratio"] = 1.0;
  } else if (rates[1] == 0.0) {
    // Division by a zero baseline: leave the ratio undefined.
    report["conformity_ratio"] = nullptr;
  } else {
    report["conformity_ratio"] = rates[0] / rates[1];
  }
  report["cost_histogram"] = {
      {"edges", edges}, {"gmm", hist[0]}, {"uniform", hist[1]}};
  write_text(run_dir / kReportFile, report.dump(2) + "\n");

  // Columnar plot data: parameter scatter colored by cost, plus the shared
  // cost histogram.
  for (int s = 0; s < 2; ++s) {
    std::ostringstream out;
    for (Eigen::Index j = 0; j < sc.parameters.size(); ++j) {
      out << sc.parameters[j].name << ",";
    }
    out << "cost,robustness\n";
    for (const auto& run : evals[s].at("runs")) {
      if (run.at("status").get<std::string>() != "ok") continue;
      for (Eigen::Index j = 0; j < sc.parameters.size(); ++j) {
        out << format_double(
                   run.at("params").at(sc.parameters[j].name).get<double>())
            << ",";
      }
      out << format_double(run.at("cost").get<double>()) << ","
          << format_double(run.at("robustness").get<double>()) << "\n";
    }
    write_text(run_dir / kPlotsDir / ("scatter_" + names[s] + ".csv"),
               out.str());
  }
  {
    std::ostringstream out;
    out << "bin_lo,bin_hi,gmm,uniform\n";
    for (int b = 0; b < kHistogramBins; ++b) {
      out << format_double(edges[static_cast<std::size_t>(b)]) << ","
          << format_double(edges[static_cast<std::size_t>(b + 1)]) << ","
          << hist[0][static_cast<std::size_t>(b)] << ","
          << hist[1][static_cast<std::size_t>(b)] << "\n";
    }
    write_text(run_dir / kPlotsDir / "cost_histogram.csv", out.str());
  }
  return report;
}

// ---------------------------------------------------------------------------
// griewank demo

struct GriewankDemoOptions {
  std::uint64_t seed = 0;
  int workers = 1;
  int init = 11;
  int iters = 8;
  int batch = 5;
  int pool = 1000;
  double threshold = 0.25;
  int probes = gmm::kDefaultProbes;
  int max_components = 8;
  int n = 500;
};

/// The end-to-end 2-D Griewank benchmark: optimize on [-5, 5]^2, fit the
/// mixture below the surrogate threshold, then evaluate mixture vs uniform
/// samples and write the comparison report.
inline nlohmann::json run_griewank_demo(const std::filesystem::path& run_dir,
                                        const GriewankDemoOptions& opt) {
  sim::register_builtin_templates();
  const std::string doc = R"json({
  "name": "griewank-2d",
  "template": "griewank",
  "parameters": [
    {"name": "x1", "range": [-5.0, 5.0]},
    {"name": "x2", "range": [-5.0, 5.0]}
  ],
  "specs": [
    {"name": "spec1", "stl": "0 - value > 0"}
  ]
})json";
  scenario::LogicalScenario sc = scenario::load_logical(doc);

  OptimizeOptions optimize;
  optimize.spec_name = "spec1";
  optimize.init = opt.init;
  optimize.iters = opt.iters;
  optimize.batch = opt.batch;
  optimize.pool = opt.pool;
  optimize.seed = opt.seed;
  optimize.workers = opt.workers;
  optimize.raster_init = false;
  run_optimize(sc, run_dir, optimize);

  FitGmmOptions fit;
  fit.threshold = opt.threshold;
  fit.probes = opt.probes;
  fit.max_components = opt.max_components;
  fit.seed = opt.seed;
  run_fit_gmm(run_dir, fit);

  EvaluateOptions evaluate;
  evaluate.spec_name = "spec1";
  evaluate.n = opt.n;
  evaluate.seed = opt.seed;
  evaluate.workers = opt.workers;
  evaluate.distribution = "gmm";
  run_evaluate(run_dir, evaluate);
  evaluate.distribution = "uniform";
  run_evaluate(run_dir, evaluate);

  return run_compare(run_dir);
}

}  // namespace scengen::pipeline

#endif  // SCENGEN_PIPELINE_PIPELINE_HPP
