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

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "scengen/error.hpp"
#include "scengen/format.hpp"
#include "scengen/pipeline/pipeline.hpp"
#include "scengen/scenario/scenario.hpp"
#include "scengen/sim/batch.hpp"

namespace fs = std::filesystem;
namespace pipeline = scengen::pipeline;

namespace {

scengen::scenario::LogicalScenario load_scenario_arg(const std::string& arg) {
  fs::path path(arg);
  if (fs::is_directory(path)) path /= pipeline::kScenarioFile;
  return scengen::scenario::load_logical(pipeline::read_text(path));
}

void print_eval_summary(const pipeline::EvalSummary& summary) {
  std::printf("evaluate[%s]: n=%d", summary.distribution.c_str(), summary.n);
  if (summary.n > 0) {
    std::printf(", conformity rate %s, mean cost %s, errors %d",
                scengen::format_double(summary.conformity_rate).c_str(),
                scengen::format_double(summary.mean_cost).c_str(),
                summary.errors);
  }
  std::printf("\n");
}

void print_report(const nlohmann::json& report) {
  for (const char* dist : {"gmm", "uniform"}) {
    const auto& block = report.at(dist);
    std::printf("%s: n=%d, conformity rate %s, mean cost %s\n", dist,
                block.at("n").get<int>(),
                scengen::format_double(
                    block.at("conformity_rate").get<double>())
                    .c_str(),
                scengen::format_double(block.at("mean_cost").get<double>())
                    .c_str());
  }
  const auto& ratio = report.at("conformity_ratio");
  if (ratio.is_null()) {
    std::printf("conformity ratio: undefined (uniform rate is 0)\n");
  } else {
    std::printf("conformity ratio: %s\n",
                scengen::format_double(ratio.get<double>()).c_str());
  }
}

struct OptimizeArgs {
  std::string scenario_path;
  std::string out;
  pipeline::OptimizeOptions opt;
  bool random_init = false;
};

struct FitArgs {
  std::string run_dir;
  pipeline::FitGmmOptions opt;
};

struct SampleArgs {
  std::string scenario_path;
  std::string out;
  std::string distribution = "gmm";
  int n = 100;
  std::uint64_t seed = 0;
};

struct EvaluateArgs {
  std::string run_dir;
  pipeline::EvaluateOptions opt;
};

struct DemoArgs {
  std::string out;
  pipeline::GriewankDemoOptions opt;
};

int cmd_optimize(const OptimizeArgs& args) {
  pipeline::OptimizeOptions opt = args.opt;
  opt.raster_init = !args.random_init;
  auto scenario = load_scenario_arg(args.scenario_path);
  auto summary = pipeline::run_optimize(scenario, args.out, opt);
  std::printf("optimize: %zu evaluations in %d iterations%s\n",
              summary.run.history.size(), summary.run.iterations_run,
              summary.run.converged ? " (converged)" : "");
  std::printf("best cost %s at",
              scengen::format_double(summary.run.best_cost).c_str());
  for (Eigen::Index j = 0; j < scenario.parameters.size(); ++j) {
    std::printf(" %s=%s", scenario.parameters[j].name.c_str(),
                scengen::format_double(summary.run.best_point[j]).c_str());
  }
  std::printf("\nrun directory: %s\n", args.out.c_str());
  return 0;
}

int cmd_fit_gmm(const FitArgs& args) {
  auto result = pipeline::run_fit_gmm(args.run_dir, args.opt);
  std::printf(
      "fit-gmm: %lld survivors below threshold %s, fitted %d component%s "
      "(BIC %s)\n",
      static_cast<long long>(result.survivors),
      scengen::format_double(args.opt.threshold).c_str(),
      result.selection.k, result.selection.k == 1 ? "" : "s",
      scengen::format_double(result.selection.bic).c_str());
  std::printf("updated scenario: %s\n",
              (fs::path(args.run_dir) / pipeline::kScenarioFile).c_str());
  return 0;
}

int cmd_sample(const SampleArgs& args) {
  auto scenario = load_scenario_arg(args.scenario_path);
  auto doc =
      pipeline::run_sample(scenario, args.distribution, args.n, args.seed);
  const std::string text = doc.dump(2) + "\n";
  if (args.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    pipeline::write_text(args.out, text);
    std::printf("sample: wrote %d %s draw%s to %s\n", args.n,
                args.distribution.c_str(), args.n == 1 ? "" : "s",
                args.out.c_str());
  }
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args) {
  auto summary = pipeline::run_evaluate(args.run_dir, args.opt);
  print_eval_summary(summary);
  return 0;
}

int cmd_compare(const std::string& run_dir) {
  auto report = pipeline::run_compare(run_dir);
  print_report(report);
  std::printf("report: %s\n",
              (fs::path(run_dir) / pipeline::kReportFile).c_str());
  return 0;
}

int cmd_demo(const DemoArgs& args) {
  auto report = pipeline::run_griewank_demo(args.out, args.opt);
  print_report(report);
  std::printf("run directory: %s\n", args.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  scengen::sim::register_builtin_templates();

  CLI::App app{
      "scengen: learn scenario-parameter distributions whose samples "
      "satisfy an STL outcome specification"};
  app.require_subcommand(1);

  OptimizeArgs optimize;
  auto* opt_cmd = app.add_subcommand(
      "optimize", "Run batch Thompson-sampling optimization of the STL cost");
  opt_cmd->add_option("scenario", optimize.scenario_path,
                      "Logical scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  opt_cmd->add_option("--out", optimize.out, "Run directory to create")
      ->required();
  opt_cmd->add_option("--spec", optimize.opt.spec_name,
                      "Outcome spec name (default: first in the document)");
  opt_cmd->add_option("--init", optimize.opt.init, "Initial design size");
  opt_cmd->add_option("--iters", optimize.opt.iters, "Optimization iterations");
  opt_cmd->add_option("--batch", optimize.opt.batch,
                      "Thompson samples per iteration");
  opt_cmd->add_option("--pool", optimize.opt.pool,
                      "Candidate pool per Thompson draw");
  opt_cmd->add_flag("--random-init", optimize.random_init,
                    "Draw the initial design uniformly instead of rasterizing");
  opt_cmd->add_option("--tol", optimize.opt.convergence_tol,
                      "Convergence tolerance on the running best cost");
  opt_cmd->add_option(
      "--window", optimize.opt.convergence_window,
      "Stop after this many stagnant iterations (0: run the full budget)");
  opt_cmd->add_option("--seed", optimize.opt.seed, "Random seed");
  opt_cmd->add_option("--workers", optimize.opt.workers,
                      "Parallel simulation workers");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand(
      "fit-gmm", "Fit a Gaussian mixture to the low-cost parameter region");
  fit_cmd->add_option("rundir", fit.run_dir, "Run directory from optimize")
      ->required()
      ->check(CLI::ExistingDirectory);
  fit_cmd->add_option("--threshold", fit.opt.threshold,
                      "Surrogate cost threshold for the low-cost set");
  fit_cmd->add_option("--probes", fit.opt.probes,
                      "Uniform probes of the surrogate");
  fit_cmd->add_option("--max-components", fit.opt.max_components,
                      "Largest mixture size tried by BIC selection");
  fit_cmd->add_option("--fit-points", fit.opt.max_fit_points,
                      "Subsample cap on EM training points");
  fit_cmd->add_option("--seed", fit.opt.seed, "Random seed");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand(
      "sample", "Draw parameter points from a scenario distribution");
  sample_cmd->add_option("scenario", sample.scenario_path,
                         "Scenario JSON file or run directory")
      ->required();
  sample_cmd->add_option("--distribution", sample.distribution,
                         "gmm or uniform")
      ->check(CLI::IsMember({"gmm", "uniform"}));
  sample_cmd->add_option("--n", sample.n, "Number of draws");
  sample_cmd->add_option("--seed", sample.seed, "Random seed");
  sample_cmd->add_option("--out", sample.out,
                         "Output file (default: stdout)");

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Simulate sampled scenarios and summarize conformity");
  eval_cmd->add_option("rundir", evaluate.run_dir, "Run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--distribution", evaluate.opt.distribution,
                       "gmm or uniform")
      ->check(CLI::IsMember({"gmm", "uniform"}));
  eval_cmd->add_option("--spec", evaluate.opt.spec_name,
                       "Outcome spec name (default: the optimized spec)");
  eval_cmd->add_option("--n", evaluate.opt.n, "Number of scenarios");
  eval_cmd->add_option("--seed", evaluate.opt.seed, "Random seed");
  eval_cmd->add_option("--workers", evaluate.opt.workers,
                       "Parallel simulation workers");

  std::string compare_dir;
  auto* compare_cmd = app.add_subcommand(
      "compare", "Write the gmm-vs-uniform comparison report and plot data");
  compare_cmd->add_option("rundir", compare_dir, "Run directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand(
      "griewank-demo",
      "Run the 2-D Griewank benchmark pipeline end to end");
  demo_cmd->add_option("--out", demo.out, "Run directory to create")
      ->required();
  demo_cmd->add_option("--seed", demo.opt.seed, "Random seed");
  demo_cmd->add_option("--workers", demo.opt.workers,
                       "Parallel simulation workers");
  demo_cmd->add_option("--init", demo.opt.init, "Initial design size");
  demo_cmd->add_option("--iters", demo.opt.iters, "Optimization iterations");
  demo_cmd->add_option("--batch", demo.opt.batch,
                       "Thompson samples per iteration");
  demo_cmd->add_option("--pool", demo.opt.pool,
                       "Candidate pool per Thompson draw");
  demo_cmd->add_option("--threshold", demo.opt.threshold,
                       "Surrogate cost threshold for the low-cost set");
  demo_cmd->add_option("--probes", demo.opt.probes,
                       "Uniform probes of the surrogate");
  demo_cmd->add_option("--max-components", demo.opt.max_components,
                       "Largest mixture size tried by BIC selection");
  demo_cmd->add_option("--n", demo.opt.n, "Evaluation samples per set");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*opt_cmd) return cmd_optimize(optimize);
    if (*fit_cmd) return cmd_fit_gmm(fit);
    if (*sample_cmd) return cmd_sample(sample);
    if (*eval_cmd) return cmd_evaluate(evaluate);
    if (*compare_cmd) return cmd_compare(compare_dir);
    if (*demo_cmd) return cmd_demo(demo);
  } catch (const scengen::ValidationError& e) {
    std::fprintf(stderr, "scengen: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "scengen: %s\n", e.what());
    return 2;
  }
  return 1;
}
