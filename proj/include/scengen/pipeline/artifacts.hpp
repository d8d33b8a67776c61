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

#ifndef SCENGEN_PIPELINE_ARTIFACTS_HPP
#define SCENGEN_PIPELINE_ARTIFACTS_HPP

#include <json.hpp>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scengen/bo/bo.hpp"
#include "scengen/error.hpp"
#include "scengen/format.hpp"
#include "scengen/gp/model.hpp"

namespace scengen::pipeline {

// A run directory is self-contained: everything below lives inside it, so a
// report can be re-derived from the directory alone.
inline constexpr const char* kScenarioFile = "scenario.json";
inline constexpr const char* kHistoryFile = "bo_history.csv";
inline constexpr const char* kSummaryFile = "bo_summary.json";
inline constexpr const char* kGpModelFile = "gp_model.json";
inline constexpr const char* kFitFile = "gmm_fit.json";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kStoreDir = "store";
inline constexpr const char* kPlotsDir = "plots";

inline std::string eval_file(const std::string& distribution) {
  return "eval_" + distribution + ".json";
}

inline std::string samples_file(const std::string& distribution) {
  return "samples_" + distribution + ".json";
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw NumericError("cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out.good()) throw NumericError("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("missing file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("corrupt JSON in " + path.string() + ": " +
                          e.what());
  }
}

/// Persists the surrogate exactly: normalized training inputs, raw targets,
/// kernel hyperparameters, and the parameter box they refer to. Refitting on
/// these values reproduces the posterior bit for bit.
inline void save_gp_model(const std::filesystem::path& path,
                          const gp::GpModel& model,
                          const bo::ParameterSpace& space) {
  nlohmann::ordered_json doc;
  doc["space"] = nlohmann::ordered_json::array();
  for (const bo::Param& p : space.params()) {
    doc["space"].push_back(
        {{"name", p.name}, {"range", {p.lower, p.upper}}});
  }
  doc["hyper"] = {{"signal_variance", model.hyper().signal_variance},
                  {"lengthscales", nlohmann::json::array()}};
  for (Eigen::Index i = 0; i < model.hyper().lengthscales.size(); ++i) {
    doc["hyper"]["lengthscales"].push_back(model.hyper().lengthscales[i]);
  }
  doc["inputs_normalized"] = nlohmann::ordered_json::array();
  const Eigen::MatrixXd& X = model.train_inputs();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < X.cols(); ++j) row.push_back(X(i, j));
    doc["inputs_normalized"].push_back(std::move(row));
  }
  doc["targets"] = nlohmann::ordered_json::array();
  Eigen::VectorXd y = model.train_targets();
  for (Eigen::Index i = 0; i < y.size(); ++i) doc["targets"].push_back(y[i]);
  write_text(path, doc.dump(2) + "\n");
}

struct StoredGpModel {
  gp::GpModel model;
  bo::ParameterSpace space;
};

inline StoredGpModel load_gp_model(const std::filesystem::path& path) {
  nlohmann::json doc = read_json(path);
  try {
    std::vector<bo::Param> params;
    for (const auto& p : doc.at("space")) {
      params.push_back(bo::Param{p.at("name").get<std::string>(),
                                 p.at("range").at(0).get<double>(),
                                 p.at("range").at(1).get<double>()});
    }
    bo::ParameterSpace space(params);

    const auto& inputs = doc.at("inputs_normalized");
    const auto& targets = doc.at("targets");
    if (inputs.empty() || targets.size() != inputs.size()) {
      throw ValidationError("gp model file: input/target count mismatch");
    }
    Eigen::MatrixXd X(inputs.size(), space.size());
    Eigen::VectorXd y(targets.size());
    Eigen::Index i = 0;
    for (const auto& row : inputs) {
      if (static_cast<Eigen::Index>(row.size()) != space.size()) {
        throw ValidationError("gp model file: input row width mismatch");
      }
      for (Eigen::Index j = 0; j < space.size(); ++j) {
        X(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
      }
      ++i;
    }
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      y[k] = targets.at(static_cast<std::size_t>(k)).get<double>();
    }

    gp::KernelHyper hyper;
    hyper.signal_variance =
        doc.at("hyper").at("signal_variance").get<double>();
    const auto& ells = doc.at("hyper").at("lengthscales");
    hyper.lengthscales.resize(static_cast<Eigen::Index>(ells.size()));
    for (Eigen::Index k = 0; k < hyper.lengthscales.size(); ++k) {
      hyper.lengthscales[k] = ells.at(static_cast<std::size_t>(k)).get<double>();
    }
    return StoredGpModel{gp::GpModel::fit(X, y, hyper), std::move(space)};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("gp model file " + path.string() +
                          " is malformed: " + e.what());
  }
}

/// One row per evaluation in original parameter units:
/// iteration,<params...>,cost.
inline void save_history_csv(const std::filesystem::path& path,
                             const bo::ParameterSpace& space,
                             const std::vector<bo::HistoryEntry>& history) {
  std::ostringstream out;
  out << "iteration";
  for (const bo::Param& p : space.params()) out << "," << p.name;
  out << ",cost\n";
  for (const bo::HistoryEntry& h : history) {
    out << h.iteration;
    for (Eigen::Index j = 0; j < h.point.size(); ++j) {
      out << "," << format_double(h.point[j]);
    }
    out << "," << format_double(h.cost) << "\n";
  }
  write_text(path, out.str());
}

}  // namespace scengen::pipeline

#endif  // SCENGEN_PIPELINE_ARTIFACTS_HPP
