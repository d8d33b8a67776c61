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

#ifndef SCENGEN_SIM_TRACE_STORE_HPP
#define SCENGEN_SIM_TRACE_STORE_HPP

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/format.hpp"
#include "scengen/stl/trace.hpp"

namespace scengen::sim {

struct ManifestRow {
  std::string run_id;
  std::string scenario;
  std::map<std::string, double> params;
  double robustness = 0.0;
  double cost = 0.0;
  std::string status;      // "ok" or "error: <message>"
  std::string trace_path;  // store-relative; empty for failed runs
};

/// File-backed log of simulation runs: comma-separated trace files under
/// traces/ plus a manifest with one structured record per run. Trace files
/// carry a leading metadata comment so that dt and start time reload
/// bit-exactly even for single-sample traces; files without the comment
/// infer both from the time column.
class TraceStore {
public:
  explicit TraceStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_ / "traces");
    load_existing_ids();
  }

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path manifest_path() const {
    return root_ / "manifest.jsonl";
  }

  /// Writes one trace file and returns its store-relative reference.
  std::string store_trace(const std::string& run_id,
                          const stl::Trace& trace) {
    validate_run_id(run_id);
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (!ids_.insert(run_id).second) {
        throw ValidationError("trace store: duplicate run id '" + run_id +
                              "'");
      }
    }
    const std::string reference = "traces/" + run_id + ".csv";
    std::ofstream out(root_ / reference);
    if (!out) {
      throw NumericError("trace store: cannot open " +
                         (root_ / reference).string());
    }
    out << "# dt=" << format_double(trace.dt())
        << " start_time=" << format_double(trace.start_time()) << "\n";
    out << "t";
    for (const auto& [name, values] : trace.signals()) out << "," << name;
    out << "\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
      out << format_double(trace.start_time() +
                           static_cast<double>(k) * trace.dt());
      for (const auto& [name, values] : trace.signals()) {
        out << "," << format_double(values[k]);
      }
      out << "\n";
    }
    if (!out.good()) {
      throw NumericError("trace store: write failed for '" + run_id + "'");
    }
    return reference;
  }

  stl::Trace load_trace(const std::string& reference) const {
    std::ifstream in(root_ / reference);
    if (!in) {
      throw ValidationError("trace store: no trace at '" + reference + "'");
    }
    std::string line;
    double dt = 0.0;
    double start_time = 0.0;
    bool have_meta = false;
    if (!std::getline(in, line)) {
      throw ValidationError("trace store: empty trace file '" + reference +
                            "'");
    }
    if (line.rfind("# dt=", 0) == 0) {
      std::istringstream meta(line.substr(2));
      std::string dt_field, start_field;
      meta >> dt_field >> start_field;
      if (dt_field.rfind("dt=", 0) != 0 ||
          start_field.rfind("start_time=", 0) != 0) {
        throw ValidationError("trace store: corrupt metadata in '" +
                              reference + "'");
      }
      dt = parse_double(dt_field.substr(3));
      start_time = parse_double(start_field.substr(11));
      have_meta = true;
      if (!std::getline(in, line)) {
        throw ValidationError("trace store: missing header in '" +
                              reference + "'");
      }
    }

    std::vector<std::string> names = split(line);
    if (names.empty() || names.front() != "t") {
      throw ValidationError("trace store: header must start with 't' in '" +
                            reference + "'");
    }
    names.erase(names.begin());
    if (names.empty()) {
      throw ValidationError("trace store: no signal columns in '" +
                            reference + "'");
    }

    std::vector<double> times;
    std::vector<std::vector<double>> columns(names.size());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells = split(line);
      if (cells.size() != names.size() + 1) {
        throw ValidationError("trace store: row width mismatch in '" +
                              reference + "'");
      }
      times.push_back(parse_double(cells[0]));
      for (std::size_t i = 0; i < names.size(); ++i) {
        columns[i].push_back(parse_double(cells[i + 1]));
      }
    }
    if (times.empty()) {
      throw ValidationError("trace store: no samples in '" + reference +
                            "'");
    }
    if (!have_meta) {
      start_time = times.front();
      if (times.size() < 2) {
        throw ValidationError(
            "trace store: cannot infer dt from a single sample in '" +
            reference + "'");
      }
      dt = times[1] - times[0];
    }

    stl::Trace::SignalMap signals;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (signals.count(names[i]) > 0) {
        throw ValidationError("trace store: duplicate signal '" + names[i] +
                              "' in '" + reference + "'");
      }
      signals[names[i]] = std::move(columns[i]);
    }
    return stl::Trace(dt, start_time, std::move(signals));
  }

  /// Appends one structured-text manifest record.
  void append_manifest(const ManifestRow& row) {
    nlohmann::ordered_json doc;
    doc["run_id"] = row.run_id;
    doc["scenario"] = row.scenario;
    doc["params"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : row.params) doc["params"][name] = value;
    doc["robustness"] = row.robustness;
    doc["cost"] = row.cost;
    doc["status"] = row.status;
    doc["trace_path"] = row.trace_path;
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(manifest_path(), std::ios::app);
    if (!out) {
      throw NumericError("trace store: cannot open manifest for append");
    }
    out << doc.dump() << "\n";
  }

  std::vector<ManifestRow> manifest() const {
    std::vector<ManifestRow> rows;
    std::ifstream in(manifest_path());
    if (!in) return rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("trace store: corrupt manifest "
                                          "record: ") +
                              e.what());
      }
      // Non-finite numbers serialize as nulls; map them back to NaN.
      auto num = [](const nlohmann::json& v) {
        return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                           : v.get<double>();
      };
      ManifestRow row;
      row.run_id = doc.at("run_id").get<std::string>();
      row.scenario = doc.at("scenario").get<std::string>();
      for (const auto& [name, value] : doc.at("params").items()) {
        row.params[name] = value.get<double>();
      }
      row.robustness = num(doc.at("robustness"));
      row.cost = num(doc.at("cost"));
      row.status = doc.at("status").get<std::string>();
      row.trace_path = doc.at("trace_path").get<std::string>();
      rows.push_back(std::move(row));
    }
    return rows;
  }

  std::size_t stored_run_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return ids_.size();
  }

  bool has_run(const std::string& run_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return ids_.count(run_id) > 0;
  }

private:
  static void validate_run_id(const std::string& run_id) {
    if (run_id.empty()) {
      throw ValidationError("trace store: empty run id");
    }
    for (char c : run_id) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                      c == '.';
      if (!ok) {
        throw ValidationError("trace store: run id '" + run_id +
                              "' has characters outside [A-Za-z0-9._-]");
      }
    }
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) out.push_back(cell);
    return out;
  }

  void load_existing_ids() {
    for (const auto& entry :
         std::filesystem::directory_iterator(root_ / "traces")) {
      if (entry.path().extension() == ".csv") {
        ids_.insert(entry.path().stem().string());
      }
    }
  }

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::set<std::string> ids_;
};

}  // namespace scengen::sim

#endif  // SCENGEN_SIM_TRACE_STORE_HPP
