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

#ifndef SCENGEN_SCENARIO_SCENARIO_HPP
#define SCENGEN_SCENARIO_SCENARIO_HPP

#include <json.hpp>

#include <Eigen/Dense>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scengen/bo/space.hpp"
#include "scengen/error.hpp"
#include "scengen/gmm/model.hpp"
#include "scengen/random.hpp"
#include "scengen/stl/parser.hpp"
#include "scengen/stl/trace.hpp"

namespace scengen::scenario {

/// One fully-valued instantiation of a logical scenario, ready to simulate.
struct ConcreteScenario {
  std::string scenario;
  int index = 0;
  std::map<std::string, double> values;

  double value(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) {
      throw ValidationError("concrete scenario: missing parameter '" + name +
                            "'");
    }
    return it->second;
  }

  /// Values in the space's declaration order.
  Eigen::VectorXd vector(const bo::ParameterSpace& space) const {
    Eigen::VectorXd x(space.size());
    for (Eigen::Index i = 0; i < space.size(); ++i) {
      x[i] = value(space[i].name);
    }
    return x;
  }
};

/// Maps template ids to simulator backends. The abstract scenario (actors
/// and actions) lives in code behind the id; the logical scenario document
/// only references it. Registered simulators must be pure functions.
class TemplateRegistry {
public:
  using Simulator = std::function<stl::Trace(const ConcreteScenario&)>;

  static TemplateRegistry& instance() {
    static TemplateRegistry registry;
    return registry;
  }

  void add(const std::string& id, Simulator simulator) {
    if (id.empty()) throw ValidationError("template id must be non-empty");
    if (!simulator) throw ValidationError("null simulator for '" + id + "'");
    std::lock_guard<std::mutex> lock(mu_);
    simulators_[id] = std::move(simulator);
  }

  bool contains(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return simulators_.count(id) > 0;
  }

  Simulator get(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = simulators_.find(id);
    if (it == simulators_.end()) {
      throw ValidationError("unknown template '" + id + "'");
    }
    return it->second;
  }

  std::vector<std::string> ids() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, sim] : simulators_) out.push_back(id);
    return out;
  }

private:
  TemplateRegistry() = default;
  mutable std::mutex mu_;
  std::map<std::string, Simulator> simulators_;
};

struct OutcomeSpec {
  std::string name;
  std::string text;          // verbatim document text, round-tripped
  stl::FormulaPtr formula;   // parsed eagerly at load time
};

enum class DistributionType { None, Uniform, Gmm };

struct Distribution {
  DistributionType type = DistributionType::None;
  std::optional<gmm::Gmm> model;  // present iff type == Gmm
  nlohmann::json meta = nlohmann::json::array();
};

struct LogicalScenario {
  std::string name;
  std::string template_id;
  bo::ParameterSpace parameters;
  std::vector<OutcomeSpec> specs;
  Distribution distribution;

  const OutcomeSpec* find_spec(const std::string& spec_name) const {
    for (const OutcomeSpec& s : specs) {
      if (s.name == spec_name) return &s;
    }
    return nullptr;
  }

  const OutcomeSpec& spec(const std::string& spec_name) const {
    const OutcomeSpec* s = find_spec(spec_name);
    if (s == nullptr) {
      throw ValidationError("scenario '" + name + "' has no spec named '" +
                            spec_name + "'");
    }
    return *s;
  }
};

namespace detail {

inline std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void require_keys(const nlohmann::json& obj,
                         const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (allowed.count(key) == 0) {
      throw ValidationError("scenario: unknown key '" + key + "' in " +
                            where);
    }
  }
}

inline const nlohmann::json& require_field(const nlohmann::json& obj,
                                           const std::string& key,
                                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError("scenario: missing '" + key + "' in " + where);
  }
  return *it;
}

inline Eigen::VectorXd json_vector(const nlohmann::json& arr,
                                   const std::string& where) {
  if (!arr.is_array() || arr.empty()) {
    throw ValidationError("scenario: " + where +
                          " must be a non-empty array of numbers");
  }
  Eigen::VectorXd v(arr.size());
  Eigen::Index i = 0;
  for (const auto& x : arr) {
    if (!x.is_number()) {
      throw ValidationError("scenario: non-numeric entry in " + where);
    }
    v[i++] = x.get<double>();
  }
  return v;
}

inline Eigen::MatrixXd json_matrix(const nlohmann::json& arr,
                                   const std::string& where) {
  if (!arr.is_array() || arr.empty()) {
    throw ValidationError("scenario: " + where +
                          " must be a non-empty array of rows");
  }
  Eigen::MatrixXd m;
  Eigen::Index r = 0;
  for (const auto& row : arr) {
    Eigen::VectorXd v = json_vector(row, where + " row");
    if (r == 0) {
      m.resize(static_cast<Eigen::Index>(arr.size()), v.size());
    } else if (v.size() != m.cols()) {
      throw ValidationError("scenario: ragged rows in " + where);
    }
    m.row(r++) = v.transpose();
  }
  return m;
}

inline Distribution parse_distribution(const nlohmann::json& doc,
                                       Eigen::Index dim) {
  Distribution dist;
  if (!doc.is_object()) {
    throw ValidationError("scenario: distribution must be an object");
  }
  const std::string type =
      require_field(doc, "type", "distribution").get<std::string>();
  if (type == "uniform") {
    require_keys(doc, {"type"}, "uniform distribution");
    dist.type = DistributionType::Uniform;
    return dist;
  }
  if (type != "gmm") {
    throw ValidationError("scenario: distribution type must be 'uniform' "
                          "or 'gmm', got '" +
                          type + "'");
  }
  require_keys(doc, {"type", "weights", "means", "covariances", "meta"},
               "gmm distribution");
  Eigen::VectorXd weights =
      json_vector(require_field(doc, "weights", "distribution"), "weights");
  const auto& means_doc = require_field(doc, "means", "distribution");
  const auto& covs_doc = require_field(doc, "covariances", "distribution");
  if (!means_doc.is_array() || !covs_doc.is_array() ||
      static_cast<Eigen::Index>(means_doc.size()) != weights.size() ||
      static_cast<Eigen::Index>(covs_doc.size()) != weights.size()) {
    throw ValidationError(
        "scenario: weights, means, and covariances must have one entry "
        "per component");
  }
  std::vector<gmm::GmmComponent> components;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    gmm::GmmComponent c;
    c.weight = weights[k];
    c.mean = json_vector(means_doc[static_cast<std::size_t>(k)], "mean");
    Eigen::MatrixXd cov =
        json_matrix(covs_doc[static_cast<std::size_t>(k)], "covariance");
    if (cov.rows() != cov.cols()) {
      throw ValidationError("scenario: covariance must be square");
    }
    c.cov = cov;
    components.push_back(std::move(c));
  }
  dist.model.emplace(std::move(components));
  if (dist.model->dim() != dim) {
    throw ValidationError(
        "scenario: distribution dimension does not match the parameter "
        "count");
  }
  dist.type = DistributionType::Gmm;
  if (doc.contains("meta")) {
    if (!doc["meta"].is_array()) {
      throw ValidationError("scenario: distribution meta must be an array");
    }
    dist.meta = doc["meta"];
  }
  return dist;
}

}  // namespace detail

/// Parses and validates a logical-scenario document. Outcome specs are
/// parsed eagerly so malformed STL fails at load time, and the referenced
/// simulator template must already be registered.
inline LogicalScenario load_logical(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario: invalid document: ") +
                          e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError("scenario: document root must be an object");
  }
  detail::require_keys(
      doc, {"name", "template", "parameters", "specs", "distribution"},
      "the document root");

  const auto& name_doc = detail::require_field(doc, "name", "the document");
  if (!name_doc.is_string() || name_doc.get<std::string>().empty()) {
    throw ValidationError("scenario: name must be a non-empty string");
  }
  const auto& template_doc =
      detail::require_field(doc, "template", "the document");
  if (!template_doc.is_string()) {
    throw ValidationError("scenario: template must be a string");
  }
  const std::string template_id = template_doc.get<std::string>();
  if (!TemplateRegistry::instance().contains(template_id)) {
    throw ValidationError("scenario: unknown template '" + template_id +
                          "'");
  }

  const auto& params_doc =
      detail::require_field(doc, "parameters", "the document");
  if (!params_doc.is_array() || params_doc.empty()) {
    throw ValidationError(
        "scenario: parameters must be a non-empty array");
  }
  std::vector<bo::Param> params;
  for (const auto& p : params_doc) {
    if (!p.is_object()) {
      throw ValidationError("scenario: each parameter must be an object");
    }
    detail::require_keys(p, {"name", "range"}, "a parameter");
    const auto& pname = detail::require_field(p, "name", "a parameter");
    const auto& range = detail::require_field(p, "range", "a parameter");
    if (!pname.is_string() || !range.is_array() || range.size() != 2 ||
        !range[0].is_number() || !range[1].is_number()) {
      throw ValidationError(
          "scenario: a parameter needs a string name and a [lo, hi] "
          "range");
    }
    params.push_back(bo::Param{pname.get<std::string>(),
                               range[0].get<double>(),
                               range[1].get<double>()});
  }
  bo::ParameterSpace space(params);

  std::vector<OutcomeSpec> specs;
  if (doc.contains("specs")) {
    if (!doc["specs"].is_array()) {
      throw ValidationError("scenario: specs must be an array");
    }
    std::set<std::string> seen;
    for (const auto& s : doc["specs"]) {
      if (!s.is_object()) {
        throw ValidationError("scenario: each spec must be an object");
      }
      detail::require_keys(s, {"name", "stl"}, "a spec");
      const auto& sname = detail::require_field(s, "name", "a spec");
      const auto& stext = detail::require_field(s, "stl", "a spec");
      if (!sname.is_string() || !stext.is_string()) {
        throw ValidationError(
            "scenario: a spec needs a string name and an stl string");
      }
      OutcomeSpec spec;
      spec.name = sname.get<std::string>();
      spec.text = stext.get<std::string>();
      if (spec.name.empty()) {
        throw ValidationError("scenario: spec names must be non-empty");
      }
      if (!seen.insert(spec.name).second) {
        throw ValidationError("scenario: duplicate spec name '" +
                              spec.name + "'");
      }
      try {
        spec.formula = stl::parse_formula(spec.text);
      } catch (const ValidationError& e) {
        throw ValidationError("scenario: spec '" + spec.name +
                              "' does not parse: " + e.what());
      }
      specs.push_back(std::move(spec));
    }
  }

  Distribution dist;
  if (doc.contains("distribution")) {
    dist = detail::parse_distribution(doc["distribution"], space.size());
  }

  return LogicalScenario{name_doc.get<std::string>(), template_id,
                         std::move(space), std::move(specs),
                         std::move(dist)};
}

/// Serializes back to the document schema; load(save(x)) is field-exact.
inline std::string save_logical(const LogicalScenario& scenario) {
  nlohmann::ordered_json doc;
  doc["name"] = scenario.name;
  doc["template"] = scenario.template_id;
  doc["parameters"] = nlohmann::ordered_json::array();
  for (const bo::Param& p : scenario.parameters.params()) {
    nlohmann::ordered_json entry;
    entry["name"] = p.name;
    entry["range"] = {p.lower, p.upper};
    doc["parameters"].push_back(std::move(entry));
  }
  doc["specs"] = nlohmann::ordered_json::array();
  for (const OutcomeSpec& s : scenario.specs) {
    nlohmann::ordered_json entry;
    entry["name"] = s.name;
    entry["stl"] = s.text;
    doc["specs"].push_back(std::move(entry));
  }
  if (scenario.distribution.type == DistributionType::Uniform) {
    doc["distribution"] = {{"type", "uniform"}};
  } else if (scenario.distribution.type == DistributionType::Gmm) {
    const gmm::Gmm& model = *scenario.distribution.model;
    nlohmann::ordered_json dist;
    dist["type"] = "gmm";
    dist["weights"] = nlohmann::ordered_json::array();
    dist["means"] = nlohmann::ordered_json::array();
    dist["covariances"] = nlohmann::ordered_json::array();
    for (const gmm::GmmComponent& c : model.components()) {
      dist["weights"].push_back(c.weight);
      nlohmann::ordered_json mean = nlohmann::ordered_json::array();
      for (Eigen::Index i = 0; i < c.mean.size(); ++i) {
        mean.push_back(c.mean[i]);
      }
      dist["means"].push_back(std::move(mean));
      nlohmann::ordered_json cov = nlohmann::ordered_json::array();
      for (Eigen::Index r = 0; r < c.cov.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index cc = 0; cc < c.cov.cols(); ++cc) {
          row.push_back(c.cov(r, cc));
        }
        cov.push_back(std::move(row));
      }
      dist["covariances"].push_back(std::move(cov));
    }
    dist["meta"] = scenario.distribution.meta;
    doc["distribution"] = std::move(dist);
  }
  return doc.dump(2) + "\n";
}

/// Replaces the scenario's distribution with the fitted mixture; each
/// attachment appends a timestamped record so the history survives
/// re-attachment.
inline LogicalScenario attach_distribution(LogicalScenario scenario,
                                           const gmm::Gmm& model) {
  if (model.dim() != scenario.parameters.size()) {
    throw ValidationError(
        "scenario: mixture dimension does not match the parameter count");
  }
  nlohmann::json meta = scenario.distribution.meta;
  meta.push_back(nlohmann::json{
      {"attached_at", detail::utc_timestamp()},
      {"components", model.component_count()}});
  scenario.distribution.type = DistributionType::Gmm;
  scenario.distribution.model = model;
  scenario.distribution.meta = std::move(meta);
  return scenario;
}

/// Draws n fully-valued scenarios from the attached distribution.
inline std::vector<ConcreteScenario> concretize(
    const LogicalScenario& scenario, int n, Rng& rng) {
  if (n < 0) throw ValidationError("concretize: n must be >= 0");
  std::vector<ConcreteScenario> out;
  if (n == 0) return out;
  out.reserve(static_cast<std::size_t>(n));

  Eigen::MatrixXd points;
  switch (scenario.distribution.type) {
    case DistributionType::None:
      throw ValidationError("scenario '" + scenario.name +
                            "' has no distribution to sample from");
    case DistributionType::Uniform: {
      points.resize(n, scenario.parameters.size());
      for (int i = 0; i < n; ++i) {
        points.row(i) =
            scenario.parameters.sample_uniform(rng).transpose();
      }
      break;
    }
    case DistributionType::Gmm:
      points = scenario.distribution.model->sample_box(
          n, scenario.parameters, rng);
      break;
  }

  for (int i = 0; i < n; ++i) {
    ConcreteScenario c;
    c.scenario = scenario.name;
    c.index = i;
    for (Eigen::Index j = 0; j < scenario.parameters.size(); ++j) {
      c.values[scenario.parameters[j].name] = points(i, j);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace scengen::scenario

#endif  // SCENGEN_SCENARIO_SCENARIO_HPP
