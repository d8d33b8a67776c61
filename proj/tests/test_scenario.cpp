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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scengen/gmm/model.hpp"
#include "scengen/scenario/scenario.hpp"
#include "scengen/sim/batch.hpp"

using scengen::Rng;
using scengen::ValidationError;
using scengen::gmm::Gmm;
using scengen::gmm::GmmComponent;
using scengen::scenario::attach_distribution;
using scengen::scenario::concretize;
using scengen::scenario::DistributionType;
using scengen::scenario::load_logical;
using scengen::scenario::LogicalScenario;
using scengen::scenario::save_logical;
using scengen::scenario::TemplateRegistry;

namespace {

void ensure_templates() {
  static const bool once = [] {
    scengen::sim::register_builtin_templates();
    return true;
  }();
  (void)once;
}

const char* kCutinDoc = R"json({
  "name": "highway-cutin",
  "template": "cutin",
  "parameters": [
    {"name": "dS", "range": [-30.0, 0.0]},
    {"name": "dV", "range": [0.5, 2.0]},
    {"name": "T", "range": [0.5, 3.0]}
  ],
  "specs": [
    {"name": "spec1", "stl": "F (1 - ttc > 0)"}
  ]
})json";

LogicalScenario cutin_scenario() {
  ensure_templates();
  return load_logical(kCutinDoc);
}

Gmm tight_center_gmm() {
  Eigen::VectorXd mean(3);
  mean << -15.0, 1.2, 1.7;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3) * 0.01;
  return Gmm({GmmComponent{1.0, mean, cov}});
}

std::string replace_first(std::string text, const std::string& from,
                          const std::string& to) {
  auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(TemplateRegistry, AddContainsAndGet) {
  ensure_templates();
  auto& registry = TemplateRegistry::instance();
  EXPECT_TRUE(registry.contains("cutin"));
  EXPECT_TRUE(registry.contains("griewank"));
  EXPECT_FALSE(registry.contains("hovercraft"));
  EXPECT_THROW(registry.get("hovercraft"), ValidationError);
  EXPECT_THROW(registry.add("", [](const auto&) {
    return scengen::sim::simulate_cutin(-10, 1.0, 1.0);
  }),
               ValidationError);
  EXPECT_THROW(registry.add("null-sim", nullptr), ValidationError);
}

TEST(ScenarioLoad, ParsesTheCutinDocument) {
  LogicalScenario sc = cutin_scenario();
  EXPECT_EQ(sc.name, "highway-cutin");
  EXPECT_EQ(sc.template_id, "cutin");
  ASSERT_EQ(sc.parameters.size(), 3);
  EXPECT_EQ(sc.parameters[0].name, "dS");
  EXPECT_EQ(sc.parameters[0].lower, -30.0);
  EXPECT_EQ(sc.parameters[0].upper, 0.0);
  EXPECT_EQ(sc.parameters[1].name, "dV");
  EXPECT_EQ(sc.parameters[2].name, "T");
  ASSERT_EQ(sc.specs.size(), 1u);
  EXPECT_EQ(sc.specs[0].name, "spec1");
  EXPECT_NE(sc.specs[0].formula, nullptr);
  EXPECT_EQ(sc.distribution.type, DistributionType::None);
  EXPECT_NE(sc.find_spec("spec1"), nullptr);
  EXPECT_EQ(sc.find_spec("spec9"), nullptr);
  EXPECT_THROW(sc.spec("spec9"), ValidationError);
}

TEST(ScenarioLoad, RejectsEmptyRange) {
  ensure_templates();
  std::string doc =
      replace_first(kCutinDoc, "[-30.0, 0.0]", "[5.0, 5.0]");
  EXPECT_THROW(load_logical(doc), ValidationError);
}

TEST(ScenarioLoad, RejectsUnparseableSpecNamingIt) {
  ensure_templates();
  std::string doc = replace_first(kCutinDoc, "F (1 - ttc > 0)", "F (1 -");
  try {
    load_logical(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("spec1"), std::string::npos);
  }
}

TEST(ScenarioLoad, RejectsUnknownTemplate) {
  ensure_templates();
  std::string doc = replace_first(kCutinDoc, "\"cutin\"", "\"submarine\"");
  try {
    load_logical(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("submarine"), std::string::npos);
  }
}

TEST(ScenarioLoad, RejectsSchemaViolations) {
  ensure_templates();
  EXPECT_THROW(load_logical("not json at all"), ValidationError);
  EXPECT_THROW(load_logical("[1, 2, 3]"), ValidationError);
  EXPECT_THROW(load_logical(R"({"template": "cutin"})"), ValidationError);
  EXPECT_THROW(
      load_logical(replace_first(kCutinDoc, "\"specs\"", "\"outcomes\"")),
      ValidationError);
  EXPECT_THROW(
      load_logical(replace_first(kCutinDoc, "[-30.0, 0.0]", "[-30.0]")),
      ValidationError);
  EXPECT_THROW(
      load_logical(replace_first(kCutinDoc, "\"spec1\"", "\"\"")),
      ValidationError);
  std::string dup = replace_first(
      kCutinDoc, R"json({"name": "spec1", "stl": "F (1 - ttc > 0)"})json",
      R"json({"name": "s", "stl": "true"}, {"name": "s", "stl": "true"})json");
  EXPECT_THROW(load_logical(dup), ValidationError);
}

TEST(ScenarioRoundTrip, SaveLoadIsFieldExact) {
  LogicalScenario sc = cutin_scenario();
  LogicalScenario back = load_logical(save_logical(sc));
  EXPECT_EQ(back.name, sc.name);
  EXPECT_EQ(back.template_id, sc.template_id);
  ASSERT_EQ(back.parameters.size(), sc.parameters.size());
  for (Eigen::Index i = 0; i < sc.parameters.size(); ++i) {
    EXPECT_EQ(back.parameters[i].name, sc.parameters[i].name);
    EXPECT_EQ(back.parameters[i].lower, sc.parameters[i].lower);
    EXPECT_EQ(back.parameters[i].upper, sc.parameters[i].upper);
  }
  ASSERT_EQ(back.specs.size(), sc.specs.size());
  for (std::size_t i = 0; i < sc.specs.size(); ++i) {
    EXPECT_EQ(back.specs[i].name, sc.specs[i].name);
    EXPECT_EQ(back.specs[i].text, sc.specs[i].text);
  }
  EXPECT_EQ(back.distribution.type, DistributionType::None);
}

TEST(ScenarioRoundTrip, UniformDistributionSurvives) {
  ensure_templates();
  std::string doc = replace_first(
      kCutinDoc, "\"specs\": [",
      "\"distribution\": {\"type\": \"uniform\"},\n  \"specs\": [");
  LogicalScenario sc = load_logical(doc);
  EXPECT_EQ(sc.distribution.type, DistributionType::Uniform);
  LogicalScenario back = load_logical(save_logical(sc));
  EXPECT_EQ(back.distribution.type, DistributionType::Uniform);
}

TEST(ScenarioRoundTrip, GmmDistributionDensitiesSurviveReload) {
  LogicalScenario sc = cutin_scenario();
  Rng rng(21);
  Eigen::VectorXd m1(3), m2(3);
  m1 << -20.0, 1.5, 1.0;
  m2 << -5.0, 0.8, 2.5;
  Eigen::MatrixXd base(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) base(i, j) = rng.normal();
  }
  Eigen::MatrixXd cov =
      base * base.transpose() + Eigen::MatrixXd::Identity(3, 3);
  Gmm gmm({GmmComponent{0.35, m1, cov},
           GmmComponent{0.65, m2, 0.5 * cov}});
  LogicalScenario with = attach_distribution(sc, gmm);
  ASSERT_EQ(with.distribution.type, DistributionType::Gmm);

  LogicalScenario back = load_logical(save_logical(with));
  ASSERT_EQ(back.distribution.type, DistributionType::Gmm);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(3);
    x << rng.uniform(-30.0, 0.0), rng.uniform(0.5, 2.0),
        rng.uniform(0.5, 3.0);
    double a = with.distribution.model->log_density(x);
    double b = back.distribution.model->log_density(x);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST(ScenarioAttach, DimensionMismatchThrows) {
  LogicalScenario sc = cutin_scenario();
  Eigen::VectorXd mean(2);
  mean << 0.0, 0.0;
  Gmm gmm({GmmComponent{1.0, mean, Eigen::MatrixXd::Identity(2, 2)}});
  EXPECT_THROW(attach_distribution(sc, gmm), ValidationError);
}

TEST(ScenarioAttach, ReattachKeepsBothTimestampsAndLatestModel) {
  LogicalScenario sc = cutin_scenario();
  LogicalScenario once = attach_distribution(sc, tight_center_gmm());
  ASSERT_EQ(once.distribution.meta.size(), 1u);

  Eigen::VectorXd mean(3);
  mean << -1.0, 0.6, 0.6;
  Gmm second({GmmComponent{1.0, mean, Eigen::MatrixXd::Identity(3, 3)}});
  LogicalScenario twice = attach_distribution(once, second);
  ASSERT_EQ(twice.distribution.meta.size(), 2u);
  for (const auto& entry : twice.distribution.meta) {
    EXPECT_TRUE(entry.contains("attached_at"));
  }
  EXPECT_EQ(twice.distribution.model->log_density(mean),
            second.log_density(mean));
}

TEST(ScenarioConcretize, UniformSamplesAreInRangeAndComplete) {
  ensure_templates();
  std::string doc = replace_first(
      kCutinDoc, "\"specs\": [",
      "\"distribution\": {\"type\": \"uniform\"},\n  \"specs\": [");
  LogicalScenario sc = load_logical(doc);
  Rng rng(77);
  auto concrete = concretize(sc, 200, rng);
  ASSERT_EQ(concrete.size(), 200u);
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(concrete[static_cast<std::size_t>(i)].index, i);
    EXPECT_EQ(concrete[static_cast<std::size_t>(i)].scenario, sc.name);
    Eigen::VectorXd x =
        concrete[static_cast<std::size_t>(i)].vector(sc.parameters);
    EXPECT_TRUE(sc.parameters.contains(x));
  }
}

TEST(ScenarioConcretize, GmmSamplingIsSeededAndInRange) {
  LogicalScenario sc = attach_distribution(cutin_scenario(),
                                           tight_center_gmm());
  Rng rng_a(5);
  Rng rng_b(5);
  auto a = concretize(sc, 100, rng_a);
  auto b = concretize(sc, 100, rng_b);
  ASSERT_EQ(a.size(), 100u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(sc.parameters.contains(a[i].vector(sc.parameters)));
    EXPECT_EQ(a[i].values, b[i].values);
  }
}

TEST(ScenarioConcretize, RequiresADistribution) {
  LogicalScenario sc = cutin_scenario();
  Rng rng(1);
  EXPECT_THROW(concretize(sc, 10, rng), ValidationError);
  EXPECT_THROW(concretize(sc, -1, rng), ValidationError);
  LogicalScenario with = attach_distribution(sc, tight_center_gmm());
  EXPECT_TRUE(concretize(with, 0, rng).empty());
}
