#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ensalloc/sufficiency.hpp"
#include "ensalloc/tree.hpp"
#include "helpers.hpp"

using namespace ensalloc;
using ensalloc::testing::step_model;

namespace {

Dataset line_dataset(TaskKind task, int n_classes, const std::vector<double>& ys) {
  Dataset d;
  d.task = task;
  d.n_classes = n_classes;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    d.observations.push_back({{static_cast<double>(i)}, ys[i], static_cast<int>(i)});
  }
  return d;
}

}  // namespace

TEST_CASE("task losses at their anchors") {
  CHECK(classification_loss(std::vector<double>{1.0, 0.0}, 0) == doctest::Approx(0.0));
  CHECK(regression_loss(3.25, 3.25) == 0.0);
  CHECK(classification_loss(std::vector<double>{0.5, 0.5}, 1) ==
        doctest::Approx(0.6931471805599453));
}

TEST_CASE("unnormalized probability vectors are rejected") {
  CHECK_THROWS_AS(classification_loss(std::vector<double>{0.5, 0.4}, 0),
                  std::invalid_argument);
}

TEST_CASE("the probability floor keeps losses finite") {
  const double loss = classification_loss(std::vector<double>{1.0, 0.0}, 1);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("epsilon is the lower of the two mean validation losses") {
  // losses g: (0.1, 0.2, 0.3); losses b: (0.05, 0.5, 0.5); y = 0 everywhere
  const Dataset val = line_dataset(TaskKind::regression, 0, {0.0, 0.0, 0.0});
  const DecisionTree g = step_model(
      TaskKind::regression, 0, {0.5, 1.5},
      {{std::sqrt(0.1)}, {std::sqrt(0.2)}, {std::sqrt(0.3)}});
  const DecisionTree b = step_model(
      TaskKind::regression, 0, {0.5, 1.5},
      {{std::sqrt(0.05)}, {std::sqrt(0.5)}, {std::sqrt(0.5)}});
  CHECK(epsilon_from_validation(g, b, val) == doctest::Approx(0.2));
  CHECK(epsilon_from_validation(g, g, val) == doctest::Approx(0.2));

  Dataset empty;
  empty.task = TaskKind::regression;
  CHECK_THROWS_AS(epsilon_from_validation(g, b, empty), std::invalid_argument);
}

TEST_CASE("epsilon shifts affinely with the losses") {
  const Dataset val = line_dataset(TaskKind::regression, 0, {0.0, 0.0, 0.0});
  const double c = 0.37;
  const DecisionTree g = step_model(
      TaskKind::regression, 0, {0.5, 1.5},
      {{std::sqrt(0.1)}, {std::sqrt(0.2)}, {std::sqrt(0.3)}});
  const DecisionTree g_shift = step_model(
      TaskKind::regression, 0, {0.5, 1.5},
      {{std::sqrt(0.1 + c)}, {std::sqrt(0.2 + c)}, {std::sqrt(0.3 + c)}});
  const double before = epsilon_from_validation(g, g, val);
  const double after = epsilon_from_validation(g_shift, g_shift, val);
  CHECK(after - before == doctest::Approx(c));
}

TEST_CASE("sufficiency indicators per mode") {
  ModelOutputs out;
  out.task = TaskKind::classification;
  out.proba = {{0.9, 0.1}, {0.2, 0.8}};

  SufficiencyConfig eq{SufficiencyMode::classification_equality, std::nullopt};
  CHECK(sufficiency_indicator(TaskKind::classification, out, 0, 0.0, eq) == 1);
  CHECK(sufficiency_indicator(TaskKind::classification, out, 1, 0.0, eq) == 0);

  // strict inequality at the epsilon boundary
  ModelOutputs reg;
  reg.task = TaskKind::regression;
  reg.value = {1.5};
  SufficiencyConfig eps{SufficiencyMode::regression_epsilon, 0.25};
  CHECK(sufficiency_indicator(TaskKind::regression, reg, 0, 1.0, eps) == 0);
  SufficiencyConfig wider{SufficiencyMode::regression_epsilon, 0.25 + 1e-9};
  CHECK(sufficiency_indicator(TaskKind::regression, reg, 0, 1.0, wider) == 1);

  SufficiencyConfig always{SufficiencyMode::always_sufficient, std::nullopt};
  SufficiencyConfig never{SufficiencyMode::never_sufficient, std::nullopt};
  CHECK(sufficiency_indicator(TaskKind::classification, out, 1, 0.0, always) == 1);
  CHECK(sufficiency_indicator(TaskKind::classification, out, 0, 0.0, never) == 0);
}

TEST_CASE("config validation ties epsilon to the regression mode") {
  SufficiencyConfig missing{SufficiencyMode::regression_epsilon, std::nullopt};
  CHECK_THROWS_AS(missing.validate(), std::invalid_argument);
  SufficiencyConfig extra{SufficiencyMode::classification_equality, 0.5};
  CHECK_THROWS_AS(extra.validate(), std::invalid_argument);
}

TEST_CASE("partition covers all four cells exactly once on a constructed set") {
  // y = 0 everywhere; g correct on x in {0,1}; b correct on x in {0,2}
  const Dataset data = line_dataset(TaskKind::classification, 2, {0, 0, 0, 0});
  const DecisionTree g = step_model(TaskKind::classification, 2, {1.5},
                                    {{1.0, 0.0}, {0.0, 1.0}});
  const DecisionTree b = step_model(TaskKind::classification, 2, {0.5, 1.5, 2.5},
                                    {{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}});
  SufficiencyConfig eq{SufficiencyMode::classification_equality, std::nullopt};
  const SufficiencyPartition part = partition(g, b, data, eq);
  CHECK(part.category[0] == Category::Z2);  // both right
  CHECK(part.category[1] == Category::Zg);  // only g
  CHECK(part.category[2] == Category::Zb);  // only b
  CHECK(part.category[3] == Category::Z0);  // neither
  CHECK(part.n_g == 1);
  CHECK(part.n_b == 1);
  CHECK(part.n_2 == 1);
  CHECK(part.n_0 == 1);
  CHECK(part.n_g + part.n_b + part.n_2 + part.n_0 == part.size());
}

TEST_CASE("identical models empty the one-sided cells") {
  const Dataset data = line_dataset(TaskKind::classification, 2, {0, 1, 0, 1});
  const DecisionTree g = step_model(TaskKind::classification, 2, {1.5},
                                    {{1.0, 0.0}, {0.0, 1.0}});
  SufficiencyConfig eq{SufficiencyMode::classification_equality, std::nullopt};
  const SufficiencyPartition part = partition(g, g, data, eq);
  CHECK(part.n_g == 0);
  CHECK(part.n_b == 0);
}

TEST_CASE("always-sufficient mode reduces the partition to Z2") {
  const Dataset data = line_dataset(TaskKind::classification, 2, {0, 1, 0, 1});
  const DecisionTree g = step_model(TaskKind::classification, 2, {1.5},
                                    {{1.0, 0.0}, {0.0, 1.0}});
  const DecisionTree b = step_model(TaskKind::classification, 2, {0.5},
                                    {{0.0, 1.0}, {1.0, 0.0}});
  SufficiencyConfig always{SufficiencyMode::always_sufficient, std::nullopt};
  const SufficiencyPartition part = partition(g, b, data, always);
  CHECK(part.n_2 == part.size());
  CHECK(part.n_g == 0);
  CHECK(part.n_b == 0);
  CHECK(part.n_0 == 0);
}

TEST_CASE("category mapping matches the indicator pairs") {
  CHECK(category_of(1, 0) == Category::Zg);
  CHECK(category_of(0, 1) == Category::Zb);
  CHECK(category_of(1, 1) == Category::Z2);
  CHECK(category_of(0, 0) == Category::Z0);
}
