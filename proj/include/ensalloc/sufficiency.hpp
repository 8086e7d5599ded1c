#pragma once

#include <optional>

#include "ensalloc/model.hpp"

namespace ensalloc {

inline constexpr double kProbabilityFloor = 1e-12;

/// Task loss: cross-entropy -log p_y (floored) for classification, squared
/// error for regression.
double classification_loss(std::span<const double> proba, int y);
double regression_loss(double prediction, double y);

/// Loss of one model output against the truth.
double underlying_loss(TaskKind task, const ModelOutputs& outputs, int index,
                       double y);

/// Per-observation losses of a fitted model over a dataset.
std::vector<double> model_losses(const PredictionModel& model, const Dataset& data,
                                 Execution exec = Execution::parallel);

enum class SufficiencyMode {
  classification_equality,
  regression_epsilon,
  always_sufficient,
  never_sufficient,
};

std::string to_string(SufficiencyMode mode);
SufficiencyMode sufficiency_mode_from_string(const std::string& s);

struct SufficiencyConfig {
  SufficiencyMode mode = SufficiencyMode::classification_equality;
  std::optional<double> epsilon;  // required iff mode == regression_epsilon

  void validate() const;
};

/// epsilon heuristic: the lower of the two mean validation losses.
double epsilon_from_validation(const PredictionModel& g, const PredictionModel& b,
                               const Dataset& validation);

/// Sufficiency of one model output: argmax equality for classification,
/// strict loss < epsilon for regression, constants for the degenerate modes.
int sufficiency_indicator(TaskKind task, const ModelOutputs& outputs, int index,
                          double y, const SufficiencyConfig& config);

/// Four-way split by the (s_g, s_b) pair. Category order matches the
/// desirability ranking: Zb < Z0 < Z2 < Zg.
enum class Category { Zb = 0, Z0 = 1, Z2 = 2, Zg = 3 };

std::string to_string(Category c);
Category category_of(int s_g, int s_b);

struct SufficiencyPartition {
  std::vector<int> s_g;
  std::vector<int> s_b;
  std::vector<Category> category;
  int n_g = 0;
  int n_b = 0;
  int n_2 = 0;
  int n_0 = 0;

  int size() const { return static_cast<int>(category.size()); }
  double mean_s_g() const;
  double mean_s_b() const;
};

SufficiencyPartition partition_from_indicators(std::span<const int> s_g,
                                               std::span<const int> s_b);

SufficiencyPartition partition(const PredictionModel& g, const PredictionModel& b,
                               const Dataset& data, const SufficiencyConfig& config,
                               Execution exec = Execution::parallel);

}  // namespace ensalloc
