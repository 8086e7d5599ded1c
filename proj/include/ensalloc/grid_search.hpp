#pragma once

#include <memory>

#include "ensalloc/gbt.hpp"
#include "ensalloc/linear.hpp"
#include "ensalloc/tree.hpp"

namespace ensalloc {

enum class ModelFamily { linear, tree, gbt };

std::string to_string(ModelFamily family);
ModelFamily family_from_string(const std::string& s);

/// One fully specified candidate; only the fields of its family are
/// meaningful.
struct ParamPoint {
  ModelFamily family = ModelFamily::tree;
  double l1_penalty = 0.0;
  TreeParams tree;
  GbtParams gbt;

  nlohmann::ordered_json to_json() const;
};

/// Per-family lists of values to search. Points are enumerated row-major in
/// the declared field order (first list varies slowest), which fixes the
/// tie-break order.
struct HyperparameterGrid {
  ModelFamily family = ModelFamily::tree;

  std::vector<double> l1_penalty;  // linear

  std::vector<int> min_split;  // tree
  std::vector<int> max_leaf;
  std::vector<int> tree_max_depth;

  std::vector<double> learning_rate;  // gbt
  std::vector<int> n_estimators;
  std::vector<int> gbt_max_depth;
  std::vector<double> subsample;

  std::vector<ParamPoint> enumerate() const;

  // reduced default search spaces
  static HyperparameterGrid default_linear();
  static HyperparameterGrid default_tree();
  static HyperparameterGrid default_gbt();
};

struct FitReport {
  ParamPoint chosen;
  int chosen_index = 0;
  std::vector<double> fold_losses;          // chosen point, per fold
  std::vector<double> mean_loss_per_point;  // all points, grid order
  double refit_train_loss = 0.0;
  std::unique_ptr<PredictionModel> model;   // refit on the full training set
};

std::unique_ptr<PredictionModel> fit_point(const ParamPoint& point,
                                           const Dataset& train,
                                           std::uint64_t seed, Execution exec);

/// Exhaustive search with seeded contiguous-after-shuffle cross-validation
/// folds. The selected point minimizes the mean fold loss (misclassification
/// rate for classification, mean squared error for regression); ties go to
/// the earliest grid point. The winner is refit on the full training set.
/// Grid points may be evaluated in parallel; losses are reduced in grid
/// order, so results match the serial reference exactly.
FitReport grid_search(const HyperparameterGrid& grid, const Dataset& train,
                      int folds, std::uint64_t seed,
                      Execution exec = Execution::parallel);

}  // namespace ensalloc
