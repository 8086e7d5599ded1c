#include "ensalloc/grid_search.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ensalloc/sufficiency.hpp"

namespace ensalloc {

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::linear: return "linear";
    case ModelFamily::tree: return "tree";
    case ModelFamily::gbt: return "gbt";
  }
  return "?";
}

ModelFamily family_from_string(const std::string& s) {
  if (s == "linear") return ModelFamily::linear;
  if (s == "tree") return ModelFamily::tree;
  if (s == "gbt") return ModelFamily::gbt;
  throw std::invalid_argument("unknown model family: " + s);
}

nlohmann::ordered_json ParamPoint::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = to_string(family);
  switch (family) {
    case ModelFamily::linear:
      j["l1_penalty"] = l1_penalty;
      break;
    case ModelFamily::tree:
      j["min_split"] = tree.min_split;
      j["max_leaf"] = tree.max_leaf;
      j["max_depth"] = tree.max_depth;
      break;
    case ModelFamily::gbt:
      j["learning_rate"] = gbt.learning_rate;
      j["n_estimators"] = gbt.n_estimators;
      j["max_depth"] = gbt.max_depth;
      j["subsample"] = gbt.subsample;
      break;
  }
  return j;
}

std::vector<ParamPoint> HyperparameterGrid::enumerate() const {
  std::vector<ParamPoint> points;
  switch (family) {
    case ModelFamily::linear: {
      for (double l1 : l1_penalty) {
        if (l1 < 0) throw std::invalid_argument("l1_penalty must be >= 0");
        ParamPoint p;
        p.family = family;
        p.l1_penalty = l1;
        points.push_back(p);
      }
      break;
    }
    case ModelFamily::tree: {
      for (int ms : min_split)
        for (int ml : max_leaf)
          for (int md : tree_max_depth) {
            if (ms < 1 || ml < 1 || md < 1) {
              throw std::invalid_argument("tree constraints must be positive");
            }
            ParamPoint p;
            p.family = family;
            p.tree = TreeParams{ms, ml, md};
            points.push_back(p);
          }
      break;
    }
    case ModelFamily::gbt: {
      for (double lr : learning_rate)
        for (int ne : n_estimators)
          for (int md : gbt_max_depth)
            for (double ss : subsample) {
              if (lr <= 0 || ne < 0 || md < 1 || ss <= 0 || ss > 1) {
                throw std::invalid_argument("gbt parameter out of range");
              }
              ParamPoint p;
              p.family = family;
              p.gbt.learning_rate = lr;
              p.gbt.n_estimators = ne;
              p.gbt.max_depth = md;
              p.gbt.subsample = ss;
              points.push_back(p);
            }
      break;
    }
  }
  if (points.empty()) throw std::invalid_argument("hyperparameter grid is empty");
  return points;
}

HyperparameterGrid HyperparameterGrid::default_linear() {
  HyperparameterGrid g;
  g.family = ModelFamily::linear;
  for (int i = -6; i <= 2; i += 2) g.l1_penalty.push_back(std::pow(2.0, i));
  return g;
}

HyperparameterGrid HyperparameterGrid::default_tree() {
  HyperparameterGrid g;
  g.family = ModelFamily::tree;
  g.min_split = {2, 8, 32};
  g.max_leaf = {8, 64, 512};
  g.tree_max_depth = {2, 4, 8};
  return g;
}

HyperparameterGrid HyperparameterGrid::default_gbt() {
  HyperparameterGrid g;
  g.family = ModelFamily::gbt;
  g.learning_rate = {0.01, 0.1};
  g.n_estimators = {64, 256};
  g.gbt_max_depth = {2, 4};
  g.subsample = {0.5, 1.0};
  return g;
}

std::unique_ptr<PredictionModel> fit_point(const ParamPoint& point,
                                           const Dataset& train,
                                           std::uint64_t seed, Execution exec) {
  switch (point.family) {
    case ModelFamily::linear:
      return std::make_unique<LinearModel>(fit_linear(train, point.l1_penalty));
    case ModelFamily::tree:
      return std::make_unique<DecisionTree>(fit_tree(train, point.tree, exec));
    case ModelFamily::gbt: {
      GbtParams params = point.gbt;
      params.seed = seed;
      return std::make_unique<GradientBoostedTrees>(fit_gbt(train, params, exec));
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

// Selection loss for cross-validation: misclassification rate for
// classification (cross-entropy would let a single confidently wrong pure
// tree leaf dominate a fold), mean squared error for regression.
double selection_loss(const PredictionModel& model, const Dataset& data,
                      Execution exec) {
  if (data.task == TaskKind::classification) {
    int wrong = 0;
    for (const Observation& obs : data.observations) {
      wrong += predict_class(model, obs.x) != obs.label() ? 1 : 0;
    }
    return static_cast<double>(wrong) / data.size();
  }
  const std::vector<double> losses = model_losses(model, data, exec);
  double sum = 0.0;
  for (double v : losses) sum += v;
  return sum / static_cast<double>(losses.size());
}

}  // namespace

FitReport grid_search(const HyperparameterGrid& grid, const Dataset& train,
                      int folds, std::uint64_t seed, Execution exec) {
  train.validate();
  if (folds < 2) throw std::invalid_argument("cross-validation needs folds >= 2");
  const int n = train.size();
  if (n < folds) throw std::invalid_argument("every fold needs at least one observation");

  const std::vector<ParamPoint> points = grid.enumerate();
  const int n_points = static_cast<int>(points.size());

  // seeded contiguous-after-shuffle folds
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<int> fold_begin(static_cast<std::size_t>(folds + 1), 0);
  for (int f = 0; f < folds; ++f) {
    const int size = n / folds + (f < n % folds ? 1 : 0);
    fold_begin[static_cast<std::size_t>(f + 1)] = fold_begin[static_cast<std::size_t>(f)] + size;
  }

  std::vector<Dataset> fold_eval, fold_train;
  fold_eval.reserve(static_cast<std::size_t>(folds));
  fold_train.reserve(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    std::vector<int> eval_idx(order.begin() + fold_begin[static_cast<std::size_t>(f)],
                              order.begin() + fold_begin[static_cast<std::size_t>(f + 1)]);
    std::vector<int> train_idx;
    train_idx.reserve(static_cast<std::size_t>(n - static_cast<int>(eval_idx.size())));
    for (int g = 0; g < folds; ++g) {
      if (g == f) continue;
      train_idx.insert(train_idx.end(), order.begin() + fold_begin[static_cast<std::size_t>(g)],
                       order.begin() + fold_begin[static_cast<std::size_t>(g + 1)]);
    }
    fold_eval.push_back(train.subset(eval_idx));
    fold_train.push_back(train.subset(train_idx));
  }

  // one task per (point, fold); parallel fill, serial reduce in grid order
  std::vector<double> losses(static_cast<std::size_t>(n_points) * folds, 0.0);
  const int n_tasks = n_points * folds;
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < n_tasks; ++t) {
      const int pi = t / folds;
      const int f = t % folds;
      const auto model = fit_point(points[static_cast<std::size_t>(pi)],
                                   fold_train[static_cast<std::size_t>(f)], seed, exec);
      losses[static_cast<std::size_t>(t)] =
          selection_loss(*model, fold_eval[static_cast<std::size_t>(f)], exec);
    }
  } else {
    for (int t = 0; t < n_tasks; ++t) {
      const int pi = t / folds;
      const int f = t % folds;
      const auto model = fit_point(points[static_cast<std::size_t>(pi)],
                                   fold_train[static_cast<std::size_t>(f)], seed, exec);
      losses[static_cast<std::size_t>(t)] =
          selection_loss(*model, fold_eval[static_cast<std::size_t>(f)], exec);
    }
  }

  FitReport report;
  report.mean_loss_per_point.resize(static_cast<std::size_t>(n_points));
  int best = 0;
  for (int pi = 0; pi < n_points; ++pi) {
    double mean = 0.0;
    for (int f = 0; f < folds; ++f) {
      mean += losses[static_cast<std::size_t>(pi) * folds + f];
    }
    mean /= folds;
    report.mean_loss_per_point[static_cast<std::size_t>(pi)] = mean;
    if (mean < report.mean_loss_per_point[static_cast<std::size_t>(best)]) {
      best = pi;  // strict <, so the earliest point wins ties
    }
  }

  report.chosen = points[static_cast<std::size_t>(best)];
  report.chosen_index = best;
  report.fold_losses.assign(losses.begin() + static_cast<std::size_t>(best) * folds,
                            losses.begin() + static_cast<std::size_t>(best + 1) * folds);
  report.model = fit_point(report.chosen, train, seed, exec);
  report.refit_train_loss = selection_loss(*report.model, train, exec);
  return report;
}

}  // namespace ensalloc
