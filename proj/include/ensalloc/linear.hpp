#pragma once

#include "ensalloc/model.hpp"

namespace ensalloc {

/// L1-penalized linear (regression) or multinomial logistic (classification)
/// model fitted by accelerated proximal gradient descent. The intercept is
/// never penalized.
class LinearModel final : public PredictionModel {
 public:
  LinearModel() = default;
  LinearModel(TaskKind task, int feature_dim, int n_classes,
              std::vector<double> weights, double l1_penalty)
      : task_(task),
        d_(feature_dim),
        k_(n_classes),
        weights_(std::move(weights)),
        l1_penalty_(l1_penalty) {}

  TaskKind task() const override { return task_; }
  int feature_dim() const override { return d_; }
  int n_classes() const override { return k_; }
  std::string family() const override { return "linear"; }

  std::vector<double> predict_proba(std::span<const double> x) const override;
  double predict_value(std::span<const double> x) const override;
  nlohmann::ordered_json to_json() const override;

  /// Row-major (rows x (feature_dim + 1)) with the intercept last; one row
  /// per class for classification, a single row for regression.
  const std::vector<double>& weights() const { return weights_; }
  double l1_penalty() const { return l1_penalty_; }

 private:
  TaskKind task_ = TaskKind::regression;
  int d_ = 0;
  int k_ = 0;
  std::vector<double> weights_;
  double l1_penalty_ = 0.0;
};

/// Minimizes mean log-loss (classification) or mean squared error
/// (regression) plus l1_penalty * ||non-intercept weights||_1 with FISTA and
/// backtracking line search. Converged when the relative objective change
/// drops below 1e-7 and the gradient-mapping norm below 1e-6; hard cap of
/// 10,000 iterations. Throws std::runtime_error on a non-finite objective,
/// which usually signals unscaled features.
LinearModel fit_linear(const Dataset& train, double l1_penalty);

}  // namespace ensalloc
