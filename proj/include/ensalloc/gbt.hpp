#pragma once

#include <cstdint>

#include "ensalloc/tree.hpp"

namespace ensalloc {

struct GbtParams {
  double learning_rate = 0.1;
  int n_estimators = 100;
  int max_depth = 3;
  double subsample = 1.0;
  std::uint64_t seed = 0;
};

/// Stagewise additive trees on loss gradients: softmax log-loss for
/// classification (one tree per class per stage, Newton leaf steps) and
/// squared error for regression (leaf means). Row subsampling is seeded per
/// stage, so equal seeds give identical models.
class GradientBoostedTrees final : public PredictionModel {
 public:
  GradientBoostedTrees() = default;
  GradientBoostedTrees(TaskKind task, int feature_dim, int n_classes,
                       GbtParams params, std::vector<double> base,
                       std::vector<std::vector<std::vector<TreeNode>>> stages)
      : task_(task),
        d_(feature_dim),
        k_(n_classes),
        params_(params),
        base_(std::move(base)),
        stages_(std::move(stages)) {}

  TaskKind task() const override { return task_; }
  int feature_dim() const override { return d_; }
  int n_classes() const override { return k_; }
  std::string family() const override { return "gbt"; }

  std::vector<double> predict_proba(std::span<const double> x) const override;
  double predict_value(std::span<const double> x) const override;
  nlohmann::ordered_json to_json() const override;

  const GbtParams& params() const { return params_; }
  const std::vector<double>& base_score() const { return base_; }
  int stage_count() const { return static_cast<int>(stages_.size()); }

  /// Raw additive scores (class scores or the regression value) for x.
  std::vector<double> raw_scores(std::span<const double> x) const;

 private:
  TaskKind task_ = TaskKind::regression;
  int d_ = 0;
  int k_ = 0;
  GbtParams params_;
  std::vector<double> base_;
  // stages_[stage][class] holds one tree's nodes; regression has one
  // pseudo-class. Leaf values are already scaled by the learning rate.
  std::vector<std::vector<std::vector<TreeNode>>> stages_;

  friend GradientBoostedTrees fit_gbt(const Dataset&, const GbtParams&, Execution);
};

GradientBoostedTrees fit_gbt(const Dataset& train, const GbtParams& params,
                             Execution exec = Execution::parallel);

}  // namespace ensalloc
