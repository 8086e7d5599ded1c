#pragma once

#include <array>
#include <limits>

#include "ensalloc/model.hpp"

namespace ensalloc {

struct TreeParams {
  int min_split = 2;   // minimum node size to attempt a split
  int max_leaf = std::numeric_limits<int>::max();
  int max_depth = std::numeric_limits<int>::max();
};

/// One node of a binary axis-aligned tree. Internal nodes route on
/// x[feature] <= threshold; leaves carry class frequencies (classification)
/// or a single mean (regression).
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> value;

  bool is_leaf() const { return feature < 0; }
};

namespace detail {

/// Row-major training matrix plus target vector, borrowed from the caller.
struct TrainView {
  int n = 0;
  int d = 0;
  const double* x = nullptr;
  const double* y = nullptr;

  double at(int i, int j) const { return x[static_cast<std::size_t>(i) * d + j]; }
};

struct TreeStructure {
  std::vector<TreeNode> nodes;
  std::vector<int> node_depth;
  std::vector<int> rows;                       // row ids permuted by splits
  std::vector<std::array<int, 2>> node_range;  // per node [begin, end) in rows
  int leaf_count = 0;
};

/// Greedy CART construction: grows best-first by weighted impurity decrease
/// (Gini for classification, variance for regression) so max_leaf is an
/// exact budget. A node splits only when it holds >= min_split rows and both
/// children would get >= ceil(min_split / 2). n_classes == 0 selects
/// regression targets.
///
/// Execution::parallel distributes the per-feature split scans with OpenMP;
/// the serial variant is the reference. Both reduce candidates in feature
/// order and are bit-identical.
TreeStructure build_tree(const TrainView& view, std::vector<int> rows,
                         const TreeParams& params, int n_classes,
                         Execution exec);

int tree_apply(const std::vector<TreeNode>& nodes, std::span<const double> x);

}  // namespace detail

class DecisionTree final : public PredictionModel {
 public:
  DecisionTree() = default;
  DecisionTree(TaskKind task, int feature_dim, int n_classes,
               std::vector<TreeNode> nodes)
      : task_(task), d_(feature_dim), k_(n_classes), nodes_(std::move(nodes)) {}

  TaskKind task() const override { return task_; }
  int feature_dim() const override { return d_; }
  int n_classes() const override { return k_; }
  std::string family() const override { return "tree"; }

  std::vector<double> predict_proba(std::span<const double> x) const override;
  double predict_value(std::span<const double> x) const override;
  nlohmann::ordered_json to_json() const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int leaf_count() const;
  int depth() const;

 private:
  TaskKind task_ = TaskKind::classification;
  int d_ = 0;
  int k_ = 0;
  std::vector<TreeNode> nodes_;
};

DecisionTree fit_tree(const Dataset& train, const TreeParams& params,
                      Execution exec = Execution::parallel);

}  // namespace ensalloc
