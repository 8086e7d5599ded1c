#pragma once

#include "ensalloc/tree.hpp"

namespace ensalloc::testing {

// Piecewise-constant model over one feature: k thresholds cut the line into
// k+1 cells with the given leaf payloads. Split i sits at index 2i, its left
// leaf at 2i+1, and the next split (or the final leaf) at 2i+2.
inline DecisionTree step_model(TaskKind task, int n_classes,
                               const std::vector<double>& thresholds,
                               const std::vector<std::vector<double>>& values) {
  const int k = static_cast<int>(thresholds.size());
  std::vector<TreeNode> nodes;
  for (int i = 0; i < k; ++i) {
    TreeNode split;
    split.feature = 0;
    split.threshold = thresholds[static_cast<std::size_t>(i)];
    split.left = 2 * i + 1;
    split.right = 2 * i + 2;
    nodes.push_back(split);
    TreeNode leaf;
    leaf.value = values[static_cast<std::size_t>(i)];
    nodes.push_back(leaf);
  }
  TreeNode last_leaf;
  last_leaf.value = values.back();
  nodes.push_back(last_leaf);
  return DecisionTree(task, 1, n_classes, std::move(nodes));
}

}  // namespace ensalloc::testing
