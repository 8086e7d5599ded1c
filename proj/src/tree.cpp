#include "ensalloc/tree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace ensalloc {
namespace detail {

namespace {

constexpr double kMinGain = 1e-12;

struct FeatureBest {
  double gain = -1.0;
  double threshold = 0.0;
  int left_count = 0;
};

// Scans one feature of one node for the best impurity-decreasing cut.
// `pairs` is scratch of at least the node size. Sorting by (value, target)
// pins the prefix-sum order, so the result does not depend on the incoming
// row order.
FeatureBest scan_feature(const TrainView& view, std::span<const int> rows,
                         int feature, int n_classes, int child_min,
                         std::vector<std::pair<double, double>>& pairs,
                         std::vector<double>& class_scratch) {
  const int m = static_cast<int>(rows.size());
  pairs.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const int r = rows[static_cast<std::size_t>(i)];
    pairs[static_cast<std::size_t>(i)] = {view.at(r, feature), view.y[r]};
  }
  std::sort(pairs.begin(), pairs.end());

  FeatureBest best;
  if (pairs.front().first == pairs.back().first) return best;  // constant

  if (n_classes > 0) {
    class_scratch.assign(static_cast<std::size_t>(2 * n_classes), 0.0);
    double* left = class_scratch.data();
    double* total = class_scratch.data() + n_classes;
    for (int i = 0; i < m; ++i) {
      total[static_cast<int>(pairs[static_cast<std::size_t>(i)].second)] += 1.0;
    }
    double sq_total = 0.0;
    for (int k = 0; k < n_classes; ++k) sq_total += total[k] * total[k];

    for (int i = 0; i < m - 1; ++i) {
      left[static_cast<int>(pairs[static_cast<std::size_t>(i)].second)] += 1.0;
      const int ml = i + 1;
      const int mr = m - ml;
      if (ml < child_min) continue;
      if (mr < child_min) break;
      const double lo = pairs[static_cast<std::size_t>(i)].first;
      const double hi = pairs[static_cast<std::size_t>(i + 1)].first;
      if (!(lo < hi)) continue;
      double sq_left = 0.0, sq_right = 0.0;
      for (int k = 0; k < n_classes; ++k) {
        sq_left += left[k] * left[k];
        const double rk = total[k] - left[k];
        sq_right += rk * rk;
      }
      const double gain = sq_left / ml + sq_right / mr - sq_total / m;
      if (gain > best.gain) {
        double t = lo + (hi - lo) / 2.0;
        if (t >= hi) t = lo;
        best = {gain, t, ml};
      }
    }
  } else {
    double sum_total = 0.0;
    for (int i = 0; i < m; ++i) sum_total += pairs[static_cast<std::size_t>(i)].second;

    double sum_left = 0.0;
    for (int i = 0; i < m - 1; ++i) {
      sum_left += pairs[static_cast<std::size_t>(i)].second;
      const int ml = i + 1;
      const int mr = m - ml;
      if (ml < child_min) continue;
      if (mr < child_min) break;
      const double lo = pairs[static_cast<std::size_t>(i)].first;
      const double hi = pairs[static_cast<std::size_t>(i + 1)].first;
      if (!(lo < hi)) continue;
      const double sum_right = sum_total - sum_left;
      const double gain = sum_left * sum_left / ml + sum_right * sum_right / mr -
                          sum_total * sum_total / m;
      if (gain > best.gain) {
        double t = lo + (hi - lo) / 2.0;
        if (t >= hi) t = lo;
        best = {gain, t, ml};
      }
    }
  }
  return best;
}

struct NodeBest {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Best split over all features. The parallel variant scans features under
// OpenMP into per-feature slots; the reduce below always runs serially in
// feature order, so both variants pick the same split.
NodeBest best_split(const TrainView& view, std::span<const int> rows,
                    int n_classes, int child_min, Execution exec) {
  const int d = view.d;
  std::vector<FeatureBest> per_feature(static_cast<std::size_t>(d));
  if (exec == Execution::parallel) {
#pragma omp parallel
    {
      std::vector<std::pair<double, double>> pairs;
      std::vector<double> class_scratch;
#pragma omp for schedule(static)
      for (int f = 0; f < d; ++f) {
        per_feature[static_cast<std::size_t>(f)] =
            scan_feature(view, rows, f, n_classes, child_min, pairs, class_scratch);
      }
    }
  } else {
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> class_scratch;
    for (int f = 0; f < d; ++f) {
      per_feature[static_cast<std::size_t>(f)] =
          scan_feature(view, rows, f, n_classes, child_min, pairs, class_scratch);
    }
  }

  NodeBest best;
  for (int f = 0; f < d; ++f) {
    const FeatureBest& fb = per_feature[static_cast<std::size_t>(f)];
    if (fb.gain > kMinGain && (!best.valid || fb.gain > best.gain)) {
      best = {true, f, fb.threshold, fb.gain};
    }
  }
  return best;
}

std::vector<double> leaf_value(const TrainView& view, std::span<const int> rows,
                               int n_classes) {
  if (n_classes > 0) {
    std::vector<double> freq(static_cast<std::size_t>(n_classes), 0.0);
    for (int r : rows) freq[static_cast<std::size_t>(static_cast<int>(view.y[r]))] += 1.0;
    const double m = static_cast<double>(rows.size());
    for (double& f : freq) f /= m;
    return freq;
  }
  double sum = 0.0;
  for (int r : rows) sum += view.y[r];
  return {sum / static_cast<double>(rows.size())};
}

struct HeapEntry {
  double gain = 0.0;
  int node = 0;
  NodeBest split;
};

struct HeapOrder {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.node > b.node;  // earlier node wins ties
  }
};

}  // namespace

TreeStructure build_tree(const TrainView& view, std::vector<int> rows,
                         const TreeParams& params, int n_classes,
                         Execution exec) {
  if (rows.empty()) throw std::invalid_argument("cannot build a tree on zero rows");
  if (params.min_split < 1 || params.max_leaf < 1 || params.max_depth < 0) {
    throw std::invalid_argument("tree constraints must be positive");
  }
  const int child_min = std::max(1, (params.min_split + 1) / 2);

  TreeStructure t;
  t.rows = std::move(rows);
  t.nodes.emplace_back();
  t.node_depth.push_back(0);
  t.node_range.push_back({0, static_cast<int>(t.rows.size())});
  t.leaf_count = 1;

  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> frontier;
  auto consider = [&](int node) {
    const auto [b, e] = t.node_range[static_cast<std::size_t>(node)];
    if (e - b < params.min_split) return;
    if (t.node_depth[static_cast<std::size_t>(node)] >= params.max_depth) return;
    const NodeBest split =
        best_split(view, std::span<const int>(t.rows.data() + b, static_cast<std::size_t>(e - b)),
                   n_classes, child_min, exec);
    if (split.valid) frontier.push({split.gain, node, split});
  };
  consider(0);

  while (!frontier.empty() && t.leaf_count < params.max_leaf) {
    const HeapEntry entry = frontier.top();
    frontier.pop();
    const int node = entry.node;
    const auto [b, e] = t.node_range[static_cast<std::size_t>(node)];

    auto mid_it = std::stable_partition(
        t.rows.begin() + b, t.rows.begin() + e, [&](int r) {
          return view.at(r, entry.split.feature) <= entry.split.threshold;
        });
    const int mid = static_cast<int>(mid_it - t.rows.begin());

    const int left = static_cast<int>(t.nodes.size());
    const int right = left + 1;
    t.nodes.emplace_back();
    t.nodes.emplace_back();
    t.node_depth.push_back(t.node_depth[static_cast<std::size_t>(node)] + 1);
    t.node_depth.push_back(t.node_depth[static_cast<std::size_t>(node)] + 1);
    t.node_range.push_back({b, mid});
    t.node_range.push_back({mid, e});

    TreeNode& parent = t.nodes[static_cast<std::size_t>(node)];
    parent.feature = entry.split.feature;
    parent.threshold = entry.split.threshold;
    parent.left = left;
    parent.right = right;
    parent.value.clear();
    ++t.leaf_count;

    consider(left);
    consider(right);
  }

  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i].is_leaf()) {
      const auto [b, e] = t.node_range[i];
      t.nodes[i].value = leaf_value(
          view, std::span<const int>(t.rows.data() + b, static_cast<std::size_t>(e - b)),
          n_classes);
    }
  }
  return t;
}

int tree_apply(const std::vector<TreeNode>& nodes, std::span<const double> x) {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& cur = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(cur.feature)] <= cur.threshold ? cur.left
                                                                     : cur.right;
  }
  return node;
}

}  // namespace detail

std::vector<double> DecisionTree::predict_proba(std::span<const double> x) const {
  if (task_ != TaskKind::classification) {
    throw std::logic_error("predict_proba on a regression tree");
  }
  check_input(x);
  return nodes_[static_cast<std::size_t>(detail::tree_apply(nodes_, x))].value;
}

double DecisionTree::predict_value(std::span<const double> x) const {
  if (task_ != TaskKind::regression) {
    throw std::logic_error("predict_value on a classification tree");
  }
  check_input(x);
  return nodes_[static_cast<std::size_t>(detail::tree_apply(nodes_, x))].value[0];
}

int DecisionTree::leaf_count() const {
  int leaves = 0;
  for (const TreeNode& n : nodes_) leaves += n.is_leaf() ? 1 : 0;
  return leaves;
}

int DecisionTree::depth() const {
  // nodes_ layout does not store depth; recompute by walking
  std::vector<int> depth(nodes_.size(), 0);
  int max_depth = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
      max_depth = std::max(max_depth, depth[i] + 1);
    }
  }
  return max_depth;
}

nlohmann::ordered_json DecisionTree::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = "tree";
  j["task"] = to_string(task_);
  j["feature_dim"] = d_;
  j["n_classes"] = k_;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const TreeNode& n : nodes_) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"value", n.value}});
  }
  j["nodes"] = std::move(nodes);
  return j;
}

DecisionTree fit_tree(const Dataset& train, const TreeParams& params,
                      Execution exec) {
  train.validate();
  const int n = train.size();
  const int d = train.feature_dim();
  std::vector<double> x(static_cast<std::size_t>(n) * d);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Observation& obs = train.observations[static_cast<std::size_t>(i)];
    std::copy(obs.x.begin(), obs.x.end(), x.begin() + static_cast<std::size_t>(i) * d);
    y[static_cast<std::size_t>(i)] = obs.y;
  }
  detail::TrainView view{n, d, x.data(), y.data()};
  std::vector<int> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
  const int k = train.task == TaskKind::classification ? train.n_classes : 0;
  detail::TreeStructure t = detail::build_tree(view, std::move(rows), params, k, exec);
  return DecisionTree(train.task, d, train.n_classes, std::move(t.nodes));
}

}  // namespace ensalloc
