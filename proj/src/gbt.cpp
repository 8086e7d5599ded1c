#include "ensalloc/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ensalloc {

namespace {

constexpr double kProbFloor = 1e-12;

void softmax_inplace(std::vector<double>& scores) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    z += s;
  }
  for (double& s : scores) s /= z;
}

double leaf_sum(const std::vector<TreeNode>& nodes, std::span<const double> x) {
  return nodes[static_cast<std::size_t>(detail::tree_apply(nodes, x))].value[0];
}

}  // namespace

GradientBoostedTrees fit_gbt(const Dataset& train, const GbtParams& params,
                             Execution exec) {
  train.validate();
  if (params.learning_rate <= 0.0) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (params.subsample <= 0.0 || params.subsample > 1.0) {
    throw std::invalid_argument("subsample must be in (0, 1]");
  }
  if (params.n_estimators < 0 || params.max_depth < 1) {
    throw std::invalid_argument("n_estimators must be >= 0 and max_depth >= 1");
  }

  const int n = train.size();
  const int d = train.feature_dim();
  const bool classification = train.task == TaskKind::classification;
  const int k = classification ? train.n_classes : 1;

  std::vector<double> x(static_cast<std::size_t>(n) * d);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Observation& obs = train.observations[static_cast<std::size_t>(i)];
    std::copy(obs.x.begin(), obs.x.end(), x.begin() + static_cast<std::size_t>(i) * d);
    y[static_cast<std::size_t>(i)] = obs.y;
  }

  // base score: log class priors / response mean
  std::vector<double> base;
  if (classification) {
    std::vector<double> prior(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < n; ++i) prior[static_cast<std::size_t>(static_cast<int>(y[static_cast<std::size_t>(i)]))] += 1.0;
    for (int c = 0; c < k; ++c) {
      base.push_back(std::log(std::max(prior[static_cast<std::size_t>(c)] / n, kProbFloor)));
    }
  } else {
    double sum = 0.0;
    for (double v : y) sum += v;
    base.push_back(sum / n);
  }

  // raw scores F for every training row
  std::vector<double> scores(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) {
      scores[static_cast<std::size_t>(i) * k + c] = base[static_cast<std::size_t>(c)];
    }
  }

  std::mt19937_64 rng(params.seed);
  std::vector<int> sample_pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) sample_pool[static_cast<std::size_t>(i)] = i;
  const int sample_size =
      std::max(1, static_cast<int>(std::nearbyint(params.subsample * n)));

  TreeParams tree_params;
  tree_params.min_split = 2;
  tree_params.max_depth = params.max_depth;

  std::vector<double> residual(static_cast<std::size_t>(n));
  std::vector<double> prob(static_cast<std::size_t>(k));
  std::vector<std::vector<std::vector<TreeNode>>> stages;
  stages.reserve(static_cast<std::size_t>(params.n_estimators));

  for (int stage = 0; stage < params.n_estimators; ++stage) {
    std::vector<int> rows;
    if (sample_size == n) {
      rows = sample_pool;
    } else {
      // partial Fisher-Yates over a persistent pool
      for (int i = 0; i < sample_size; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(sample_pool[static_cast<std::size_t>(i)],
                  sample_pool[static_cast<std::size_t>(pick(rng))]);
      }
      rows.assign(sample_pool.begin(), sample_pool.begin() + sample_size);
      std::sort(rows.begin(), rows.end());
    }

    std::vector<std::vector<TreeNode>> stage_trees;
    stage_trees.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      if (classification) {
        for (int idx = 0; idx < n; ++idx) {
          residual[static_cast<std::size_t>(idx)] = 0.0;  // only sampled rows matter
        }
        for (int r : rows) {
          for (int cc = 0; cc < k; ++cc) {
            prob[static_cast<std::size_t>(cc)] = scores[static_cast<std::size_t>(r) * k + cc];
          }
          softmax_inplace(prob);
          const double target = static_cast<int>(y[static_cast<std::size_t>(r)]) == c ? 1.0 : 0.0;
          residual[static_cast<std::size_t>(r)] = target - prob[static_cast<std::size_t>(c)];
        }
      } else {
        for (int r : rows) {
          residual[static_cast<std::size_t>(r)] =
              y[static_cast<std::size_t>(r)] - scores[static_cast<std::size_t>(r)];
        }
      }

      detail::TrainView view{n, d, x.data(), residual.data()};
      detail::TreeStructure t =
          detail::build_tree(view, rows, tree_params, /*n_classes=*/0, exec);

      // Newton leaf step for log-loss; plain mean (already in value) for MSE.
      for (std::size_t node = 0; node < t.nodes.size(); ++node) {
        if (!t.nodes[node].is_leaf()) continue;
        double gamma;
        if (classification) {
          const auto [b, e] = t.node_range[node];
          double num = 0.0, den = 0.0;
          for (int p = b; p < e; ++p) {
            const double r = residual[static_cast<std::size_t>(t.rows[static_cast<std::size_t>(p)])];
            num += r;
            den += std::abs(r) * (1.0 - std::abs(r));
          }
          gamma = den < kProbFloor
                      ? 0.0
                      : (static_cast<double>(k - 1) / k) * num / den;
        } else {
          gamma = t.nodes[node].value[0];
        }
        t.nodes[node].value[0] = params.learning_rate * gamma;
      }

      // accumulate this tree into the raw scores of every row
      const std::vector<TreeNode>& nodes = t.nodes;
      if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
          scores[static_cast<std::size_t>(i) * k + c] += leaf_sum(
              nodes, std::span<const double>(x.data() + static_cast<std::size_t>(i) * d,
                                             static_cast<std::size_t>(d)));
        }
      } else {
        for (int i = 0; i < n; ++i) {
          scores[static_cast<std::size_t>(i) * k + c] += leaf_sum(
              nodes, std::span<const double>(x.data() + static_cast<std::size_t>(i) * d,
                                             static_cast<std::size_t>(d)));
        }
      }
      stage_trees.push_back(std::move(t.nodes));
    }
    stages.push_back(std::move(stage_trees));
  }

  return GradientBoostedTrees(train.task, d, train.n_classes, params,
                              std::move(base), std::move(stages));
}

std::vector<double> GradientBoostedTrees::raw_scores(std::span<const double> x) const {
  check_input(x);
  const int k = task_ == TaskKind::classification ? k_ : 1;
  std::vector<double> scores(base_.begin(), base_.end());
  scores.resize(static_cast<std::size_t>(k));
  for (const auto& stage : stages_) {
    for (int c = 0; c < k; ++c) {
      scores[static_cast<std::size_t>(c)] += leaf_sum(stage[static_cast<std::size_t>(c)], x);
    }
  }
  return scores;
}

std::vector<double> GradientBoostedTrees::predict_proba(std::span<const double> x) const {
  if (task_ != TaskKind::classification) {
    throw std::logic_error("predict_proba on a regression ensemble");
  }
  std::vector<double> scores = raw_scores(x);
  softmax_inplace(scores);
  return scores;
}

double GradientBoostedTrees::predict_value(std::span<const double> x) const {
  if (task_ != TaskKind::regression) {
    throw std::logic_error("predict_value on a classification ensemble");
  }
  return raw_scores(x)[0];
}

nlohmann::ordered_json GradientBoostedTrees::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = "gbt";
  j["task"] = to_string(task_);
  j["feature_dim"] = d_;
  j["n_classes"] = k_;
  j["learning_rate"] = params_.learning_rate;
  j["n_estimators"] = params_.n_estimators;
  j["max_depth"] = params_.max_depth;
  j["subsample"] = params_.subsample;
  j["seed"] = params_.seed;
  j["base_score"] = base_;
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const auto& stage : stages_) {
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const auto& tree : stage) {
      nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
      for (const TreeNode& nd : tree) {
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"value", nd.value}});
      }
      trees.push_back(std::move(nodes));
    }
    stages.push_back(std::move(trees));
  }
  j["stages"] = std::move(stages);
  return j;
}

}  // namespace ensalloc
