#include "ensalloc/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include "ensalloc/gbt.hpp"
#include "ensalloc/linear.hpp"
#include "ensalloc/tree.hpp"

namespace ensalloc {

namespace {

std::vector<TreeNode> nodes_from_json(const nlohmann::ordered_json& arr) {
  std::vector<TreeNode> nodes;
  nodes.reserve(arr.size());
  for (const auto& jn : arr) {
    TreeNode n;
    n.feature = jn.at("feature").get<int>();
    n.threshold = jn.at("threshold").get<double>();
    n.left = jn.at("left").get<int>();
    n.right = jn.at("right").get<int>();
    n.value = jn.at("value").get<std::vector<double>>();
    nodes.push_back(std::move(n));
  }
  return nodes;
}

}  // namespace

std::unique_ptr<PredictionModel> model_from_json(const nlohmann::ordered_json& j) {
  const std::string family = j.at("family").get<std::string>();
  const TaskKind task = task_from_string(j.at("task").get<std::string>());
  const int d = j.at("feature_dim").get<int>();
  const int k = j.at("n_classes").get<int>();

  if (family == "linear") {
    return std::make_unique<LinearModel>(
        task, d, k, j.at("weights").get<std::vector<double>>(),
        j.at("l1_penalty").get<double>());
  }
  if (family == "tree") {
    return std::make_unique<DecisionTree>(task, d, k, nodes_from_json(j.at("nodes")));
  }
  if (family == "gbt") {
    GbtParams params;
    params.learning_rate = j.at("learning_rate").get<double>();
    params.n_estimators = j.at("n_estimators").get<int>();
    params.max_depth = j.at("max_depth").get<int>();
    params.subsample = j.at("subsample").get<double>();
    params.seed = j.at("seed").get<std::uint64_t>();
    std::vector<std::vector<std::vector<TreeNode>>> stages;
    for (const auto& js : j.at("stages")) {
      std::vector<std::vector<TreeNode>> stage;
      for (const auto& jt : js) stage.push_back(nodes_from_json(jt));
      stages.push_back(std::move(stage));
    }
    return std::make_unique<GradientBoostedTrees>(
        task, d, k, params, j.at("base_score").get<std::vector<double>>(),
        std::move(stages));
  }
  throw std::invalid_argument("unknown model family in JSON: " + family);
}

void save_model(const PredictionModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model.to_json().dump(2) << '\n';
}

std::unique_ptr<PredictionModel> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::ordered_json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace ensalloc
