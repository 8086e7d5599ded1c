#include "ensalloc/sufficiency.hpp"

#include <cmath>
#include <stdexcept>

namespace ensalloc {

double classification_loss(std::span<const double> proba, int y) {
  double sum = 0.0;
  for (double p : proba) sum += p;
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("probability vector not normalized");
  }
  if (y < 0 || y >= static_cast<int>(proba.size())) {
    throw std::invalid_argument("class index out of range");
  }
  return -std::log(std::max(proba[static_cast<std::size_t>(y)], kProbabilityFloor));
}

double regression_loss(double prediction, double y) {
  const double r = prediction - y;
  return r * r;
}

double underlying_loss(TaskKind task, const ModelOutputs& outputs, int index,
                       double y) {
  if (task == TaskKind::classification) {
    return classification_loss(outputs.proba[static_cast<std::size_t>(index)],
                               static_cast<int>(y));
  }
  return regression_loss(outputs.value[static_cast<std::size_t>(index)], y);
}

std::vector<double> model_losses(const PredictionModel& model, const Dataset& data,
                                 Execution exec) {
  const ModelOutputs outputs = batch_outputs(model, data, exec);
  const int n = data.size();
  std::vector<double> losses(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    losses[static_cast<std::size_t>(i)] = underlying_loss(
        data.task, outputs, i, data.observations[static_cast<std::size_t>(i)].y);
  }
  return losses;
}

std::string to_string(SufficiencyMode mode) {
  switch (mode) {
    case SufficiencyMode::classification_equality: return "classification-equality";
    case SufficiencyMode::regression_epsilon: return "regression-epsilon";
    case SufficiencyMode::always_sufficient: return "always-sufficient";
    case SufficiencyMode::never_sufficient: return "never-sufficient";
  }
  return "?";
}

SufficiencyMode sufficiency_mode_from_string(const std::string& s) {
  if (s == "classification-equality") return SufficiencyMode::classification_equality;
  if (s == "regression-epsilon") return SufficiencyMode::regression_epsilon;
  if (s == "always-sufficient") return SufficiencyMode::always_sufficient;
  if (s == "never-sufficient") return SufficiencyMode::never_sufficient;
  throw std::invalid_argument("unknown sufficiency mode: " + s);
}

void SufficiencyConfig::validate() const {
  const bool needs_epsilon = mode == SufficiencyMode::regression_epsilon;
  if (needs_epsilon != epsilon.has_value()) {
    throw std::invalid_argument(
        "epsilon must be present exactly when mode is regression-epsilon");
  }
  if (epsilon && *epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be non-negative");
  }
}

double epsilon_from_validation(const PredictionModel& g, const PredictionModel& b,
                               const Dataset& validation) {
  if (validation.size() == 0) {
    throw std::invalid_argument("validation set is empty");
  }
  const std::vector<double> lg = model_losses(g, validation);
  const std::vector<double> lb = model_losses(b, validation);
  double mg = 0.0, mb = 0.0;
  for (double v : lg) mg += v;
  for (double v : lb) mb += v;
  mg /= validation.size();
  mb /= validation.size();
  return std::min(mg, mb);
}

int sufficiency_indicator(TaskKind task, const ModelOutputs& outputs, int index,
                          double y, const SufficiencyConfig& config) {
  config.validate();
  switch (config.mode) {
    case SufficiencyMode::always_sufficient: return 1;
    case SufficiencyMode::never_sufficient: return 0;
    case SufficiencyMode::classification_equality: {
      if (task != TaskKind::classification) {
        throw std::invalid_argument("classification-equality needs a classification task");
      }
      const auto& p = outputs.proba[static_cast<std::size_t>(index)];
      return argmax_class(p) == static_cast<int>(y) ? 1 : 0;
    }
    case SufficiencyMode::regression_epsilon: {
      if (task != TaskKind::regression) {
        throw std::invalid_argument("regression-epsilon needs a regression task");
      }
      // strict: loss exactly at epsilon is insufficient
      return underlying_loss(task, outputs, index, y) < *config.epsilon ? 1 : 0;
    }
  }
  return 0;
}

std::string to_string(Category c) {
  switch (c) {
    case Category::Zb: return "Zb";
    case Category::Z0: return "Z0";
    case Category::Z2: return "Z2";
    case Category::Zg: return "Zg";
  }
  return "?";
}

Category category_of(int s_g, int s_b) {
  if (s_g == 1 && s_b == 0) return Category::Zg;
  if (s_g == 0 && s_b == 1) return Category::Zb;
  if (s_g == 1 && s_b == 1) return Category::Z2;
  return Category::Z0;
}

double SufficiencyPartition::mean_s_g() const {
  return static_cast<double>(n_g + n_2) / size();
}

double SufficiencyPartition::mean_s_b() const {
  return static_cast<double>(n_b + n_2) / size();
}

SufficiencyPartition partition_from_indicators(std::span<const int> s_g,
                                               std::span<const int> s_b) {
  if (s_g.size() != s_b.size() || s_g.empty()) {
    throw std::invalid_argument("indicator sequences must be non-empty and equal length");
  }
  SufficiencyPartition part;
  part.s_g.assign(s_g.begin(), s_g.end());
  part.s_b.assign(s_b.begin(), s_b.end());
  part.category.reserve(s_g.size());
  for (std::size_t i = 0; i < s_g.size(); ++i) {
    const Category c = category_of(s_g[i], s_b[i]);
    part.category.push_back(c);
    switch (c) {
      case Category::Zg: ++part.n_g; break;
      case Category::Zb: ++part.n_b; break;
      case Category::Z2: ++part.n_2; break;
      case Category::Z0: ++part.n_0; break;
    }
  }
  return part;
}

SufficiencyPartition partition(const PredictionModel& g, const PredictionModel& b,
                               const Dataset& data, const SufficiencyConfig& config,
                               Execution exec) {
  config.validate();
  const ModelOutputs out_g = batch_outputs(g, data, exec);
  const ModelOutputs out_b = batch_outputs(b, data, exec);
  const int n = data.size();
  std::vector<int> s_g(static_cast<std::size_t>(n)), s_b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double y = data.observations[static_cast<std::size_t>(i)].y;
    s_g[static_cast<std::size_t>(i)] = sufficiency_indicator(data.task, out_g, i, y, config);
    s_b[static_cast<std::size_t>(i)] = sufficiency_indicator(data.task, out_b, i, y, config);
  }
  return partition_from_indicators(s_g, s_b);
}

}  // namespace ensalloc
