#include "ensalloc/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace ensalloc {

std::string to_string(TaskKind task) {
  return task == TaskKind::classification ? "classification" : "regression";
}

TaskKind task_from_string(const std::string& s) {
  if (s == "classification") return TaskKind::classification;
  if (s == "regression") return TaskKind::regression;
  throw std::invalid_argument("unknown task kind: " + s);
}

void Dataset::validate() const {
  if (observations.empty()) {
    throw std::invalid_argument("dataset is empty");
  }
  const std::size_t dim = observations.front().x.size();
  if (dim == 0) {
    throw std::invalid_argument("observations must have at least one feature");
  }
  std::unordered_set<int> ids;
  ids.reserve(observations.size());
  for (const Observation& obs : observations) {
    if (obs.x.size() != dim) {
      throw std::invalid_argument("ragged feature dimensions in dataset");
    }
    for (double v : obs.x) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("non-finite feature value at id " +
                                    std::to_string(obs.id));
      }
    }
    if (!ids.insert(obs.id).second) {
      throw std::invalid_argument("duplicate observation id " +
                                  std::to_string(obs.id));
    }
    if (task == TaskKind::classification) {
      const double y = obs.y;
      if (y != std::floor(y) || y < 0 || y >= n_classes) {
        throw std::invalid_argument("class label out of range at id " +
                                    std::to_string(obs.id));
      }
    } else if (!std::isfinite(obs.y)) {
      throw std::invalid_argument("non-finite response at id " +
                                  std::to_string(obs.id));
    }
  }
}

Dataset Dataset::subset(std::span<const int> indices) const {
  Dataset out;
  out.task = task;
  out.n_classes = n_classes;
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.class_labels = class_labels;
  out.observations.reserve(indices.size());
  for (int i : indices) {
    out.observations.push_back(observations.at(static_cast<std::size_t>(i)));
  }
  return out;
}

namespace {

// round-half-to-even of a non-negative real
long round_even(double v) { return std::lround(std::nearbyint(v)); }

}  // namespace

SplitDataset split(const Dataset& data, std::array<double, 3> ratios,
                   std::uint64_t seed) {
  const int n = data.size();
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (ratios[0] <= 0 || ratios[1] <= 0 || ratios[2] <= 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must be positive and sum to 1");
  }
  if (n < 10) {
    throw std::invalid_argument("dataset too small to split (n < 10)");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const int cut1 = static_cast<int>(round_even(ratios[0] * n));
  const int cut2 = static_cast<int>(round_even((ratios[0] + ratios[1]) * n));
  if (cut1 < 1 || cut2 <= cut1 || cut2 >= n) {
    throw std::invalid_argument(
        "dataset too small to give each split at least one observation");
  }

  SplitDataset out;
  out.seed = seed;
  out.train = data.subset(std::span<const int>(order.data(), cut1));
  out.validation = data.subset(
      std::span<const int>(order.data() + cut1, static_cast<std::size_t>(cut2 - cut1)));
  out.test = data.subset(
      std::span<const int>(order.data() + cut2, static_cast<std::size_t>(n - cut2)));
  return out;
}

}  // namespace ensalloc
