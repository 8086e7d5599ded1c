#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ensalloc {

enum class TaskKind { classification, regression };

std::string to_string(TaskKind task);
TaskKind task_from_string(const std::string& s);

/// One observation z = (x, y). For classification y holds a dense class
/// index in {0..n_classes-1}; for regression the raw response.
struct Observation {
  std::vector<double> x;
  double y = 0.0;
  int id = 0;

  int label() const { return static_cast<int>(y); }
};

struct Dataset {
  TaskKind task = TaskKind::classification;
  int n_classes = 0;  // classification only
  std::vector<Observation> observations;
  std::vector<std::string> feature_names;  // optional, kept for persistence
  std::string target_name = "y";
  std::vector<std::string> class_labels;  // original labels, index = class

  int size() const { return static_cast<int>(observations.size()); }
  int feature_dim() const {
    return observations.empty() ? 0
                                : static_cast<int>(observations.front().x.size());
  }

  // Throws std::invalid_argument when an invariant is broken: empty dataset,
  // ragged or non-finite features, duplicate ids, or out-of-range class
  // labels.
  void validate() const;

  Dataset subset(std::span<const int> indices) const;
};

struct SplitDataset {
  Dataset train;
  Dataset validation;
  Dataset test;
  std::uint64_t seed = 0;
};

/// Partitions `data` by a seeded permutation. Cut points are the cumulative
/// ratio boundaries rounded half-to-even, so the (0.70, 0.09, 0.21) default
/// on n=100 gives (70, 9, 21) and on n=10 gives (7, 1, 2). Observations keep
/// their original ids.
SplitDataset split(const Dataset& data, std::array<double, 3> ratios,
                   std::uint64_t seed);

}  // namespace ensalloc
