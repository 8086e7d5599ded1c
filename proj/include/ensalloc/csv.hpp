#pragma once

#include <optional>
#include <string>

#include "ensalloc/data.hpp"
#include "ensalloc/scaler.hpp"

namespace ensalloc {

/// Reads a comma-separated file with one header row. Every non-target column
/// must parse as a decimal-point real; classification targets may be
/// arbitrary strings and are mapped to dense class indices in first
/// appearance order. Ids are assigned in row order starting at 0.
///
/// Throws std::runtime_error naming the offending row and column for missing
/// files, unknown target columns, blank or non-numeric feature cells, and
/// empty datasets.
Dataset load_csv(const std::string& path, TaskKind task,
                 const std::string& target_column);

/// Writes features plus target with a header row, one observation per line.
/// Classification targets are written as their original class labels.
void save_csv(const Dataset& data, const std::string& path);

/// JSON sidecar accompanying a persisted CSV. Fields: task, n_classes,
/// target_column, class_labels, and scaler (null until one is fitted) with
/// feature_min / feature_max / response_min / response_max.
void save_sidecar(const Dataset& data, const std::optional<Scaler>& scaler,
                  const std::string& path);

}  // namespace ensalloc
