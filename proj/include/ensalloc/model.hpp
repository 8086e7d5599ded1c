#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ensalloc/data.hpp"
#include "ensalloc/parallel.hpp"

#include "json.hpp"

namespace ensalloc {

/// Contract shared by every fitted model. Prediction is deterministic after
/// fit; class-probability vectors are non-negative and sum to 1 within 1e-9.
class PredictionModel {
 public:
  virtual ~PredictionModel() = default;

  virtual TaskKind task() const = 0;
  virtual int feature_dim() const = 0;
  virtual int n_classes() const = 0;  // 0 for regression
  virtual std::string family() const = 0;

  /// Classification only. Throws on dimension mismatch.
  virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;

  /// Regression only. Throws on dimension mismatch.
  virtual double predict_value(std::span<const double> x) const = 0;

  virtual nlohmann::ordered_json to_json() const = 0;

  void check_input(std::span<const double> x) const;
};

/// argmax of predict_proba with lowest-index tie-break.
int predict_class(const PredictionModel& model, std::span<const double> x);
int argmax_class(std::span<const double> proba);

/// Batch outputs for one model over a dataset: probability rows for
/// classification, plain values for regression.
struct ModelOutputs {
  TaskKind task = TaskKind::classification;
  std::vector<std::vector<double>> proba;  // classification, n rows
  std::vector<double> value;               // regression, n entries

  int size() const {
    return task == TaskKind::classification ? static_cast<int>(proba.size())
                                            : static_cast<int>(value.size());
  }
};

ModelOutputs batch_outputs(const PredictionModel& model, const Dataset& data,
                           Execution exec = Execution::parallel);

}  // namespace ensalloc
