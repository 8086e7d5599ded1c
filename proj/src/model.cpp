#include "ensalloc/model.hpp"

#include <stdexcept>

namespace ensalloc {

void PredictionModel::check_input(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != feature_dim()) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                " features, model expects " +
                                std::to_string(feature_dim()));
  }
}

int argmax_class(std::span<const double> proba) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(proba.size()); ++k) {
    if (proba[static_cast<std::size_t>(k)] > proba[static_cast<std::size_t>(best)]) {
      best = k;
    }
  }
  return best;
}

int predict_class(const PredictionModel& model, std::span<const double> x) {
  const std::vector<double> p = model.predict_proba(x);
  return argmax_class(p);
}

ModelOutputs batch_outputs(const PredictionModel& model, const Dataset& data,
                           Execution exec) {
  ModelOutputs out;
  out.task = model.task();
  const int n = data.size();
  if (out.task == TaskKind::classification) {
    out.proba.resize(static_cast<std::size_t>(n));
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n; ++i) {
        out.proba[static_cast<std::size_t>(i)] =
            model.predict_proba(data.observations[static_cast<std::size_t>(i)].x);
      }
    } else {
      for (int i = 0; i < n; ++i) {
        out.proba[static_cast<std::size_t>(i)] =
            model.predict_proba(data.observations[static_cast<std::size_t>(i)].x);
      }
    }
  } else {
    out.value.resize(static_cast<std::size_t>(n));
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n; ++i) {
        out.value[static_cast<std::size_t>(i)] =
            model.predict_value(data.observations[static_cast<std::size_t>(i)].x);
      }
    } else {
      for (int i = 0; i < n; ++i) {
        out.value[static_cast<std::size_t>(i)] =
            model.predict_value(data.observations[static_cast<std::size_t>(i)].x);
      }
    }
  }
  return out;
}

}  // namespace ensalloc
