#include "ensalloc/scaler.hpp"

#include <limits>
#include <stdexcept>

namespace ensalloc {

namespace {

double affine(double v, double lo, double hi) {
  if (hi <= lo) return 0.0;  // constant column
  return 2.0 * (v - lo) / (hi - lo) - 1.0;
}

}  // namespace

double Scaler::transform_feature(int j, double v) const {
  return affine(v, feature_min.at(static_cast<std::size_t>(j)),
                feature_max.at(static_cast<std::size_t>(j)));
}

double Scaler::transform_response(double y) const {
  if (!scales_response) return y;
  return affine(y, response_min, response_max);
}

double Scaler::inverse_response(double scaled) const {
  if (!scales_response || response_max <= response_min) return scaled;
  return response_min + (scaled + 1.0) * (response_max - response_min) / 2.0;
}

Scaler fit_scaler(const Dataset& data) {
  data.validate();
  const int d = data.feature_dim();
  Scaler s;
  s.feature_min.assign(static_cast<std::size_t>(d),
                       std::numeric_limits<double>::infinity());
  s.feature_max.assign(static_cast<std::size_t>(d),
                       -std::numeric_limits<double>::infinity());
  s.scales_response = data.task == TaskKind::regression;
  s.response_min = std::numeric_limits<double>::infinity();
  s.response_max = -std::numeric_limits<double>::infinity();
  for (const Observation& obs : data.observations) {
    for (int j = 0; j < d; ++j) {
      const double v = obs.x[static_cast<std::size_t>(j)];
      auto& lo = s.feature_min[static_cast<std::size_t>(j)];
      auto& hi = s.feature_max[static_cast<std::size_t>(j)];
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    if (s.scales_response) {
      if (obs.y < s.response_min) s.response_min = obs.y;
      if (obs.y > s.response_max) s.response_max = obs.y;
    }
  }
  if (!s.scales_response) {
    s.response_min = s.response_max = 0.0;
  }
  return s;
}

Dataset apply_scaler(const Scaler& scaler, const Dataset& data) {
  if (data.feature_dim() != scaler.feature_dim()) {
    throw std::invalid_argument("scaler fitted on " +
                                std::to_string(scaler.feature_dim()) +
                                " features, data has " +
                                std::to_string(data.feature_dim()));
  }
  Dataset out = data;
  for (Observation& obs : out.observations) {
    for (int j = 0; j < scaler.feature_dim(); ++j) {
      obs.x[static_cast<std::size_t>(j)] =
          scaler.transform_feature(j, obs.x[static_cast<std::size_t>(j)]);
    }
    obs.y = scaler.transform_response(obs.y);
  }
  return out;
}

}  // namespace ensalloc
