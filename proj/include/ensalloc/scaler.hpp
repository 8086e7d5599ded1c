#pragma once

#include "ensalloc/data.hpp"

namespace ensalloc {

/// Min/max affine rescaling into [-1, 1], fitted on the training split only.
/// Regression responses are rescaled with the same rule so that loss and
/// epsilon logic operate on a scale-free response. Constant columns map to 0.
struct Scaler {
  std::vector<double> feature_min;
  std::vector<double> feature_max;
  bool scales_response = false;
  double response_min = 0.0;
  double response_max = 0.0;

  int feature_dim() const { return static_cast<int>(feature_min.size()); }

  double transform_feature(int j, double v) const;
  double transform_response(double y) const;
  double inverse_response(double scaled) const;
};

Scaler fit_scaler(const Dataset& data);

/// Applies the affine map without clamping, so out-of-range values land
/// outside [-1, 1]. Throws on feature-dimension mismatch.
Dataset apply_scaler(const Scaler& scaler, const Dataset& data);

}  // namespace ensalloc
