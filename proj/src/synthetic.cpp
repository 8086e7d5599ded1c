#include "ensalloc/synthetic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ensalloc {

int complementary_label(double x1, double x2) {
  if (x1 < 0.0) {
    return (std::abs(x1 + 0.5) + std::abs(x2) < 0.4) ? 1 : 0;
  }
  const double r = std::hypot(x1 - 0.5, x2);
  const double theta = std::atan2(x2, x1 - 0.5);
  return std::sin(2.0 * theta - 3.0 * r) > 0.0 ? 1 : 0;
}

Dataset gen_complementary_2d(int n, std::uint64_t seed, double noise) {
  if (n < 100) {
    throw std::invalid_argument("generator requires n >= 100");
  }
  if (noise < 0.0 || noise > 1.0) {
    throw std::invalid_argument("noise must be a fraction in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset data;
  data.task = TaskKind::classification;
  data.n_classes = 2;
  data.feature_names = {"x1", "x2"};
  data.class_labels = {"0", "1"};
  data.observations.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Observation obs;
    obs.id = i;
    const double x1 = coord(rng);
    const double x2 = coord(rng);
    obs.x = {x1, x2};
    int label = complementary_label(x1, x2);
    if (unit(rng) < noise) label = 1 - label;
    obs.y = label;
    data.observations.push_back(std::move(obs));
  }
  return data;
}

}  // namespace ensalloc
