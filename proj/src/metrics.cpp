#include "ensalloc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ensalloc {

std::vector<double> make_q_grid(int points) {
  if (points < 2) throw std::invalid_argument("q grid needs at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

void validate_q_grid(std::span<const double> q_grid) {
  if (q_grid.size() < 2) throw std::invalid_argument("q grid needs at least two points");
  if (q_grid.front() != 0.0 || q_grid.back() != 1.0) {
    throw std::invalid_argument("q grid must include 0 and 1");
  }
  for (std::size_t i = 1; i < q_grid.size(); ++i) {
    if (!(q_grid[i] > q_grid[i - 1])) {
      throw std::invalid_argument("q grid must be strictly increasing");
    }
  }
}

PerformanceCurve curve_from_masks(std::span<const double> q_grid,
                                  const std::vector<std::vector<std::uint8_t>>& masks,
                                  const SufficiencyPartition& part,
                                  AllocatorTag tag) {
  if (masks.size() != q_grid.size()) {
    throw std::invalid_argument("one mask per grid point required");
  }
  PerformanceCurve curve;
  curve.q.assign(q_grid.begin(), q_grid.end());
  curve.t_bar.reserve(q_grid.size());
  curve.t_bar_g.reserve(q_grid.size());
  curve.tag.assign(q_grid.size(), tag);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    curve.t_bar.push_back(sufficient_performance(part, masks[i]));
    curve.t_bar_g.push_back(sufficient_glass_performance(part, masks[i]));
  }
  return curve;
}

PerformanceCurve curve_from_scores(std::span<const double> q_grid,
                                   std::span<const double> scores,
                                   const SufficiencyPartition& part,
                                   AllocatorTag tag) {
  const DesirabilityRanking ranking = desirability_percentile(scores);
  std::vector<std::vector<std::uint8_t>> masks;
  masks.reserve(q_grid.size());
  for (double q : q_grid) masks.push_back(allocate_top_q(ranking, q));
  return curve_from_masks(q_grid, masks, part, tag);
}

double auc(std::span<const double> q_grid, std::span<const double> values) {
  if (q_grid.size() != values.size() || q_grid.size() < 2) {
    throw std::invalid_argument("auc needs matching grids with >= 2 points");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < q_grid.size(); ++i) {
    area += (q_grid[i] - q_grid[i - 1]) * (values[i] + values[i - 1]) / 2.0;
  }
  return area;
}

double auc(const PerformanceCurve& curve) { return auc(curve.q, curve.t_bar); }

std::optional<double> ppcr(double learned_auc, double random_auc, double oracle_auc) {
  const double denom = oracle_auc - random_auc;
  if (std::abs(denom) < 1e-12) return std::nullopt;
  return (learned_auc - random_auc) / denom;
}

double pqeom(const PerformanceCurve& curve, double perf_g, double perf_b) {
  const double best = std::max(perf_g, perf_b);
  int count = 0;
  for (double v : curve.t_bar) count += v >= best ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(curve.t_bar.size());
}

double pqom(const PerformanceCurve& curve, double perf_g, double perf_b) {
  const double best = std::max(perf_g, perf_b);
  int count = 0;
  for (double v : curve.t_bar) count += v > best ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(curve.t_bar.size());
}

double pcfa(std::span<const AllocatorTag> tags) {
  if (tags.empty()) throw std::invalid_argument("selection map is empty");
  int count = 0;
  for (AllocatorTag t : tags) count += t == AllocatorTag::feature_dependent ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(tags.size());
}

double tqm95(const PerformanceCurve& curve, double perf_g, double perf_b) {
  const double threshold = 0.95 * std::max(perf_g, perf_b);
  double best_q = 0.0;
  for (std::size_t i = 0; i < curve.q.size(); ++i) {
    if (curve.t_bar[i] >= threshold) best_q = curve.q[i];
  }
  return best_q;
}

std::pair<double, double> max_acc_argmax(const PerformanceCurve& curve) {
  if (curve.q.empty()) throw std::invalid_argument("curve is empty");
  double best = curve.t_bar[0];
  for (double v : curve.t_bar) best = std::max(best, v);
  double arg = 0.0;
  for (std::size_t i = 0; i < curve.q.size(); ++i) {
    if (curve.t_bar[i] >= best - 1e-12) arg = curve.q[i];
  }
  return {best, arg};
}

double s_acc(std::span<const Category> estimated, std::span<const Category> truth) {
  if (estimated.size() != truth.size() || estimated.empty()) {
    throw std::invalid_argument("category sequences must be non-empty and equal length");
  }
  int match = 0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    match += estimated[i] == truth[i] ? 1 : 0;
  }
  return static_cast<double>(match) / static_cast<double>(estimated.size());
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["auc"] = auc;
  if (ppcr) {
    j["ppcr"] = *ppcr;
  } else {
    j["ppcr"] = nullptr;
  }
  j["pqeom"] = pqeom;
  j["pqom"] = pqom;
  j["pcfa"] = pcfa;
  j["tqm95"] = tqm95;
  j["max_acc"] = max_acc;
  j["argmax_q"] = argmax_q;
  j["s_acc"] = s_acc;
  return j;
}

}  // namespace ensalloc
