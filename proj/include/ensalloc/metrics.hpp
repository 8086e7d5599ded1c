#pragma once

#include <optional>

#include "ensalloc/allocation.hpp"

namespace ensalloc {

/// Strictly increasing levels including 0 and 1.
std::vector<double> make_q_grid(int points);
void validate_q_grid(std::span<const double> q_grid);

struct PerformanceCurve {
  std::vector<double> q;
  std::vector<double> t_bar;
  std::vector<double> t_bar_g;
  std::vector<AllocatorTag> tag;
};

/// Evaluates per-q masks against a partition of the same observations.
PerformanceCurve curve_from_masks(std::span<const double> q_grid,
                                  const std::vector<std::vector<std::uint8_t>>& masks,
                                  const SufficiencyPartition& part,
                                  AllocatorTag tag);

/// Curve of a fixed score sequence ranked transductively per q.
PerformanceCurve curve_from_scores(std::span<const double> q_grid,
                                   std::span<const double> scores,
                                   const SufficiencyPartition& part,
                                   AllocatorTag tag);

/// Trapezoidal area under (q, value) over [0, 1].
double auc(std::span<const double> q_grid, std::span<const double> values);
double auc(const PerformanceCurve& curve);

/// (learned - random) / (oracle - random); empty when the denominator is
/// degenerate (|oracle - random| < 1e-12).
std::optional<double> ppcr(double learned_auc, double random_auc, double oracle_auc);

/// Fractions of grid points at least as good / strictly better than the best
/// standalone component.
double pqeom(const PerformanceCurve& curve, double perf_g, double perf_b);
double pqom(const PerformanceCurve& curve, double perf_g, double perf_b);

/// Fraction of grid points where the feature-dependent allocator was chosen.
double pcfa(std::span<const AllocatorTag> tags);

/// Highest q with t_bar(q) >= 0.95 * max(perf_g, perf_b); 0 when none.
double tqm95(const PerformanceCurve& curve, double perf_g, double perf_b);

/// Maximum of t_bar and the highest grid q attaining it (within 1e-12).
std::pair<double, double> max_acc_argmax(const PerformanceCurve& curve);

/// Fraction of exact category matches.
double s_acc(std::span<const Category> estimated, std::span<const Category> truth);

struct MetricsReport {
  double auc = 0.0;
  std::optional<double> ppcr;
  double pqeom = 0.0;
  double pqom = 0.0;
  double pcfa = 0.0;
  double tqm95 = 0.0;
  double max_acc = 0.0;
  double argmax_q = 0.0;
  double s_acc = 0.0;

  nlohmann::ordered_json to_json() const;
};

}  // namespace ensalloc
