#pragma once

#include <cstdint>
#include <set>

#include "ensalloc/gbt.hpp"
#include "ensalloc/sufficiency.hpp"

namespace ensalloc {

/// Raw glass-box allocation desirability:
///   2*s_g - s_b - sigma(loss_b - loss_g),  sigma(x) = 1 / (1 + e^-x).
/// The score of a category lands in its open unit interval:
/// Zb -> (-2,-1), Z0 -> (-1,0), Z2 -> (0,1), Zg -> (1,2).
double desirability_score(int s_g, int s_b, double loss_g, double loss_b);

double logistic(double x);

/// Scores for every observation of a partitioned set.
std::vector<double> true_desirability_scores(const SufficiencyPartition& part,
                                             std::span<const double> losses_g,
                                             std::span<const double> losses_b);

/// Ordinal ranks ascending in score with ties broken by ascending position
/// (observation id); percentile = rank / n.
struct DesirabilityRanking {
  std::vector<double> raw;
  std::vector<int> rank;          // bijection onto 1..n
  std::vector<double> percentile; // rank / n, in (0, 1]
};

DesirabilityRanking desirability_percentile(std::span<const double> scores);

/// Number of observations the glass box receives at level q:
/// round-half-to-even of q*n. Exact on the natural grid {i/n}.
int top_count(double q, int n);

/// Mask with exactly top_count(q, n) ones, covering the top-ranked scores.
std::vector<std::uint8_t> allocate_top_q(std::span<const double> scores, double q);
std::vector<std::uint8_t> allocate_top_q(const DesirabilityRanking& ranking, double q);

/// Allocation with perfect information: top-q of the true scores.
std::vector<std::uint8_t> oracle_allocation(const SufficiencyPartition& part,
                                            std::span<const double> losses_g,
                                            std::span<const double> losses_b,
                                            double q);

/// Closed-form expected performance of uniformly random allocation:
/// E[t_bar](q) = q * mean(s_g) + (1-q) * mean(s_b).
std::vector<double> random_expectation_curve(const SufficiencyPartition& part,
                                             std::span<const double> q_grid);

/// Seeded sampling counterpart for cross-checks: averages t_bar over `draws`
/// uniformly random masks per grid point.
std::vector<double> sampled_random_curve(const SufficiencyPartition& part,
                                         std::span<const double> q_grid, int draws,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// allocator features

enum class AllocatorFeature { x, g, b, d_ce, d_mse };

/// Ordered feature subset for the learned allocator; must stay non-empty.
struct AllocatorFeatureSet {
  bool use_x = true;
  bool use_g = true;
  bool use_b = true;
  bool use_d_ce = true;
  bool use_d_mse = true;

  void validate(TaskKind task) const;
  std::string to_string() const;
  static AllocatorFeatureSet parse(const std::string& spec);

  /// The twelve standard configurations, kitchen sink last.
  static std::vector<AllocatorFeatureSet> standard_sets();

  bool operator==(const AllocatorFeatureSet&) const = default;
};

/// Cross-entropy of b's distribution under g's, with the probability floor.
double cross_entropy_distance(std::span<const double> proba_g,
                              std::span<const double> proba_b);

/// Mean squared difference of the two outputs.
double mse_distance_proba(std::span<const double> proba_g,
                          std::span<const double> proba_b);
double mse_distance_value(double g_value, double b_value);

/// Concatenates the selected blocks of {x, g(x), b(x), d_ce, d_mse}.
/// Requesting d_ce for a regression task throws.
std::vector<double> build_allocator_features(std::span<const double> x,
                                             const ModelOutputs& out_g,
                                             const ModelOutputs& out_b, int index,
                                             const AllocatorFeatureSet& set,
                                             TaskKind task);

/// Assume-the-black-box-is-correct scores: the prediction distance d(g, b)
/// per observation (d_ce for classification, d_mse for regression). Ranking
/// these top-q realizes the feature-independent allocator.
std::vector<double> feature_independent_scores(const ModelOutputs& out_g,
                                               const ModelOutputs& out_b,
                                               TaskKind task);

// ---------------------------------------------------------------------------
// learned allocator

/// Regression dataset for allocator training: augmented features per
/// observation, target = the observation's desirability percentile within
/// `train`.
Dataset build_allocator_dataset(const Dataset& train, const PredictionModel& g,
                                const PredictionModel& b,
                                const SufficiencyConfig& config,
                                const AllocatorFeatureSet& features,
                                Execution exec = Execution::parallel);

/// GBT regressor from augmented features to the training-set desirability
/// percentile.
struct LearnedAllocator {
  GradientBoostedTrees model;
  AllocatorFeatureSet features;
  TaskKind task = TaskKind::classification;

  /// Predicted percentile estimates for a dataset, given both component
  /// models' outputs on it.
  std::vector<double> scores(const Dataset& data, const ModelOutputs& out_g,
                             const ModelOutputs& out_b) const;
};

LearnedAllocator train_learned_allocator(const Dataset& train,
                                         const PredictionModel& g,
                                         const PredictionModel& b,
                                         const SufficiencyConfig& config,
                                         const AllocatorFeatureSet& features,
                                         const GbtParams& gbt_params,
                                         std::uint64_t seed,
                                         Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// ensembling

enum class AllocatorTag { feature_dependent, feature_independent, oracle, random_expectation };

std::string to_string(AllocatorTag tag);

/// Per-grid-point winner between the learned and the feature-independent
/// allocator by validation performance; ties go to the feature-independent
/// one.
struct EnsembleSelection {
  std::vector<double> q_grid;
  std::vector<AllocatorTag> tag;
  std::vector<double> validation_learned;
  std::vector<double> validation_independent;
};

/// t_bar of a mask under a partition.
double sufficient_performance(const SufficiencyPartition& part,
                              std::span<const std::uint8_t> mask);
/// t_bar_g of a mask under a partition.
double sufficient_glass_performance(const SufficiencyPartition& part,
                                    std::span<const std::uint8_t> mask);

EnsembleSelection ensemble_allocators(std::span<const double> learned_scores,
                                      std::span<const double> independent_scores,
                                      const SufficiencyPartition& validation_part,
                                      std::span<const double> q_grid);

/// Maps a percentile to a category by cumulative training proportions in
/// ranking order Zb -> Z0 -> Z2 -> Zg.
Category estimate_sufficiency_category(double percentile, int n_b, int n_0, int n_2,
                                       int n_g);

}  // namespace ensalloc
