#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ensalloc/allocation.hpp"
#include "ensalloc/grid_search.hpp"
#include "ensalloc/metrics.hpp"

namespace ensalloc {

/// Flat experiment configuration. Every field has a default; a plain-text
/// `key = value` file (# comments) overrides them, and CLI flags override
/// file keys one-for-one. The canonical echo() form is part of the run
/// artifacts so an output directory fully documents how it was produced.
struct ExperimentConfig {
  // data source
  std::string data = "synthetic";  // synthetic | csv
  std::string csv_path;
  std::string target_column = "y";
  TaskKind task = TaskKind::classification;
  int synthetic_n = 2000;
  double synthetic_noise = 0.05;
  std::uint64_t synthetic_seed = 1;

  // split
  double train_ratio = 0.70;
  double val_ratio = 0.09;
  double test_ratio = 0.21;
  std::uint64_t split_seed = 7;

  // component models
  std::vector<ModelFamily> glass_families = {ModelFamily::linear, ModelFamily::tree};
  std::vector<ModelFamily> black_families = {ModelFamily::gbt};
  std::string component_selection = "individual";  // individual | combined
  int cv_folds = 4;
  std::uint64_t model_seed = 13;
  HyperparameterGrid linear_grid = HyperparameterGrid::default_linear();
  HyperparameterGrid tree_grid = HyperparameterGrid::default_tree();
  HyperparameterGrid gbt_grid = HyperparameterGrid::default_gbt();

  // learned allocator: GBT regression grid, a single point by default
  HyperparameterGrid allocator_grid;

  // sufficiency
  std::string sufficiency_mode = "auto";  // auto | always-sufficient | never-sufficient

  // allocation + metrics
  std::string allocator_features = "x,g,b,d_ce,d_mse";
  int q_points = 41;
  std::vector<double> q_grid_override;  // optional explicit grid

  // replication
  int replicates = 5;
  std::uint64_t replicate_seed_base = 100;
  std::vector<std::uint64_t> replicate_seeds;  // optional explicit list

  // execution
  int threads = 0;  // 0 = OpenMP default
  std::string output_dir = "out";
  bool reuse_models = false;
  bool write_artifacts = true;

  ExperimentConfig();

  static ExperimentConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::string echo() const;

  std::vector<double> q_grid() const;
  SufficiencyConfig sufficiency_config(std::optional<double> epsilon) const;
};

/// Everything a single run produces, plus where it was written.
struct RunResult {
  MetricsReport metrics;
  nlohmann::ordered_json report;  // flat key/value, as written to report.json
  PerformanceCurve ensemble_curve;
  PerformanceCurve oracle_curve;
  std::vector<double> random_curve;
  double perf_glass = 0.0;
  double perf_black = 0.0;
  std::string glass_family;
  std::string black_family;
  std::optional<double> epsilon;
};

/// split -> scale -> tune+fit g and b -> epsilon -> partitions -> allocator
/// -> validation ensembling -> test evaluation -> artifacts. Errors carry the
/// failing stage in their message; an INCOMPLETE marker flags interrupted
/// output directories.
RunResult run_experiment(const ExperimentConfig& config);

/// Candidate model fitted for one role.
struct FittedCandidate {
  ModelFamily family;
  std::unique_ptr<PredictionModel> model;
  double validation_score = 0.0;  // accuracy (classification) or -MSE
};

struct ComponentCandidates {
  std::vector<FittedCandidate> glass;
  std::vector<FittedCandidate> black;
};

/// Chooses the (glass, black) pair. Individual mode takes the best
/// validation score per role; combined mode builds an allocator per pair and
/// takes the best ensembled validation AUC.
std::pair<int, int> select_components(const ExperimentConfig& config,
                                      const Dataset& train, const Dataset& validation,
                                      const ComponentCandidates& candidates);

struct ComponentSelectionResult {
  int glass_individual = 0;
  int black_individual = 0;
  int glass_combined = 0;
  int black_combined = 0;
  bool match = false;
  double auc_delta_test = 0.0;  // AUC(combined) - AUC(individual) on test
};

/// Runs both selection modes on the same candidates and measures the test
/// AUC difference between the two choices.
ComponentSelectionResult compare_component_selection(
    const ExperimentConfig& config, const Dataset& train, const Dataset& validation,
    const Dataset& test, const ComponentCandidates& candidates);

/// Table-4 style comparison of individual vs combined component selection on
/// the configured data and model families.
ComponentSelectionResult ablate_components(const ExperimentConfig& config);

struct FeatureAblationRow {
  std::string feature_set;
  double test_auc = 0.0;
};

/// Trains one learned allocator per feature set on shared component models
/// and reports its test AUC. Duplicate sets are dropped with a warning;
/// d_ce sets are skipped for regression tasks.
std::vector<FeatureAblationRow> ablate_features(const ExperimentConfig& config);

/// Same sweep on caller-supplied component models and splits.
std::vector<FeatureAblationRow> ablate_features_with_models(
    const ExperimentConfig& config, const Dataset& train, const Dataset& validation,
    const Dataset& test, const PredictionModel& g, const PredictionModel& b);

struct ReplicateSummary {
  std::vector<nlohmann::ordered_json> per_replicate;
  nlohmann::ordered_json aggregate;  // mean and sd per metric
};

/// Reruns the experiment with per-replicate split and model seeds and
/// aggregates each metric as mean and sample standard deviation.
ReplicateSummary replicate(const ExperimentConfig& config);

}  // namespace ensalloc
