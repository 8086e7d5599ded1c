#include "ensalloc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "ensalloc/csv.hpp"
#include "ensalloc/model_io.hpp"
#include "ensalloc/scaler.hpp"
#include "ensalloc/synthetic.hpp"

namespace fs = std::filesystem;

namespace ensalloc {

namespace {

template <typename F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw std::runtime_error("stage '" + name + "': " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::size_t a = tok.find_first_not_of(" \t");
    const std::size_t b = tok.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(tok.substr(a, b - a + 1));
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& value) {
  std::vector<double> out;
  for (const std::string& tok : split_list(value)) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_ints(const std::string& value) {
  std::vector<int> out;
  for (const std::string& tok : split_list(value)) out.push_back(std::stoi(tok));
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  std::vector<std::uint64_t> out;
  for (const std::string& tok : split_list(value)) out.push_back(std::stoull(tok));
  return out;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("expected a boolean, got: " + value);
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (double x : v) {
    if (!s.empty()) s += ',';
    s += nlohmann::json(x).dump();
  }
  return s;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (int x : v) {
    if (!s.empty()) s += ',';
    s += std::to_string(x);
  }
  return s;
}

std::string join_seeds(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::uint64_t x : v) {
    if (!s.empty()) s += ',';
    s += std::to_string(x);
  }
  return s;
}

std::string join_families(const std::vector<ModelFamily>& v) {
  std::string s;
  for (ModelFamily f : v) {
    if (!s.empty()) s += ',';
    s += to_string(f);
  }
  return s;
}

std::vector<ModelFamily> parse_families(const std::string& value) {
  std::vector<ModelFamily> out;
  for (const std::string& tok : split_list(value)) out.push_back(family_from_string(tok));
  return out;
}

const HyperparameterGrid& grid_for(const ExperimentConfig& config, ModelFamily f) {
  switch (f) {
    case ModelFamily::linear: return config.linear_grid;
    case ModelFamily::tree: return config.tree_grid;
    case ModelFamily::gbt: return config.gbt_grid;
  }
  throw std::logic_error("unreachable");
}

// Per-dataset state reused across allocator evaluation: component model
// outputs, losses, and the sufficiency partition.
struct EvalSet {
  const Dataset* data = nullptr;
  ModelOutputs out_g;
  ModelOutputs out_b;
  std::vector<double> loss_g;
  std::vector<double> loss_b;
  SufficiencyPartition part;
};

EvalSet make_eval_set(const Dataset& data, const PredictionModel& g,
                      const PredictionModel& b, const SufficiencyConfig& config) {
  EvalSet e;
  e.data = &data;
  e.out_g = batch_outputs(g, data);
  e.out_b = batch_outputs(b, data);
  const int n = data.size();
  e.loss_g.resize(static_cast<std::size_t>(n));
  e.loss_b.resize(static_cast<std::size_t>(n));
  std::vector<int> s_g(static_cast<std::size_t>(n)), s_b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double y = data.observations[static_cast<std::size_t>(i)].y;
    e.loss_g[static_cast<std::size_t>(i)] = underlying_loss(data.task, e.out_g, i, y);
    e.loss_b[static_cast<std::size_t>(i)] = underlying_loss(data.task, e.out_b, i, y);
    s_g[static_cast<std::size_t>(i)] = sufficiency_indicator(data.task, e.out_g, i, y, config);
    s_b[static_cast<std::size_t>(i)] = sufficiency_indicator(data.task, e.out_b, i, y, config);
  }
  e.part = partition_from_indicators(s_g, s_b);
  return e;
}

SufficiencyConfig resolve_sufficiency(const ExperimentConfig& config,
                                      const PredictionModel& g,
                                      const PredictionModel& b,
                                      const Dataset& validation,
                                      std::optional<double>* epsilon_out) {
  std::optional<double> epsilon;
  if (config.sufficiency_mode == "auto" && config.task == TaskKind::regression) {
    epsilon = epsilon_from_validation(g, b, validation);
  }
  if (epsilon_out) *epsilon_out = epsilon;
  return config.sufficiency_config(epsilon);
}

LearnedAllocator tune_learned_allocator(const ExperimentConfig& config,
                                        const Dataset& train,
                                        const PredictionModel& g,
                                        const PredictionModel& b,
                                        const SufficiencyConfig& suff,
                                        const AllocatorFeatureSet& features) {
  const Dataset augmented = build_allocator_dataset(train, g, b, suff, features);
  FitReport report =
      grid_search(config.allocator_grid, augmented, config.cv_folds, config.model_seed);
  auto* gbt = dynamic_cast<GradientBoostedTrees*>(report.model.get());
  if (gbt == nullptr) throw std::logic_error("allocator grid must be a gbt grid");
  return LearnedAllocator{std::move(*gbt), features, train.task};
}

// Ensembled policy evaluated on one set: per-q masks following the selection
// map, plus the reference curves.
struct PolicyEvaluation {
  PerformanceCurve ensemble;
  PerformanceCurve learned;
  PerformanceCurve independent;
  PerformanceCurve oracle;
  std::vector<double> random_expectation;
  std::vector<double> learned_scores;
  std::vector<std::vector<std::uint8_t>> masks;
};

PolicyEvaluation evaluate_policy(const EvalSet& eval, const LearnedAllocator& allocator,
                                 const EnsembleSelection& selection,
                                 std::span<const double> q_grid) {
  PolicyEvaluation pe;
  pe.learned_scores = allocator.scores(*eval.data, eval.out_g, eval.out_b);
  const std::vector<double> independent_scores =
      feature_independent_scores(eval.out_g, eval.out_b, eval.data->task);

  const DesirabilityRanking learned_rank = desirability_percentile(pe.learned_scores);
  const DesirabilityRanking independent_rank =
      desirability_percentile(independent_scores);

  pe.masks.reserve(q_grid.size());
  std::vector<AllocatorTag> tags;
  for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
    const AllocatorTag tag = selection.tag[qi];
    tags.push_back(tag);
    pe.masks.push_back(tag == AllocatorTag::feature_dependent
                           ? allocate_top_q(learned_rank, q_grid[qi])
                           : allocate_top_q(independent_rank, q_grid[qi]));
  }
  pe.ensemble = curve_from_masks(q_grid, pe.masks, eval.part,
                                 AllocatorTag::feature_dependent);
  pe.ensemble.tag = tags;
  pe.learned = curve_from_scores(q_grid, pe.learned_scores, eval.part,
                                 AllocatorTag::feature_dependent);
  pe.independent = curve_from_scores(q_grid, independent_scores, eval.part,
                                     AllocatorTag::feature_independent);
  const std::vector<double> oracle_scores =
      true_desirability_scores(eval.part, eval.loss_g, eval.loss_b);
  pe.oracle =
      curve_from_scores(q_grid, oracle_scores, eval.part, AllocatorTag::oracle);
  pe.random_expectation = random_expectation_curve(eval.part, q_grid);
  return pe;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string format_double(double v) { return nlohmann::json(v).dump(); }

}  // namespace

// ---------------------------------------------------------------------------
// config

ExperimentConfig::ExperimentConfig() {
  allocator_grid.family = ModelFamily::gbt;
  allocator_grid.learning_rate = {0.1};
  allocator_grid.n_estimators = {256};
  allocator_grid.gbt_max_depth = {4};
  allocator_grid.subsample = {1.0};
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 " is not 'key = value'");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t\r\n");
      if (a == std::string::npos) return std::string();
      const std::size_t b = s.find_last_not_of(" \t\r\n");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      config.set(key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return config;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "data") data = value;
  else if (key == "csv_path") csv_path = value;
  else if (key == "target_column") target_column = value;
  else if (key == "task") task = task_from_string(value);
  else if (key == "synthetic_n") synthetic_n = std::stoi(value);
  else if (key == "synthetic_noise") synthetic_noise = std::stod(value);
  else if (key == "synthetic_seed") synthetic_seed = std::stoull(value);
  else if (key == "train_ratio") train_ratio = std::stod(value);
  else if (key == "val_ratio") val_ratio = std::stod(value);
  else if (key == "test_ratio") test_ratio = std::stod(value);
  else if (key == "split_seed") split_seed = std::stoull(value);
  else if (key == "glass_families") glass_families = parse_families(value);
  else if (key == "black_families") black_families = parse_families(value);
  else if (key == "component_selection") component_selection = value;
  else if (key == "cv_folds") cv_folds = std::stoi(value);
  else if (key == "model_seed") model_seed = std::stoull(value);
  else if (key == "linear_l1") linear_grid.l1_penalty = parse_doubles(value);
  else if (key == "tree_min_split") tree_grid.min_split = parse_ints(value);
  else if (key == "tree_max_leaf") tree_grid.max_leaf = parse_ints(value);
  else if (key == "tree_max_depth") tree_grid.tree_max_depth = parse_ints(value);
  else if (key == "gbt_learning_rate") gbt_grid.learning_rate = parse_doubles(value);
  else if (key == "gbt_n_estimators") gbt_grid.n_estimators = parse_ints(value);
  else if (key == "gbt_max_depth") gbt_grid.gbt_max_depth = parse_ints(value);
  else if (key == "gbt_subsample") gbt_grid.subsample = parse_doubles(value);
  else if (key == "allocator_learning_rate") allocator_grid.learning_rate = parse_doubles(value);
  else if (key == "allocator_n_estimators") allocator_grid.n_estimators = parse_ints(value);
  else if (key == "allocator_max_depth") allocator_grid.gbt_max_depth = parse_ints(value);
  else if (key == "allocator_subsample") allocator_grid.subsample = parse_doubles(value);
  else if (key == "sufficiency_mode") sufficiency_mode = value;
  else if (key == "allocator_features") allocator_features = value;
  else if (key == "q_points") q_points = std::stoi(value);
  else if (key == "q_grid") q_grid_override = parse_doubles(value);
  else if (key == "replicates") replicates = std::stoi(value);
  else if (key == "replicate_seed_base") replicate_seed_base = std::stoull(value);
  else if (key == "replicate_seeds") replicate_seeds = parse_seeds(value);
  else if (key == "threads") threads = std::stoi(value);
  else if (key == "output_dir") output_dir = value;
  else if (key == "reuse_models") reuse_models = parse_bool(value);
  else if (key == "write_artifacts") write_artifacts = parse_bool(value);
  else throw std::invalid_argument("unknown config key: " + key);
}

void ExperimentConfig::validate() const {
  if (data != "synthetic" && data != "csv") {
    throw std::invalid_argument("data must be 'synthetic' or 'csv'");
  }
  if (data == "csv" && csv_path.empty()) {
    throw std::invalid_argument("csv_path required when data = csv");
  }
  if (data == "synthetic" && task != TaskKind::classification) {
    throw std::invalid_argument("the bundled synthetic task is classification");
  }
  if (synthetic_n < 100) throw std::invalid_argument("synthetic_n must be >= 100");
  if (synthetic_noise < 0 || synthetic_noise > 1) {
    throw std::invalid_argument("synthetic_noise must be in [0, 1]");
  }
  if (glass_families.empty() || black_families.empty()) {
    throw std::invalid_argument("need at least one glass and one black family");
  }
  if (component_selection != "individual" && component_selection != "combined") {
    throw std::invalid_argument("component_selection must be individual or combined");
  }
  if (cv_folds < 2) throw std::invalid_argument("cv_folds must be >= 2");
  if (sufficiency_mode != "auto" && sufficiency_mode != "always-sufficient" &&
      sufficiency_mode != "never-sufficient") {
    throw std::invalid_argument(
        "sufficiency_mode must be auto, always-sufficient, or never-sufficient");
  }
  AllocatorFeatureSet::parse(allocator_features).validate(task);
  validate_q_grid(q_grid());
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!replicate_seeds.empty() &&
      static_cast<int>(replicate_seeds.size()) != replicates) {
    throw std::invalid_argument("replicate_seeds must list one seed per replicate");
  }
  if (output_dir.empty()) throw std::invalid_argument("output_dir must be set");
  allocator_grid.enumerate();  // throws when empty or out of range
}

std::vector<double> ExperimentConfig::q_grid() const {
  if (!q_grid_override.empty()) return q_grid_override;
  return make_q_grid(q_points);
}

SufficiencyConfig ExperimentConfig::sufficiency_config(
    std::optional<double> epsilon) const {
  SufficiencyConfig suff;
  if (sufficiency_mode == "always-sufficient") {
    suff.mode = SufficiencyMode::always_sufficient;
  } else if (sufficiency_mode == "never-sufficient") {
    suff.mode = SufficiencyMode::never_sufficient;
  } else if (task == TaskKind::classification) {
    suff.mode = SufficiencyMode::classification_equality;
  } else {
    suff.mode = SufficiencyMode::regression_epsilon;
    suff.epsilon = epsilon;
  }
  return suff;
}

std::string ExperimentConfig::echo() const {
  std::ostringstream out;
  out << "data = " << data << '\n';
  out << "csv_path = " << csv_path << '\n';
  out << "target_column = " << target_column << '\n';
  out << "task = " << to_string(task) << '\n';
  out << "synthetic_n = " << synthetic_n << '\n';
  out << "synthetic_noise = " << format_double(synthetic_noise) << '\n';
  out << "synthetic_seed = " << synthetic_seed << '\n';
  out << "train_ratio = " << format_double(train_ratio) << '\n';
  out << "val_ratio = " << format_double(val_ratio) << '\n';
  out << "test_ratio = " << format_double(test_ratio) << '\n';
  out << "split_seed = " << split_seed << '\n';
  out << "glass_families = " << join_families(glass_families) << '\n';
  out << "black_families = " << join_families(black_families) << '\n';
  out << "component_selection = " << component_selection << '\n';
  out << "cv_folds = " << cv_folds << '\n';
  out << "model_seed = " << model_seed << '\n';
  out << "linear_l1 = " << join_doubles(linear_grid.l1_penalty) << '\n';
  out << "tree_min_split = " << join_ints(tree_grid.min_split) << '\n';
  out << "tree_max_leaf = " << join_ints(tree_grid.max_leaf) << '\n';
  out << "tree_max_depth = " << join_ints(tree_grid.tree_max_depth) << '\n';
  out << "gbt_learning_rate = " << join_doubles(gbt_grid.learning_rate) << '\n';
  out << "gbt_n_estimators = " << join_ints(gbt_grid.n_estimators) << '\n';
  out << "gbt_max_depth = " << join_ints(gbt_grid.gbt_max_depth) << '\n';
  out << "gbt_subsample = " << join_doubles(gbt_grid.subsample) << '\n';
  out << "allocator_learning_rate = " << join_doubles(allocator_grid.learning_rate) << '\n';
  out << "allocator_n_estimators = " << join_ints(allocator_grid.n_estimators) << '\n';
  out << "allocator_max_depth = " << join_ints(allocator_grid.gbt_max_depth) << '\n';
  out << "allocator_subsample = " << join_doubles(allocator_grid.subsample) << '\n';
  out << "sufficiency_mode = " << sufficiency_mode << '\n';
  out << "allocator_features = " << allocator_features << '\n';
  out << "q_points = " << q_points << '\n';
  out << "q_grid = " << join_doubles(q_grid_override) << '\n';
  out << "replicates = " << replicates << '\n';
  out << "replicate_seed_base = " << replicate_seed_base << '\n';
  out << "replicate_seeds = " << join_seeds(replicate_seeds) << '\n';
  out << "threads = " << threads << '\n';
  out << "output_dir = " << output_dir << '\n';
  out << "reuse_models = " << (reuse_models ? "true" : "false") << '\n';
  out << "write_artifacts = " << (write_artifacts ? "true" : "false") << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

Dataset load_input_data(const ExperimentConfig& config) {
  if (config.data == "synthetic") {
    return gen_complementary_2d(config.synthetic_n, config.synthetic_seed,
                                config.synthetic_noise);
  }
  return load_csv(config.csv_path, config.task, config.target_column);
}

double validation_score(const PredictionModel& model, const Dataset& validation) {
  if (validation.task == TaskKind::classification) {
    int correct = 0;
    for (const Observation& obs : validation.observations) {
      correct += predict_class(model, obs.x) == obs.label() ? 1 : 0;
    }
    return static_cast<double>(correct) / validation.size();
  }
  const std::vector<double> losses = model_losses(model, validation);
  double mean = 0.0;
  for (double v : losses) mean += v;
  return -mean / validation.size();  // higher is better
}

ComponentCandidates fit_components(const ExperimentConfig& config, const Dataset& train,
                                   const Dataset& validation) {
  ComponentCandidates fc;
  for (ModelFamily family : config.glass_families) {
    FitReport report = grid_search(grid_for(config, family), train, config.cv_folds,
                                   config.model_seed);
    FittedCandidate cand{family, std::move(report.model), 0.0};
    cand.validation_score = validation_score(*cand.model, validation);
    fc.glass.push_back(std::move(cand));
  }
  for (ModelFamily family : config.black_families) {
    FitReport report = grid_search(grid_for(config, family), train, config.cv_folds,
                                   config.model_seed);
    FittedCandidate cand{family, std::move(report.model), 0.0};
    cand.validation_score = validation_score(*cand.model, validation);
    fc.black.push_back(std::move(cand));
  }
  return fc;
}

int best_by_score(const Dataset& validation,
                  const std::vector<FittedCandidate>& candidates) {
  int best = 0;
  double best_score = validation_score(*candidates.front().model, validation);
  for (int i = 1; i < static_cast<int>(candidates.size()); ++i) {
    const double score =
        validation_score(*candidates[static_cast<std::size_t>(i)].model, validation);
    if (score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

// Validation AUC of the ensembled policy for one (g, b) pair.
double ensemble_validation_auc(const ExperimentConfig& config, const Dataset& train,
                               const Dataset& validation, const PredictionModel& g,
                               const PredictionModel& b) {
  const SufficiencyConfig suff = resolve_sufficiency(config, g, b, validation, nullptr);
  const AllocatorFeatureSet features =
      AllocatorFeatureSet::parse(config.allocator_features);
  const LearnedAllocator allocator =
      tune_learned_allocator(config, train, g, b, suff, features);
  const EvalSet val = make_eval_set(validation, g, b, suff);
  const std::vector<double> learned = allocator.scores(validation, val.out_g, val.out_b);
  const std::vector<double> independent =
      feature_independent_scores(val.out_g, val.out_b, validation.task);
  const std::vector<double> grid = config.q_grid();
  const EnsembleSelection sel = ensemble_allocators(learned, independent, val.part, grid);
  std::vector<double> best_curve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    best_curve[i] = std::max(sel.validation_learned[i], sel.validation_independent[i]);
  }
  return auc(grid, best_curve);
}

std::pair<int, int> select_pair_combined(const ExperimentConfig& config,
                                         const Dataset& train,
                                         const Dataset& validation,
                                         const ComponentCandidates& fc) {
  int best_g = 0, best_b = 0;
  double best_auc = -1.0;
  for (int gi = 0; gi < static_cast<int>(fc.glass.size()); ++gi) {
    for (int bi = 0; bi < static_cast<int>(fc.black.size()); ++bi) {
      const double pair_auc = ensemble_validation_auc(
          config, train, validation, *fc.glass[static_cast<std::size_t>(gi)].model,
          *fc.black[static_cast<std::size_t>(bi)].model);
      if (pair_auc > best_auc) {
        best_auc = pair_auc;
        best_g = gi;
        best_b = bi;
      }
    }
  }
  return {best_g, best_b};
}

std::string curve_csv(const PerformanceCurve& curve) {
  std::ostringstream out;
  out << "q,t_bar,t_bar_g,allocator_tag\n";
  for (std::size_t i = 0; i < curve.q.size(); ++i) {
    out << format_double(curve.q[i]) << ',' << format_double(curve.t_bar[i]) << ','
        << format_double(curve.t_bar_g[i]) << ',' << to_string(curve.tag[i]) << '\n';
  }
  return out.str();
}

std::string reference_curves_csv(std::span<const double> grid,
                                 const PolicyEvaluation& pe) {
  std::ostringstream out;
  out << "q,ensemble,learned,independent,oracle,random\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_double(grid[i]) << ',' << format_double(pe.ensemble.t_bar[i]) << ','
        << format_double(pe.learned.t_bar[i]) << ','
        << format_double(pe.independent.t_bar[i]) << ','
        << format_double(pe.oracle.t_bar[i]) << ','
        << format_double(pe.random_expectation[i]) << '\n';
  }
  return out.str();
}

std::string partition_csv(const Dataset& data, const SufficiencyPartition& part) {
  std::ostringstream out;
  out << "id,s_g,s_b,category\n";
  for (int i = 0; i < part.size(); ++i) {
    out << data.observations[static_cast<std::size_t>(i)].id << ','
        << part.s_g[static_cast<std::size_t>(i)] << ','
        << part.s_b[static_cast<std::size_t>(i)] << ','
        << to_string(part.category[static_cast<std::size_t>(i)]) << '\n';
  }
  return out.str();
}

std::string policy_csv(const Dataset& data, std::span<const double> grid,
                       const PolicyEvaluation& pe, const EnsembleSelection& sel,
                       std::span<const double> percentile,
                       std::span<const Category> estimated) {
  std::ostringstream out;
  out << "id,q,assigned_model,allocator_tag,predicted_percentile,estimated_category\n";
  for (std::size_t qi = 0; qi < grid.size(); ++qi) {
    for (int i = 0; i < data.size(); ++i) {
      out << data.observations[static_cast<std::size_t>(i)].id << ','
          << format_double(grid[qi]) << ','
          << (pe.masks[qi][static_cast<std::size_t>(i)] ? "glass" : "black") << ','
          << to_string(sel.tag[qi]) << ','
          << format_double(percentile[static_cast<std::size_t>(i)]) << ','
          << to_string(estimated[static_cast<std::size_t>(i)]) << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::pair<int, int> select_components(const ExperimentConfig& config,
                                      const Dataset& train, const Dataset& validation,
                                      const ComponentCandidates& candidates) {
  if (candidates.glass.empty() || candidates.black.empty()) {
    throw std::invalid_argument("need at least one candidate per role");
  }
  if (config.component_selection == "individual") {
    return {best_by_score(validation, candidates.glass),
            best_by_score(validation, candidates.black)};
  }
  return select_pair_combined(config, train, validation, candidates);
}

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  set_worker_count(config.threads);

  const fs::path out_dir(config.output_dir);
  if (config.write_artifacts) {
    fs::create_directories(out_dir / "models");
    write_text(out_dir / "INCOMPLETE", "run in progress or aborted\n");
  }

  Dataset raw = stage("data", [&] { return load_input_data(config); });
  SplitDataset splits = stage("split", [&] {
    return split(raw, {config.train_ratio, config.val_ratio, config.test_ratio},
                 config.split_seed);
  });
  Scaler scaler = stage("scale", [&] { return fit_scaler(splits.train); });
  const Dataset train = apply_scaler(scaler, splits.train);
  const Dataset validation = apply_scaler(scaler, splits.validation);
  const Dataset test = apply_scaler(scaler, splits.test);

  std::unique_ptr<PredictionModel> g, b;
  std::string glass_family, black_family;
  const bool models_on_disk = fs::exists(out_dir / "models" / "glass.json") &&
                              fs::exists(out_dir / "models" / "black.json");
  if (config.reuse_models && models_on_disk) {
    stage("models", [&] {
      g = load_model((out_dir / "models" / "glass.json").string());
      b = load_model((out_dir / "models" / "black.json").string());
      glass_family = g->family();
      black_family = b->family();
      return 0;
    });
  } else {
    stage("models", [&] {
      ComponentCandidates fc = fit_components(config, train, validation);
      const auto [gi, bi] = select_components(config, train, validation, fc);
      g = std::move(fc.glass[static_cast<std::size_t>(gi)].model);
      b = std::move(fc.black[static_cast<std::size_t>(bi)].model);
      glass_family = to_string(fc.glass[static_cast<std::size_t>(gi)].family);
      black_family = to_string(fc.black[static_cast<std::size_t>(bi)].family);
      return 0;
    });
  }

  std::optional<double> epsilon;
  const SufficiencyConfig suff = stage("epsilon", [&] {
    return resolve_sufficiency(config, *g, *b, validation, &epsilon);
  });

  const EvalSet train_eval =
      stage("partition", [&] { return make_eval_set(train, *g, *b, suff); });
  const EvalSet val_eval = make_eval_set(validation, *g, *b, suff);
  const EvalSet test_eval = make_eval_set(test, *g, *b, suff);

  const AllocatorFeatureSet features =
      AllocatorFeatureSet::parse(config.allocator_features);
  const LearnedAllocator allocator = stage("allocator", [&] {
    return tune_learned_allocator(config, train, *g, *b, suff, features);
  });

  const std::vector<double> grid = config.q_grid();
  const EnsembleSelection selection = stage("ensemble", [&] {
    const std::vector<double> learned =
        allocator.scores(validation, val_eval.out_g, val_eval.out_b);
    const std::vector<double> independent =
        feature_independent_scores(val_eval.out_g, val_eval.out_b, validation.task);
    return ensemble_allocators(learned, independent, val_eval.part, grid);
  });

  RunResult result;
  const PolicyEvaluation pe = stage("evaluate", [&] {
    return evaluate_policy(test_eval, allocator, selection, grid);
  });

  result.perf_glass = test_eval.part.mean_s_g();
  result.perf_black = test_eval.part.mean_s_b();
  result.glass_family = glass_family;
  result.black_family = black_family;
  result.epsilon = epsilon;
  result.ensemble_curve = pe.ensemble;
  result.oracle_curve = pe.oracle;
  result.random_curve = pe.random_expectation;

  const DesirabilityRanking test_rank = desirability_percentile(pe.learned_scores);
  std::vector<Category> estimated;
  estimated.reserve(static_cast<std::size_t>(test.size()));
  for (int i = 0; i < test.size(); ++i) {
    estimated.push_back(estimate_sufficiency_category(
        test_rank.percentile[static_cast<std::size_t>(i)], train_eval.part.n_b,
        train_eval.part.n_0, train_eval.part.n_2, train_eval.part.n_g));
  }

  MetricsReport& m = result.metrics;
  m.auc = auc(pe.ensemble);
  const double auc_oracle = auc(pe.oracle);
  const double auc_random = auc(grid, pe.random_expectation);
  m.ppcr = ppcr(m.auc, auc_random, auc_oracle);
  m.pqeom = pqeom(pe.ensemble, result.perf_glass, result.perf_black);
  m.pqom = pqom(pe.ensemble, result.perf_glass, result.perf_black);
  m.pcfa = pcfa(selection.tag);
  m.tqm95 = tqm95(pe.ensemble, result.perf_glass, result.perf_black);
  const auto [max_acc, argmax_q] = max_acc_argmax(pe.ensemble);
  m.max_acc = max_acc;
  m.argmax_q = argmax_q;
  m.s_acc = s_acc(estimated, test_eval.part.category);

  nlohmann::ordered_json report = m.to_json();
  report["auc_learned"] = auc(pe.learned);
  report["auc_independent"] = auc(pe.independent);
  report["auc_oracle"] = auc_oracle;
  report["auc_random"] = auc_random;
  report["perf_glass"] = result.perf_glass;
  report["perf_black"] = result.perf_black;
  report["glass_family"] = glass_family;
  report["black_family"] = black_family;
  if (epsilon) {
    report["epsilon"] = *epsilon;
  } else {
    report["epsilon"] = nullptr;
  }
  report["n_train"] = train.size();
  report["n_validation"] = validation.size();
  report["n_test"] = test.size();
  report["train_n_b"] = train_eval.part.n_b;
  report["train_n_0"] = train_eval.part.n_0;
  report["train_n_2"] = train_eval.part.n_2;
  report["train_n_g"] = train_eval.part.n_g;
  result.report = report;

  if (config.write_artifacts) {
    stage("artifacts", [&] {
      save_model(*g, (out_dir / "models" / "glass.json").string());
      save_model(*b, (out_dir / "models" / "black.json").string());
      save_model(allocator.model, (out_dir / "models" / "allocator.json").string());
      save_csv(raw, (out_dir / "data.csv").string());
      save_sidecar(raw, scaler, (out_dir / "data.meta.json").string());
      write_text(out_dir / "partition.csv", partition_csv(test, test_eval.part));
      write_text(out_dir / "curve.csv", curve_csv(pe.ensemble));
      write_text(out_dir / "curves_reference.csv", reference_curves_csv(grid, pe));
      write_text(out_dir / "policy.csv",
                 policy_csv(test, grid, pe, selection, test_rank.percentile, estimated));
      write_text(out_dir / "report.json", report.dump(2) + "\n");
      write_text(out_dir / "config_echo.txt", config.echo());
      fs::remove(out_dir / "INCOMPLETE");
      return 0;
    });
  }
  return result;
}

// ---------------------------------------------------------------------------
// ablations and replication

ComponentSelectionResult compare_component_selection(
    const ExperimentConfig& config, const Dataset& train, const Dataset& validation,
    const Dataset& test, const ComponentCandidates& candidates) {
  ComponentSelectionResult result;
  result.glass_individual = best_by_score(validation, candidates.glass);
  result.black_individual = best_by_score(validation, candidates.black);
  std::tie(result.glass_combined, result.black_combined) =
      select_pair_combined(config, train, validation, candidates);
  result.match = result.glass_individual == result.glass_combined &&
                 result.black_individual == result.black_combined;

  auto evaluate_pair_test_auc = [&](int gi, int bi) {
    const PredictionModel& g = *candidates.glass[static_cast<std::size_t>(gi)].model;
    const PredictionModel& b = *candidates.black[static_cast<std::size_t>(bi)].model;
    const SufficiencyConfig suff =
        resolve_sufficiency(config, g, b, validation, nullptr);
    const AllocatorFeatureSet features =
        AllocatorFeatureSet::parse(config.allocator_features);
    const LearnedAllocator allocator =
        tune_learned_allocator(config, train, g, b, suff, features);
    const EvalSet val_set = make_eval_set(validation, g, b, suff);
    const std::vector<double> learned_val =
        allocator.scores(validation, val_set.out_g, val_set.out_b);
    const std::vector<double> independent_val =
        feature_independent_scores(val_set.out_g, val_set.out_b, validation.task);
    const std::vector<double> grid = config.q_grid();
    const EnsembleSelection sel =
        ensemble_allocators(learned_val, independent_val, val_set.part, grid);
    const EvalSet test_set = make_eval_set(test, g, b, suff);
    const PolicyEvaluation pe = evaluate_policy(test_set, allocator, sel, grid);
    return auc(pe.ensemble);
  };

  const double auc_individual =
      evaluate_pair_test_auc(result.glass_individual, result.black_individual);
  const double auc_combined =
      evaluate_pair_test_auc(result.glass_combined, result.black_combined);
  result.auc_delta_test = auc_combined - auc_individual;
  return result;
}

ComponentSelectionResult ablate_components(const ExperimentConfig& base) {
  ExperimentConfig config = base;
  config.validate();
  set_worker_count(config.threads);

  Dataset raw = load_input_data(config);
  SplitDataset splits =
      split(raw, {config.train_ratio, config.val_ratio, config.test_ratio},
            config.split_seed);
  const Scaler scaler = fit_scaler(splits.train);
  const Dataset train = apply_scaler(scaler, splits.train);
  const Dataset validation = apply_scaler(scaler, splits.validation);
  const Dataset test = apply_scaler(scaler, splits.test);

  const ComponentCandidates candidates = fit_components(config, train, validation);
  return compare_component_selection(config, train, validation, test, candidates);
}

std::vector<FeatureAblationRow> ablate_features(const ExperimentConfig& base) {
  ExperimentConfig config = base;
  config.validate();
  set_worker_count(config.threads);

  Dataset raw = load_input_data(config);
  SplitDataset splits =
      split(raw, {config.train_ratio, config.val_ratio, config.test_ratio},
            config.split_seed);
  const Scaler scaler = fit_scaler(splits.train);
  const Dataset train = apply_scaler(scaler, splits.train);
  const Dataset validation = apply_scaler(scaler, splits.validation);
  const Dataset test = apply_scaler(scaler, splits.test);

  const ComponentCandidates candidates = fit_components(config, train, validation);
  const auto [gi, bi] = select_components(config, train, validation, candidates);
  return ablate_features_with_models(
      config, train, validation, test,
      *candidates.glass[static_cast<std::size_t>(gi)].model,
      *candidates.black[static_cast<std::size_t>(bi)].model);
}

std::vector<FeatureAblationRow> ablate_features_with_models(
    const ExperimentConfig& config, const Dataset& train, const Dataset& validation,
    const Dataset& test, const PredictionModel& g, const PredictionModel& b) {
  const SufficiencyConfig suff = resolve_sufficiency(config, g, b, validation, nullptr);
  const EvalSet test_set = make_eval_set(test, g, b, suff);
  const std::vector<double> grid = config.q_grid();

  std::vector<FeatureAblationRow> rows;
  std::set<std::string> seen;
  for (const AllocatorFeatureSet& set : AllocatorFeatureSet::standard_sets()) {
    const std::string name = set.to_string();
    if (!seen.insert(name).second) {
      std::cerr << "warning: duplicate feature set '" << name << "' skipped\n";
      continue;
    }
    if (set.use_d_ce && config.task == TaskKind::regression) {
      std::cerr << "warning: feature set '" << name
                << "' skipped (d_ce undefined for regression)\n";
      continue;
    }
    const LearnedAllocator allocator =
        tune_learned_allocator(config, train, g, b, suff, set);
    const std::vector<double> scores =
        allocator.scores(test, test_set.out_g, test_set.out_b);
    const PerformanceCurve curve = curve_from_scores(
        grid, scores, test_set.part, AllocatorTag::feature_dependent);
    rows.push_back({name, auc(curve)});
  }
  return rows;
}

ReplicateSummary replicate(const ExperimentConfig& base) {
  base.validate();
  ReplicateSummary summary;
  std::vector<nlohmann::ordered_json> reports;
  for (int rep = 0; rep < base.replicates; ++rep) {
    ExperimentConfig config = base;
    const std::uint64_t seed = base.replicate_seeds.empty()
                                   ? base.replicate_seed_base + static_cast<std::uint64_t>(rep)
                                   : base.replicate_seeds[static_cast<std::size_t>(rep)];
    config.split_seed = seed;
    config.model_seed = seed + 1;
    config.output_dir =
        (fs::path(base.output_dir) / ("rep_" + std::to_string(rep))).string();
    const RunResult run = run_experiment(config);
    reports.push_back(run.report);
  }

  nlohmann::ordered_json aggregate;
  const char* keys[] = {"auc",   "ppcr",  "pqeom",   "pqom", "pcfa",
                        "tqm95", "max_acc", "argmax_q", "s_acc"};
  for (const char* key : keys) {
    std::vector<double> values;
    for (const auto& rep : reports) {
      if (!rep.at(key).is_null()) values.push_back(rep.at(key).get<double>());
    }
    if (values.empty()) {
      aggregate[std::string(key) + "_mean"] = nullptr;
      aggregate[std::string(key) + "_sd"] = nullptr;
      continue;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double sd = 0.0;
    if (values.size() > 1) {
      for (double v : values) sd += (v - mean) * (v - mean);
      sd = std::sqrt(sd / static_cast<double>(values.size() - 1));
    }
    aggregate[std::string(key) + "_mean"] = mean;
    aggregate[std::string(key) + "_sd"] = sd;
  }
  aggregate["replicates"] = base.replicates;

  if (base.write_artifacts) {
    fs::create_directories(base.output_dir);
    write_text(fs::path(base.output_dir) / "replicate_report.json",
               aggregate.dump(2) + "\n");
  }
  summary.per_replicate = std::move(reports);
  summary.aggregate = std::move(aggregate);
  return summary;
}

}  // namespace ensalloc
