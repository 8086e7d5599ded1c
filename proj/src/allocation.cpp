#include "ensalloc/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ensalloc {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double desirability_score(int s_g, int s_b, double loss_g, double loss_b) {
  if (!std::isfinite(loss_g) || !std::isfinite(loss_b)) {
    throw std::invalid_argument("losses must be finite");
  }
  return 2.0 * s_g - s_b - logistic(loss_b - loss_g);
}

std::vector<double> true_desirability_scores(const SufficiencyPartition& part,
                                             std::span<const double> losses_g,
                                             std::span<const double> losses_b) {
  const int n = part.size();
  if (static_cast<int>(losses_g.size()) != n ||
      static_cast<int>(losses_b.size()) != n) {
    throw std::invalid_argument("loss sequences must match the partition size");
  }
  std::vector<double> scores(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    scores[static_cast<std::size_t>(i)] =
        desirability_score(part.s_g[static_cast<std::size_t>(i)],
                           part.s_b[static_cast<std::size_t>(i)],
                           losses_g[static_cast<std::size_t>(i)],
                           losses_b[static_cast<std::size_t>(i)]);
  }
  return scores;
}

DesirabilityRanking desirability_percentile(std::span<const double> scores) {
  const int n = static_cast<int>(scores.size());
  if (n < 1) throw std::invalid_argument("need at least one score");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa < sb;
    return a < b;  // ascending id on ties
  });
  DesirabilityRanking r;
  r.raw.assign(scores.begin(), scores.end());
  r.rank.resize(static_cast<std::size_t>(n));
  r.percentile.resize(static_cast<std::size_t>(n));
  for (int pos = 0; pos < n; ++pos) {
    const int idx = order[static_cast<std::size_t>(pos)];
    r.rank[static_cast<std::size_t>(idx)] = pos + 1;
    r.percentile[static_cast<std::size_t>(idx)] =
        static_cast<double>(pos + 1) / static_cast<double>(n);
  }
  return r;
}

int top_count(double q, int n) {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("q must lie in [0, 1]");
  return static_cast<int>(std::nearbyint(q * n));
}

std::vector<std::uint8_t> allocate_top_q(const DesirabilityRanking& ranking,
                                         double q) {
  const int n = static_cast<int>(ranking.rank.size());
  const int n_q = top_count(q, n);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    if (ranking.rank[static_cast<std::size_t>(i)] > n - n_q) {
      mask[static_cast<std::size_t>(i)] = 1;
    }
  }
  return mask;
}

std::vector<std::uint8_t> allocate_top_q(std::span<const double> scores, double q) {
  return allocate_top_q(desirability_percentile(scores), q);
}

std::vector<std::uint8_t> oracle_allocation(const SufficiencyPartition& part,
                                            std::span<const double> losses_g,
                                            std::span<const double> losses_b,
                                            double q) {
  return allocate_top_q(true_desirability_scores(part, losses_g, losses_b), q);
}

std::vector<double> random_expectation_curve(const SufficiencyPartition& part,
                                             std::span<const double> q_grid) {
  const double mg = part.mean_s_g();
  const double mb = part.mean_s_b();
  std::vector<double> curve;
  curve.reserve(q_grid.size());
  for (double q : q_grid) curve.push_back(q * mg + (1.0 - q) * mb);
  return curve;
}

std::vector<double> sampled_random_curve(const SufficiencyPartition& part,
                                         std::span<const double> q_grid, int draws,
                                         std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("need at least one draw");
  const int n = part.size();
  std::mt19937_64 rng(seed);
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);

  double sum_s_b = 0.0;
  for (int v : part.s_b) sum_s_b += v;

  std::vector<double> curve;
  curve.reserve(q_grid.size());
  for (double q : q_grid) {
    const int n_q = top_count(q, n);
    double total = 0.0;
    for (int d = 0; d < draws; ++d) {
      // partial Fisher-Yates; the pool stays a permutation across draws
      double t = sum_s_b;
      for (int i = 0; i < n_q; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)],
                  pool[static_cast<std::size_t>(pick(rng))]);
        const int row = pool[static_cast<std::size_t>(i)];
        t += part.s_g[static_cast<std::size_t>(row)] -
             part.s_b[static_cast<std::size_t>(row)];
      }
      total += t / n;
    }
    curve.push_back(total / draws);
  }
  return curve;
}

// ---------------------------------------------------------------------------

void AllocatorFeatureSet::validate(TaskKind task) const {
  if (!use_x && !use_g && !use_b && !use_d_ce && !use_d_mse) {
    throw std::invalid_argument("allocator feature set must be non-empty");
  }
  if (use_d_ce && task == TaskKind::regression) {
    throw std::invalid_argument("d_ce is undefined for regression outputs");
  }
}

std::string AllocatorFeatureSet::to_string() const {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(use_x, "x");
  add(use_g, "g");
  add(use_b, "b");
  add(use_d_ce, "d_ce");
  add(use_d_mse, "d_mse");
  return s;
}

AllocatorFeatureSet AllocatorFeatureSet::parse(const std::string& spec) {
  AllocatorFeatureSet set;
  set.use_x = set.use_g = set.use_b = set.use_d_ce = set.use_d_mse = false;
  std::size_t begin = 0;
  while (begin <= spec.size()) {
    std::size_t end = spec.find(',', begin);
    if (end == std::string::npos) end = spec.size();
    const std::string tok = spec.substr(begin, end - begin);
    if (tok == "x") set.use_x = true;
    else if (tok == "g") set.use_g = true;
    else if (tok == "b") set.use_b = true;
    else if (tok == "d_ce") set.use_d_ce = true;
    else if (tok == "d_mse") set.use_d_mse = true;
    else if (!tok.empty()) throw std::invalid_argument("unknown allocator feature: " + tok);
    begin = end + 1;
  }
  return set;
}

std::vector<AllocatorFeatureSet> AllocatorFeatureSet::standard_sets() {
  std::vector<AllocatorFeatureSet> sets;
  for (const char* spec :
       {"x", "g,b", "d_ce", "d_mse", "x,d_ce", "x,d_mse", "g,b,d_ce", "g,b,d_mse",
        "x,g,b", "x,g,b,d_ce", "x,g,b,d_mse", "x,g,b,d_ce,d_mse"}) {
    sets.push_back(parse(spec));
  }
  return sets;
}

double cross_entropy_distance(std::span<const double> proba_g,
                              std::span<const double> proba_b) {
  if (proba_g.size() != proba_b.size()) {
    throw std::invalid_argument("probability vectors differ in length");
  }
  double ce = 0.0;
  for (std::size_t k = 0; k < proba_g.size(); ++k) {
    ce -= proba_g[k] * std::log(std::max(proba_b[k], kProbabilityFloor));
  }
  return ce;
}

double mse_distance_proba(std::span<const double> proba_g,
                          std::span<const double> proba_b) {
  if (proba_g.size() != proba_b.size()) {
    throw std::invalid_argument("probability vectors differ in length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < proba_g.size(); ++k) {
    const double d = proba_g[k] - proba_b[k];
    sum += d * d;
  }
  return sum / static_cast<double>(proba_g.size());
}

double mse_distance_value(double g_value, double b_value) {
  const double d = g_value - b_value;
  return d * d;
}

std::vector<double> build_allocator_features(std::span<const double> x,
                                             const ModelOutputs& out_g,
                                             const ModelOutputs& out_b, int index,
                                             const AllocatorFeatureSet& set,
                                             TaskKind task) {
  set.validate(task);
  std::vector<double> features;
  if (set.use_x) features.insert(features.end(), x.begin(), x.end());
  if (task == TaskKind::classification) {
    const auto& pg = out_g.proba[static_cast<std::size_t>(index)];
    const auto& pb = out_b.proba[static_cast<std::size_t>(index)];
    if (set.use_g) features.insert(features.end(), pg.begin(), pg.end());
    if (set.use_b) features.insert(features.end(), pb.begin(), pb.end());
    if (set.use_d_ce) features.push_back(cross_entropy_distance(pg, pb));
    if (set.use_d_mse) features.push_back(mse_distance_proba(pg, pb));
  } else {
    const double vg = out_g.value[static_cast<std::size_t>(index)];
    const double vb = out_b.value[static_cast<std::size_t>(index)];
    if (set.use_g) features.push_back(vg);
    if (set.use_b) features.push_back(vb);
    if (set.use_d_mse) features.push_back(mse_distance_value(vg, vb));
  }
  return features;
}

std::vector<double> feature_independent_scores(const ModelOutputs& out_g,
                                               const ModelOutputs& out_b,
                                               TaskKind task) {
  const int n = out_g.size();
  if (out_b.size() != n) throw std::invalid_argument("output batches differ in size");
  std::vector<double> scores(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (task == TaskKind::classification) {
      scores[static_cast<std::size_t>(i)] =
          cross_entropy_distance(out_g.proba[static_cast<std::size_t>(i)],
                                 out_b.proba[static_cast<std::size_t>(i)]);
    } else {
      scores[static_cast<std::size_t>(i)] =
          mse_distance_value(out_g.value[static_cast<std::size_t>(i)],
                             out_b.value[static_cast<std::size_t>(i)]);
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------

std::vector<double> LearnedAllocator::scores(const Dataset& data,
                                             const ModelOutputs& out_g,
                                             const ModelOutputs& out_b) const {
  const int n = data.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::vector<double> f = build_allocator_features(
        data.observations[static_cast<std::size_t>(i)].x, out_g, out_b, i, features,
        task);
    out[static_cast<std::size_t>(i)] = model.predict_value(f);
  }
  return out;
}

Dataset build_allocator_dataset(const Dataset& train, const PredictionModel& g,
                                const PredictionModel& b,
                                const SufficiencyConfig& config,
                                const AllocatorFeatureSet& features,
                                Execution exec) {
  features.validate(train.task);
  const ModelOutputs out_g = batch_outputs(g, train, exec);
  const ModelOutputs out_b = batch_outputs(b, train, exec);
  const SufficiencyPartition part = partition(g, b, train, config, exec);
  const std::vector<double> losses_g = model_losses(g, train, exec);
  const std::vector<double> losses_b = model_losses(b, train, exec);
  const DesirabilityRanking ranking =
      desirability_percentile(true_desirability_scores(part, losses_g, losses_b));

  Dataset allocator_train;
  allocator_train.task = TaskKind::regression;
  allocator_train.n_classes = 0;
  const int n = train.size();
  allocator_train.observations.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Observation obs;
    obs.id = i;
    obs.x = build_allocator_features(train.observations[static_cast<std::size_t>(i)].x,
                                     out_g, out_b, i, features, train.task);
    obs.y = ranking.percentile[static_cast<std::size_t>(i)];
    allocator_train.observations.push_back(std::move(obs));
  }
  return allocator_train;
}

LearnedAllocator train_learned_allocator(const Dataset& train,
                                         const PredictionModel& g,
                                         const PredictionModel& b,
                                         const SufficiencyConfig& config,
                                         const AllocatorFeatureSet& features,
                                         const GbtParams& gbt_params,
                                         std::uint64_t seed, Execution exec) {
  const Dataset allocator_train =
      build_allocator_dataset(train, g, b, config, features, exec);
  GbtParams params = gbt_params;
  params.seed = seed;
  LearnedAllocator allocator{fit_gbt(allocator_train, params, exec), features,
                             train.task};
  return allocator;
}

// ---------------------------------------------------------------------------

std::string to_string(AllocatorTag tag) {
  switch (tag) {
    case AllocatorTag::feature_dependent: return "feature-dependent";
    case AllocatorTag::feature_independent: return "feature-independent";
    case AllocatorTag::oracle: return "oracle";
    case AllocatorTag::random_expectation: return "random-expectation";
  }
  return "?";
}

double sufficient_performance(const SufficiencyPartition& part,
                              std::span<const std::uint8_t> mask) {
  const int n = part.size();
  if (static_cast<int>(mask.size()) != n) {
    throw std::invalid_argument("mask does not cover the partition");
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += mask[static_cast<std::size_t>(i)] ? part.s_g[static_cast<std::size_t>(i)]
                                             : part.s_b[static_cast<std::size_t>(i)];
  }
  return sum / n;
}

double sufficient_glass_performance(const SufficiencyPartition& part,
                                    std::span<const std::uint8_t> mask) {
  const int n = part.size();
  if (static_cast<int>(mask.size()) != n) {
    throw std::invalid_argument("mask does not cover the partition");
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mask[static_cast<std::size_t>(i)]) sum += part.s_g[static_cast<std::size_t>(i)];
  }
  return sum / n;
}

EnsembleSelection ensemble_allocators(std::span<const double> learned_scores,
                                      std::span<const double> independent_scores,
                                      const SufficiencyPartition& validation_part,
                                      std::span<const double> q_grid) {
  const int n = validation_part.size();
  if (static_cast<int>(learned_scores.size()) != n ||
      static_cast<int>(independent_scores.size()) != n) {
    throw std::invalid_argument("scores must cover the validation set");
  }
  const DesirabilityRanking learned = desirability_percentile(learned_scores);
  const DesirabilityRanking independent = desirability_percentile(independent_scores);

  EnsembleSelection sel;
  sel.q_grid.assign(q_grid.begin(), q_grid.end());
  sel.tag.reserve(q_grid.size());
  sel.validation_learned.reserve(q_grid.size());
  sel.validation_independent.reserve(q_grid.size());
  for (double q : q_grid) {
    const double tl =
        sufficient_performance(validation_part, allocate_top_q(learned, q));
    const double ti =
        sufficient_performance(validation_part, allocate_top_q(independent, q));
    sel.validation_learned.push_back(tl);
    sel.validation_independent.push_back(ti);
    // ties prefer the simpler feature-independent rule
    sel.tag.push_back(tl > ti ? AllocatorTag::feature_dependent
                              : AllocatorTag::feature_independent);
  }
  return sel;
}

Category estimate_sufficiency_category(double percentile, int n_b, int n_0, int n_2,
                                       int n_g) {
  const double n = static_cast<double>(n_b) + n_0 + n_2 + n_g;
  if (n <= 0) throw std::invalid_argument("all category counts are zero");
  if (percentile <= n_b / n) return Category::Zb;
  if (percentile <= (n_b + n_0) / n) return Category::Z0;
  if (percentile <= (n_b + n_0 + n_2) / n) return Category::Z2;
  return Category::Zg;
}

}  // namespace ensalloc
