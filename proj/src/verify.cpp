#include "ensalloc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ensalloc/allocation.hpp"
#include "ensalloc/metrics.hpp"

namespace ensalloc {

namespace {

struct Instance {
  SufficiencyPartition part;
  std::vector<double> losses_g;
  std::vector<double> losses_b;
};

Instance random_instance(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_real_distribution<double> loss(0.0, 2.0);
  std::vector<int> s_g(static_cast<std::size_t>(n)), s_b(static_cast<std::size_t>(n));
  Instance inst;
  for (int i = 0; i < n; ++i) {
    s_g[static_cast<std::size_t>(i)] = bit(rng);
    s_b[static_cast<std::size_t>(i)] = bit(rng);
    inst.losses_g.push_back(loss(rng));
    inst.losses_b.push_back(loss(rng));
  }
  inst.part = partition_from_indicators(s_g, s_b);
  return inst;
}

// Walks every n_q-subset of {0..n-1}, reporting the exact maximum of
// sum(s_g over mask) + sum(s_b off mask) and, among maximizers, the maximum
// glass-box share. Sufficiency sums are integers, so comparisons are exact.
void enumerate_masks(const SufficiencyPartition& part, int n_q, int* best_total,
                     int* best_glass_among_best) {
  const int n = part.size();
  std::vector<int> pick(static_cast<std::size_t>(n_q));
  std::iota(pick.begin(), pick.end(), 0);

  int total_s_b = 0;
  for (int v : part.s_b) total_s_b += v;

  *best_total = -1;
  *best_glass_among_best = -1;
  while (true) {
    int glass = 0, swing = 0;
    for (int idx : pick) {
      glass += part.s_g[static_cast<std::size_t>(idx)];
      swing += part.s_g[static_cast<std::size_t>(idx)] -
               part.s_b[static_cast<std::size_t>(idx)];
    }
    const int total = total_s_b + swing;
    if (total > *best_total) {
      *best_total = total;
      *best_glass_among_best = glass;
    } else if (total == *best_total) {
      *best_glass_among_best = std::max(*best_glass_among_best, glass);
    }

    if (n_q == 0) break;
    int i = n_q - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - n_q + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n_q; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

int mask_total(const SufficiencyPartition& part, const std::vector<std::uint8_t>& mask) {
  int total = 0;
  for (int i = 0; i < part.size(); ++i) {
    total += mask[static_cast<std::size_t>(i)] ? part.s_g[static_cast<std::size_t>(i)]
                                               : part.s_b[static_cast<std::size_t>(i)];
  }
  return total;
}

int mask_glass(const SufficiencyPartition& part, const std::vector<std::uint8_t>& mask) {
  int glass = 0;
  for (int i = 0; i < part.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) glass += part.s_g[static_cast<std::size_t>(i)];
  }
  return glass;
}

}  // namespace

std::vector<VerifyResult> verify_allocation_optimality(std::uint64_t seed,
                                                       int instances) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size_dist(6, 12);

  VerifyResult perf_max{"maximal sufficient performance (exhaustive)", true, ""};
  VerifyResult glass_max{"maximal glass-box share among maximizers (exhaustive)", true, ""};
  VerifyResult intervals{"score intervals per category", true, ""};
  VerifyResult cardinality{"mask cardinality on the natural grid", true, ""};

  for (int it = 0; it < instances; ++it) {
    const int n = size_dist(rng);
    const Instance inst = random_instance(rng, n);
    const std::vector<double> scores =
        true_desirability_scores(inst.part, inst.losses_g, inst.losses_b);

    for (int i = 0; i < n; ++i) {
      static constexpr double lo[] = {-2.0, -1.0, 0.0, 1.0};
      const int c = static_cast<int>(inst.part.category[static_cast<std::size_t>(i)]);
      const double s = scores[static_cast<std::size_t>(i)];
      if (!(s > lo[c] && s < lo[c] + 1.0)) {
        intervals.pass = false;
        intervals.detail = "score " + std::to_string(s) + " outside interval of " +
                        to_string(inst.part.category[static_cast<std::size_t>(i)]);
      }
    }

    for (int i = 0; i <= n; ++i) {
      const double q = static_cast<double>(i) / n;
      const std::vector<std::uint8_t> mask = allocate_top_q(scores, q);
      const int ones = static_cast<int>(std::count(mask.begin(), mask.end(), 1));
      if (ones != i) {
        cardinality.pass = false;
        cardinality.detail = "expected " + std::to_string(i) + " ones, got " +
                        std::to_string(ones);
      }
      int best_total = 0, best_glass = 0;
      enumerate_masks(inst.part, i, &best_total, &best_glass);
      if (mask_total(inst.part, mask) != best_total) {
        perf_max.pass = false;
        perf_max.detail = "instance " + std::to_string(it) + " q=" + std::to_string(q);
      }
      if (mask_glass(inst.part, mask) != best_glass) {
        glass_max.pass = false;
        glass_max.detail = "instance " + std::to_string(it) + " q=" + std::to_string(q);
      }
    }
  }

  VerifyResult nested{"nested masks across increasing q", true, ""};
  {
    std::uniform_real_distribution<double> score(-2.0, 2.0);
    const std::vector<double> grid = make_q_grid(41);
    for (int it = 0; it < 100; ++it) {
      const int n = 20 + (it % 60);
      std::vector<double> scores(static_cast<std::size_t>(n));
      for (double& s : scores) s = score(rng);
      const DesirabilityRanking ranking = desirability_percentile(scores);
      std::vector<std::uint8_t> prev(static_cast<std::size_t>(n), 0);
      for (double q : grid) {
        const std::vector<std::uint8_t> cur = allocate_top_q(ranking, q);
        for (int i = 0; i < n; ++i) {
          if (prev[static_cast<std::size_t>(i)] && !cur[static_cast<std::size_t>(i)]) {
            nested.pass = false;
            nested.detail = "mask shrank at q=" + std::to_string(q);
          }
        }
        prev = cur;
      }
    }
  }

  VerifyResult reduction{"always-sufficient reduction to loss-difference order", true, ""};
  {
    std::uniform_real_distribution<double> loss(0.0, 2.0);
    std::uniform_int_distribution<int> dup(0, 3);
    for (int it = 0; it < instances; ++it) {
      const int n = 6 + (it % 30);
      std::vector<double> lg(static_cast<std::size_t>(n)), lb(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        lg[static_cast<std::size_t>(i)] = loss(rng);
        lb[static_cast<std::size_t>(i)] = loss(rng);
      }
      if (n >= 2 && dup(rng) == 0) {  // exercise the id tie-break
        lg[1] = lg[0];
        lb[1] = lb[0];
      }
      std::vector<double> scores(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        scores[static_cast<std::size_t>(i)] = desirability_score(
            1, 1, lg[static_cast<std::size_t>(i)], lb[static_cast<std::size_t>(i)]);
      }
      const DesirabilityRanking ranking = desirability_percentile(scores);

      // allocation priority = descending rank; expected order ascending in
      // loss_b - loss_g (descending id on ties, mirroring the rank rule)
      std::vector<int> priority(static_cast<std::size_t>(n));
      std::iota(priority.begin(), priority.end(), 0);
      std::sort(priority.begin(), priority.end(), [&](int a, int b) {
        return ranking.rank[static_cast<std::size_t>(a)] >
               ranking.rank[static_cast<std::size_t>(b)];
      });
      std::vector<int> expected(static_cast<std::size_t>(n));
      std::iota(expected.begin(), expected.end(), 0);
      std::sort(expected.begin(), expected.end(), [&](int a, int b) {
        const double da = lb[static_cast<std::size_t>(a)] - lg[static_cast<std::size_t>(a)];
        const double db = lb[static_cast<std::size_t>(b)] - lg[static_cast<std::size_t>(b)];
        if (da != db) return da < db;
        return a > b;
      });
      if (priority != expected) {
        reduction.pass = false;
        reduction.detail = "instance " + std::to_string(it);
      }
    }
  }

  return {perf_max, glass_max, nested, intervals, cardinality, reduction};
}

}  // namespace ensalloc
