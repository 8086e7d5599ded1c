#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ensalloc/metrics.hpp"

using namespace ensalloc;

namespace {

PerformanceCurve curve_of(std::vector<double> q, std::vector<double> t_bar) {
  PerformanceCurve c;
  c.q = std::move(q);
  c.t_bar = std::move(t_bar);
  c.t_bar_g.assign(c.q.size(), 0.0);
  c.tag.assign(c.q.size(), AllocatorTag::feature_dependent);
  return c;
}

SufficiencyPartition random_partition(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> bit(0, 1);
  std::vector<int> s_g(static_cast<std::size_t>(n)), s_b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    s_g[static_cast<std::size_t>(i)] = bit(rng);
    s_b[static_cast<std::size_t>(i)] = bit(rng);
  }
  return partition_from_indicators(s_g, s_b);
}

}  // namespace

TEST_CASE("curve endpoints follow the partition means") {
  // one observation per category
  const SufficiencyPartition part =
      partition_from_indicators(std::vector<int>{1, 0, 1, 0}, std::vector<int>{0, 1, 1, 0});
  const std::vector<double> losses(4, 0.5);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  std::vector<std::vector<std::uint8_t>> masks;
  for (double q : grid) masks.push_back(oracle_allocation(part, losses, losses, q));
  const PerformanceCurve curve =
      curve_from_masks(grid, masks, part, AllocatorTag::oracle);

  CHECK(curve.t_bar[0] == doctest::Approx(part.mean_s_b()));
  CHECK(curve.t_bar_g[0] == 0.0);
  CHECK(curve.t_bar[2] == doctest::Approx(part.mean_s_g()));
  // oracle at q = 1/2 sends Zg and Z2 to the glass box: 3 of 4 sufficient
  CHECK(curve.t_bar[1] == doctest::Approx(0.75));
}

TEST_CASE("trapezoidal auc anchors") {
  const std::vector<double> grid3 = make_q_grid(3);
  CHECK(auc(grid3, std::vector<double>{0.8, 0.8, 0.8}) == doctest::Approx(0.8));
  CHECK(auc(grid3, std::vector<double>{0.0, 0.5, 1.0}) == doctest::Approx(0.5));
  CHECK(auc(grid3, std::vector<double>{0.0, 1.0, 1.0}) == doctest::Approx(0.75));
}

TEST_CASE("ppcr anchors and the degenerate denominator") {
  CHECK(*ppcr(0.9, 0.5, 0.9) == doctest::Approx(1.0));
  CHECK(*ppcr(0.5, 0.5, 0.9) == doctest::Approx(0.0));
  CHECK(*ppcr(0.4, 0.5, 0.9) < 0.0);
  CHECK(!ppcr(0.7, 0.6, 0.6).has_value());
}

TEST_CASE("pqeom counts >= and pqom counts > against the best component") {
  {
    const std::vector<double> q = make_q_grid(5);
    const PerformanceCurve c = curve_of(q, std::vector<double>(5, 0.8));
    CHECK(pqeom(c, 0.8, 0.7) == doctest::Approx(1.0));
    CHECK(pqom(c, 0.8, 0.7) == doctest::Approx(0.0));
  }
  {
    const std::vector<double> q = make_q_grid(41);
    std::vector<double> v(41, 0.9);
    v.front() = 0.8;
    v.back() = 0.8;  // equal to max at the endpoints, above inside
    const PerformanceCurve c = curve_of(q, v);
    CHECK(pqeom(c, 0.8, 0.75) == doctest::Approx(1.0));
    CHECK(pqom(c, 0.8, 0.75) == doctest::Approx(39.0 / 41.0));
  }
  {
    const std::vector<double> q = make_q_grid(41);
    std::vector<double> v(41, 0.5);
    v.front() = 0.8;  // compliant only at q = 0
    const PerformanceCurve c = curve_of(q, v);
    CHECK(pqeom(c, 0.7, 0.8) == doctest::Approx(1.0 / 41.0));
  }
}

TEST_CASE("pcfa fractions") {
  using Tag = AllocatorTag;
  std::vector<Tag> all_dep(10, Tag::feature_dependent);
  std::vector<Tag> all_ind(10, Tag::feature_independent);
  CHECK(pcfa(all_dep) == 1.0);
  CHECK(pcfa(all_ind) == 0.0);
  std::vector<Tag> half = all_dep;
  for (int i = 0; i < 5; ++i) half[static_cast<std::size_t>(i)] = Tag::feature_independent;
  CHECK(pcfa(half) == 0.5);
}

TEST_CASE("tqm95 returns the highest compliant grid point") {
  const std::vector<double> q = make_q_grid(11);
  CHECK(tqm95(curve_of(q, std::vector<double>(11, 0.8)), 0.8, 0.7) == 1.0);

  std::vector<double> decay(11, 0.8);
  for (int i = 8; i < 11; ++i) decay[static_cast<std::size_t>(i)] = 0.5;  // drops after q=0.7
  CHECK(tqm95(curve_of(q, decay), 0.8, 0.7) == doctest::Approx(0.7));

  CHECK(tqm95(curve_of(q, std::vector<double>(11, 0.1)), 0.8, 0.7) == 0.0);
}

TEST_CASE("max accuracy keeps the highest q on plateaus") {
  const std::vector<double> q = make_q_grid(11);
  std::vector<double> dec(11);
  for (int i = 0; i < 11; ++i) dec[static_cast<std::size_t>(i)] = 1.0 - 0.05 * i;
  CHECK(max_acc_argmax(curve_of(q, dec)).second == 0.0);

  std::vector<double> plateau(11, 0.5);
  for (int i = 6; i <= 9; ++i) plateau[static_cast<std::size_t>(i)] = 0.9;  // [0.6, 0.9]
  const auto [mx, arg] = max_acc_argmax(curve_of(q, plateau));
  CHECK(mx == doctest::Approx(0.9));
  CHECK(arg == doctest::Approx(0.9));

  std::vector<double> peak(11, 0.5);
  peak[5] = 0.95;
  const auto [mx2, arg2] = max_acc_argmax(curve_of(q, peak));
  CHECK(mx2 == doctest::Approx(0.95));
  CHECK(arg2 == doctest::Approx(0.5));
}

TEST_CASE("s_acc counts exact matches") {
  using C = Category;
  const std::vector<C> truth{C::Zg, C::Zb, C::Z2, C::Z0};
  CHECK(s_acc(truth, truth) == 1.0);
  const std::vector<C> wrong{C::Zb, C::Zg, C::Z0, C::Z2};
  CHECK(s_acc(wrong, truth) == 0.0);
  std::vector<C> mostly = truth;
  mostly[3] = C::Z2;
  CHECK(s_acc(mostly, truth) == 0.75);
  const std::vector<C> shorter{C::Zg};
  CHECK_THROWS_AS(s_acc(shorter, truth), std::invalid_argument);
}

TEST_CASE("q grid construction and validation") {
  const std::vector<double> grid = make_q_grid(41);
  CHECK(grid.size() == 41);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(grid[20] == 0.5);
  validate_q_grid(grid);
  CHECK_THROWS_AS(validate_q_grid(std::vector<double>{0.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(validate_q_grid(std::vector<double>{0.1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate_q_grid(std::vector<double>{0.0, 0.5, 0.5, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("oracle dominates every allocator at every grid point, exactly") {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> loss(0.0, 2.0);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  const std::vector<double> grid = make_q_grid(21);
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 60;
    const SufficiencyPartition part = random_partition(rng, n);
    std::vector<double> lg(static_cast<std::size_t>(n)), lb(static_cast<std::size_t>(n)),
        arbitrary(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      lg[static_cast<std::size_t>(i)] = loss(rng);
      lb[static_cast<std::size_t>(i)] = loss(rng);
      arbitrary[static_cast<std::size_t>(i)] = noise(rng);
    }
    const std::vector<double> oracle_scores = true_desirability_scores(part, lg, lb);
    const PerformanceCurve oracle =
        curve_from_scores(grid, oracle_scores, part, AllocatorTag::oracle);
    const PerformanceCurve other =
        curve_from_scores(grid, arbitrary, part, AllocatorTag::feature_dependent);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(oracle.t_bar[i] >= other.t_bar[i]);
    }
    // endpoint agreement for any allocator
    CHECK(other.t_bar.front() == doctest::Approx(part.mean_s_b()));
    CHECK(other.t_bar.back() == doctest::Approx(part.mean_s_g()));
  }
}

TEST_CASE("the random-expectation curve is exactly linear with the stated auc") {
  std::mt19937_64 rng(707);
  const SufficiencyPartition part = random_partition(rng, 100);
  const std::vector<double> grid = make_q_grid(41);
  const std::vector<double> curve = random_expectation_curve(part, grid);
  const double mg = part.mean_s_g(), mb = part.mean_s_b();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(curve[i] == doctest::Approx(grid[i] * mg + (1 - grid[i]) * mb).epsilon(1e-12));
  }
  CHECK(auc(grid, curve) == doctest::Approx((mg + mb) / 2.0).epsilon(1e-12));
  const double area = auc(grid, curve);
  CHECK(area >= 0.0);
  CHECK(area <= 1.0);
}
