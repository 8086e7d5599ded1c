#pragma once

#include <cstdint>

#include "ensalloc/data.hpp"

namespace ensalloc {

/// Noiseless label rule of the complementary two-class task on [-1,1]^2.
///
/// Left half-plane (x1 < 0): class 1 inside the L1 ball
///   |x1 + 0.5| + |x2| < 0.4, class 0 outside. A few axis-aligned splits
/// capture this region, so a shallow tree does well here.
///
/// Right half-plane (x1 >= 0): class 1 where sin(2*theta - 3*r) > 0 with
/// (r, theta) polar about (0.5, 0) — a two-arm spiral that a shallow tree
/// cannot carve but a boosted ensemble can.
int complementary_label(double x1, double x2);

/// Samples n points uniformly on [-1,1]^2, labels them with
/// complementary_label, then flips each label independently with probability
/// `noise`. Deterministic given the seed. Requires n >= 100.
Dataset gen_complementary_2d(int n, std::uint64_t seed, double noise);

}  // namespace ensalloc
