#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ensalloc {

struct VerifyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Brute-force checks of the allocator's exact guarantees on random
/// instances: top-q allocation attains the maximal sufficient performance
/// over all same-size masks, the maximal glass-box share among those
/// maximizers, nested masks across q, the per-category score intervals, the
/// exact mask cardinality on the natural grid, and the always-sufficient
/// reduction to loss-difference ordering.
std::vector<VerifyResult> verify_allocation_optimality(std::uint64_t seed,
                                                       int instances);

}  // namespace ensalloc
