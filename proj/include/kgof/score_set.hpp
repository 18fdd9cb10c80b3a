#pragma once

#include <vector>

#include "kgof/distribution.hpp"

namespace kgof {

/// Orthonormal score system q_0, ..., q_K in the D_p inner product.
/// q_0 is the all-ones vector; the remaining entries are normalised score
/// functions (or synthetic directions for a parameter-free target).
struct ScoreSet {
  std::vector<Vec> vectors;  // K+1 vectors of length N
  Vec weight_probs;          // the p they are orthonormal against

  int param_dim() const { return static_cast<int>(vectors.size()) - 1; }
  int size() const { return static_cast<int>(weight_probs.size()); }
};

}  // namespace kgof
