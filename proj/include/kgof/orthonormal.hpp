#pragma once

#include <vector>

#include "kgof/distribution.hpp"
#include "kgof/rng.hpp"
#include "kgof/score_set.hpp"

namespace kgof {

/// One Gram-Schmidt pass in the D_p inner product, in place. The first
/// keep_first entries are assumed orthonormal already and are not modified.
void gram_schmidt_weighted(std::vector<Vec>& vectors, const Vec& probs,
                           int keep_first = 0);

/// Random D_p-orthonormal set (count vectors) from a seeded standard-normal
/// draw, Gram-Schmidt in the weighted inner product.
std::vector<Vec> random_weighted_orthonormal(const Vec& probs, int count,
                                             RandomStream& stream);

/// Random score set: q_0 = ones plus `param_dim` random orthonormal
/// directions (all D_p-orthonormal).
ScoreSet random_score_set(const Vec& probs, int param_dim, RandomStream& stream);

/// Random positive probability vector (normalised |N(0,1)| + 0.1 entries).
Vec random_probability_vector(int n, RandomStream& stream);

}  // namespace kgof
