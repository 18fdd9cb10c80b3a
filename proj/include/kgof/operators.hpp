#pragma once

// Dense operator constructions: the projections that carry Brownian motion
// onto score-projected processes, the weighted reflections that swap score
// directions, the diagonal embedding between weighted L2 spaces, and the
// rotation assembled from successive reflections.

#include <optional>

#include "kgof/distribution.hpp"
#include "kgof/score_set.hpp"

namespace kgof {

enum class OperatorRole { Projection, Reflection, Embedding, Rotation, Accumulation };

const char* operator_role_name(OperatorRole role);

struct LinearOperator {
  Mat matrix;
  OperatorRole role = OperatorRole::Projection;
  std::optional<Vec> weight;  // the p the operator is adapted to

  int size() const { return static_cast<int>(matrix.rows()); }
};

/// pi_{sqrt p} = I - sqrt(p) sqrt(p)^T: symmetric idempotent, annihilates
/// sqrt(p).
LinearOperator pi_sqrt(const Vec& probs);

/// Estimated-parameter analogue I - sum_k D_p^{1/2} q_k q_k^T D_p^{1/2}
/// (symmetric idempotent in the unweighted inner product).
LinearOperator pi_sqrt_hat(const ScoreSet& scores);

/// Primal projection Pi = I - D_p sum_k q_k q_k^T. Scores must be
/// D_p-orthonormal to 1e-8 (NonOrthonormalScores otherwise).
LinearOperator big_pi(const Vec& probs, const ScoreSet& scores);

/// Unweighted reflection swapping unit vectors a and b:
/// U0 = I - (a-b)(a-b)^T / (1 - <a,b>). DegenerateReflection when a ~ b.
LinearOperator reflection_u0(const Vec& a, const Vec& b);

/// Weighted involution swapping P-unit vectors xi and eta:
/// U = I - c (xi-eta)(xi-eta)^T D_p, c = 1 / (1 - <xi,eta>_P).
/// Preserves the P-norm; fixes everything P-orthogonal to both.
LinearOperator reflection_weighted(const Vec& xi, const Vec& eta, const Vec& probs);

/// Diagonal embedding L = D_r^{1/2} D_p^{-1/2}, so that L D_p L = D_r.
LinearOperator embed_L(const Vec& p, const Vec& r);

/// Rotation V_K with V_K L s_k = q_k for all k and V_K^T D_p V_K = D_p,
/// built by the reflection recursion W_j = U_{q_j, V_{j-1} L s_j}.
/// A step whose vectors are already aligned (P-distance < 1e-10) contributes
/// the identity instead of erroring.
LinearOperator rotation_vk(const ScoreSet& q_set, const ScoreSet& s_set,
                           const Vec& p, const Vec& r);

/// Prefix sums (the accumulation matrix J applied to v).
Vec accumulate(const Vec& v);

/// Weighted inner product <a,b>_P = a^T D_p b.
double weighted_dot(const Vec& a, const Vec& b, const Vec& probs);

/// Weighted norm ||a||_P.
double weighted_norm(const Vec& a, const Vec& probs);

}  // namespace kgof
