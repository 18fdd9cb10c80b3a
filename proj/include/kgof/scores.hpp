#pragma once

// Raw score vectors Q_k (per-cell logarithmic derivatives of cell
// probabilities), the information matrix, and the orthonormalised score set.

#include "kgof/distribution.hpp"
#include "kgof/family.hpp"
#include "kgof/score_set.hpp"

namespace kgof {

struct InformationMatrix {
  Mat matrix;  // K x K, symmetric positive definite
};

/// Raw scores Q_k with entries (dp_j/dtheta_k) / p_j, one column per
/// parameter. Uses the family's analytic Jacobian when present, otherwise
/// central finite differences on the cell probabilities. Each column is
/// centred so that sum_j dp_j/dtheta_k = 0 holds exactly (checked to 1e-8
/// before centring).
Mat raw_scores(const ParametricFamily& family, const Vec& theta,
               const DiscreteDistribution& dist);

/// Finite-difference raw scores (exposed for the analytic-vs-FD check).
Mat raw_scores_fd(const ParametricFamily& family, const Vec& theta,
                  const DiscreteDistribution& dist);

/// Gamma_{jk} = Q_j^T D_p Q_k. SingularInformation when not (numerically)
/// positive definite or condition number > 1e12.
InformationMatrix information_matrix(const Mat& raw, const Vec& probs);

/// Symmetric inverse square root via eigendecomposition.
Mat inv_sqrt_psd(const InformationMatrix& info);

/// Orthonormal score set: columns of Q Gamma^{-1/2} behind q_0 = ones, with
/// one Gram-Schmidt cleanup pass in the D_p inner product.
ScoreSet normalize_scores(const Mat& raw, const InformationMatrix& info,
                          const Vec& probs);

/// Convenience: raw scores -> information -> normalised set.
ScoreSet score_set_for(const ParametricFamily& family, const Vec& theta,
                       const DiscreteDistribution& dist);

/// Deterministic synthetic target scores: s_0 = ones plus param_dim
/// D_r-orthonormalised low-order polynomials in the grid atoms.
ScoreSet synthetic_score_set(const DiscreteDistribution& dist, int param_dim);

}  // namespace kgof
