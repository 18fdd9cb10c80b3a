#pragma once

// Process increments on a discrete time scale: Brownian motion in time P,
// score-projected processes, empirical increments from cell counts, the
// function-parametric pairing, and application of the rotation.

#include <cstdint>

#include "kgof/distribution.hpp"
#include "kgof/operators.hpp"
#include "kgof/score_set.hpp"

namespace kgof {

enum class ProcessKind { Bm, Projected, Empirical, Rotated };

struct ProcessIncrements {
  Vec values;
  DiscreteDistribution time_scale;
  ProcessKind kind = ProcessKind::Bm;

  int size() const { return static_cast<int>(values.size()); }
};

/// Test function paired with increments: values phi(x_j) over a reference
/// distribution.
struct DualFunction {
  Vec values;
  DiscreteDistribution space;
};

/// Increments of BM in time P: sqrt(p_j) z_j with z standard normal,
/// deterministic given (seed, replicate).
ProcessIncrements simulate_bm_increments(const DiscreteDistribution& dist,
                                         std::uint64_t seed,
                                         std::uint64_t replicate_index);

/// Apply a projection to increments (BM -> score-projected process).
ProcessIncrements project_increments(const ProcessIncrements& dw,
                                     const LinearOperator& projection);

/// Scaled empirical increments (nu_j - n p_j) / sqrt(n).
ProcessIncrements empirical_increments(const CellCounts& counts, const Vec& probs,
                                       const DiscreteDistribution& dist);

/// Function-parametric value phi^T dv. SpaceMismatch when phi lives over a
/// different discretization than the increments.
double eval_functional(const DualFunction& phi, const ProcessIncrements& dv);

/// Indicator of (-inf, t): values_j = 1 iff x_j < t.
DualFunction heaviside(double t, const DiscreteDistribution& dist);

/// Apply the dual (transposed) operator to a test function.
DualFunction apply_dual(const LinearOperator& op, const DualFunction& phi);

/// Rotated functional value (V_K L psi)^T dv_P, with psi over the target
/// space.
double rotate_functional(const DualFunction& psi, const LinearOperator& v_k,
                         const LinearOperator& l_embed,
                         const ProcessIncrements& dv_p);

/// Primal form of the rotation: increments L V_K^T dv_P living on the target
/// scale. For every psi, eval_functional(psi, result) equals
/// rotate_functional(psi, ...).
ProcessIncrements primal_rotation(const ProcessIncrements& dv_p,
                                  const LinearOperator& v_k,
                                  const LinearOperator& l_embed,
                                  const DiscreteDistribution& target);

/// Cumulative path of the increments (prefix sums).
Vec cumulative_path(const ProcessIncrements& dv);

}  // namespace kgof
