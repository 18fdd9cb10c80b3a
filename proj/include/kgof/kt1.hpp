#pragma once

// First transform in the mortality-investigation setting: predict each
// cell's deaths by regressing on the future (survivors and their future
// scores), and emit the scaled prediction residuals as innovation
// increments.

#include "kgof/distribution.hpp"
#include "kgof/family.hpp"
#include "kgof/processes.hpp"

namespace kgof {

/// Everything the per-cell regression needs, precomputed at theta-hat.
/// All tail quantities are discrete analogues: integrals become sums over
/// cells from the given cell onwards.
struct Kt1State {
  Vec theta_hat;      // scalar parameter (K = 1)
  Vec probs;          // p_j at theta_hat
  Vec score;          // raw score Q_1j at theta_hat
  Vec tail_mass;      // sum_{j >= l} p_j      (1 - F at the cell start)
  Vec head_mass;      // sum_{j < l} p_j       (F at the cell start)
  Vec tail_score;     // sum_{j >= l} Q_1j p_j
  Vec tail_score_sq;  // sum_{j >= l} Q_1j^2 p_j
  Vec cond_mean;      // tail_score / tail_mass (score mean among survivors)

  int size() const { return static_cast<int>(probs.size()); }
};

/// Which prediction formula to use. Centered subtracts the regressor means
/// (the regression satisfies its normal equations exactly); Uncentered keeps
/// the raw-moment form. Centered is the default.
enum class Kt1Predictor { Centered, Uncentered };

struct Kt1Regressors {
  double x1 = 0.0;  // fraction of the sample at risk: (1/n) sum_{j>=l} nu_j
  double x2 = 0.0;  // score-weighted tail: (1/n) sum_{j>=l} Q_1j nu_j
};

/// Maximum-likelihood estimate for a scalar parameter from grouped counts,
/// solving sum_j Q_1j(theta) nu_j = 0 by safeguarded Newton/bisection.
Vec mle_discrete(const CellCounts& counts, const ParametricFamily& family,
                 const Vec& theta0, const DiscreteDistribution& dist);

Kt1State build_kt1_state(const ParametricFamily& family, const Vec& theta_hat,
                         const DiscreteDistribution& dist);

/// Expected score among survivors of cell `cell` (0-based), the discrete
/// analogue of the conditional expectation given survival.
double conditional_score_mean(const ParametricFamily& family, const Vec& theta,
                              const DiscreteDistribution& dist, int cell);

Kt1Regressors kt1_regressors(const CellCounts& counts, const Vec& score, int cell);

/// Centered second regressor (1/n) sum_{j>=l} [Q_1j - E^t] nu_j.
double kt1_centered_regressor(const CellCounts& counts, const Kt1State& state,
                              int cell);

/// Predicted cell fraction nu_hat_l / n from the two-regressor formula.
/// SingularCovariance when the 2x2 regressor covariance is not invertible
/// (always the case at the first and last cells).
double kt1_predict(const CellCounts& counts, const Kt1State& state, int cell,
                   Kt1Predictor predictor = Kt1Predictor::Centered);

/// Largest usable 1-based cell index: every cell up to the cutoff has tail
/// mass >= 5/n and (except the first cell, which has its own exact limiting
/// form) an invertible regressor covariance.
int default_cutoff(const Kt1State& state, long long sample_size);

/// Innovation increments sqrt(n) (nu_l/n - nu_hat_l/n) for cells before the
/// cutoff, zero beyond. The first cell uses the exact limit of the centered
/// prediction (the regressor covariance is singular there because everyone
/// is still at risk).
ProcessIncrements kt1_innovations(const CellCounts& counts,
                                  const ParametricFamily& family,
                                  const Vec& theta_hat,
                                  const DiscreteDistribution& dist, int cutoff,
                                  Kt1Predictor predictor = Kt1Predictor::Centered);

}  // namespace kgof
