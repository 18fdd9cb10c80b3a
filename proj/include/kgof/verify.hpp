#pragma once

// Named invariant checks for every module, runnable from the CLI `verify`
// command. Each check mirrors one documented invariant and reports a
// pass/fail plus a short measurement detail.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "kgof/family.hpp"
#include "kgof/kt1.hpp"
#include "kgof/rng.hpp"
#include "kgof/score_set.hpp"

namespace kgof {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20250801;
  int threads = 0;
  double operator_tolerance = 1e-10;  // max-norm bound for operator identities
};

std::vector<CheckResult> run_verification(const VerifyOptions& options);

std::string verification_summary_json(const std::vector<CheckResult>& results);

namespace checks {

/// Max-norm deviations of the deterministic operator identities for one
/// randomized instance.
struct OperatorDeviations {
  double big_pi = 0.0;        // Pi^2 = Pi and the three-way weighted identity
  double reflection = 0.0;    // U^2 = I, U^T D_p U = D_p, swap property
  double u0_conjugation = 0.0;  // U0 pi_sqrt(p) U0 = pi_sqrt(r)
  double rotation_scores = 0.0;   // V L s_k = q_k
  double rotation_isometry = 0.0; // V^T D_p V = D_p

  double max() const {
    return std::max({big_pi, reflection, u0_conjugation, rotation_scores,
                     rotation_isometry});
  }
};

OperatorDeviations operator_deviations(const Vec& p, const Vec& r,
                                       const ScoreSet& q_set,
                                       const ScoreSet& s_set,
                                       RandomStream& stream);

/// Deviation of L V^T (Pi D_p) V L from D_r - sum_k D_r s_k s_k^T D_r.
double rotated_covariance_deviation(const Vec& p, const Vec& r,
                                    const ScoreSet& q_set, const ScoreSet& s_set);

struct Kt1McResult {
  int usable_cells = 0;
  std::uint64_t replicates = 0;
  std::uint64_t mle_failures = 0;
  Vec mean_x2star_sigmas;    // |MC mean of x2*| / SE, per cell (true theta)
  Vec cov_x1_x2star_sigmas;  // |MC Cov(x1, x2*)| / SE, per cell (true theta)
  Vec residual_corr_x1;      // |corr(residual, x1)| per cell (fitted theta)
  Vec residual_corr_x2;
  Mat innovation_path_cov;   // MC covariance of cumulative innovations
  Mat innovation_path_se;
};

/// Replicated KT1 study: centered-regressor moments at the true parameter,
/// innovation residual correlations and path covariance at the fitted one.
Kt1McResult kt1_mc_study(const ParametricFamily& family, const Vec& theta,
                         const DiscreteDistribution& dist, long long n,
                         std::uint64_t reps, std::uint64_t seed, int threads);

/// Exact per-cell innovation variance (times n) implied by the centered
/// regression at the true parameter: Var(y) minus the explained part.
double kt1_innovation_variance_theory(const Kt1State& state, int cell);

}  // namespace checks

}  // namespace kgof
