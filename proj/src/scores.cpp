#include "kgof/scores.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "kgof/discretize.hpp"
#include "kgof/errors.hpp"
#include "kgof/operators.hpp"
#include "kgof/orthonormal.hpp"

namespace kgof {

namespace {

constexpr double kCentftol = 1e-8;

Mat centre_columns(Mat jacobian, const Vec& probs) {
  // Each column of the Jacobian must integrate to zero (probabilities sum to
  // one for every theta). Verify, then remove the residual component exactly.
  for (int k = 0; k < jacobian.cols(); ++k) {
    const double total = jacobian.col(k).sum();
    if (std::abs(total) > kCentftol) {
      std::ostringstream msg;
      msg << "sum_j dp_j/dtheta_" << k + 1 << " = " << total;
      fail(ErrorCode::InvalidFamily, msg.str());
    }
    jacobian.col(k) -= total * probs;
  }
  return jacobian;
}

}  // namespace

Mat raw_scores_fd(const ParametricFamily& family, const Vec& theta,
                  const DiscreteDistribution& dist) {
  const int k_dim = family.param_dim;
  const int n = dist.size();
  Mat jacobian(n, k_dim);
  const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  for (int k = 0; k < k_dim; ++k) {
    const double step = cbrt_eps * std::max(1.0, std::abs(theta[k]));
    Vec lo = theta, hi = theta;
    hi[k] += step;
    lo[k] -= step;
    require(hi[k] != theta[k] && lo[k] != theta[k], ErrorCode::ScoreUnavailable,
            "finite-difference step underflowed");
    require(!family.theta_valid || (family.theta_valid(hi) && family.theta_valid(lo)),
            ErrorCode::ScoreUnavailable,
            "finite-difference step leaves the admissible set");
    const Vec p_hi = cell_probabilities(family, hi, dist.atoms);
    const Vec p_lo = cell_probabilities(family, lo, dist.atoms);
    jacobian.col(k) = (p_hi - p_lo) / (hi[k] - lo[k]);
  }
  // Cell probabilities at the evaluation point, not the grid's reference.
  const Vec p_theta = cell_probabilities(family, theta, dist.atoms);
  jacobian = centre_columns(std::move(jacobian), p_theta);
  return jacobian.array().colwise() / p_theta.array();
}

Mat raw_scores(const ParametricFamily& family, const Vec& theta,
               const DiscreteDistribution& dist) {
  if (family.param_dim == 0) return Mat(dist.size(), 0);
  if (!family.has_analytic_scores()) return raw_scores_fd(family, theta, dist);
  Mat jacobian = family.cell_prob_jacobian(theta, dist.atoms);
  require(jacobian.rows() == dist.size() && jacobian.cols() == family.param_dim,
          ErrorCode::InvalidFamily, "Jacobian has wrong shape");
  const Vec p_theta = cell_probabilities(family, theta, dist.atoms);
  jacobian = centre_columns(std::move(jacobian), p_theta);
  return jacobian.array().colwise() / p_theta.array();
}

InformationMatrix information_matrix(const Mat& raw, const Vec& probs) {
  const int k_dim = static_cast<int>(raw.cols());
  Mat gamma(k_dim, k_dim);
  for (int j = 0; j < k_dim; ++j) {
    for (int k = j; k < k_dim; ++k) {
      gamma(j, k) = weighted_dot(raw.col(j), raw.col(k), probs);
      gamma(k, j) = gamma(j, k);
    }
  }
  if (k_dim > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(gamma);
    const double min_eig = solver.eigenvalues().minCoeff();
    const double max_eig = solver.eigenvalues().maxCoeff();
    if (!(min_eig > 0.0) || max_eig / min_eig > 1e12) {
      std::ostringstream msg;
      msg << "information matrix not positive definite on this grid"
          << " (eigenvalues in [" << min_eig << ", " << max_eig << "])";
      fail(ErrorCode::SingularInformation, msg.str());
    }
  }
  return InformationMatrix{std::move(gamma)};
}

Mat inv_sqrt_psd(const InformationMatrix& info) {
  const Mat& gamma = info.matrix;
  Eigen::SelfAdjointEigenSolver<Mat> solver(gamma);
  require(solver.eigenvalues().minCoeff() > 0.0, ErrorCode::SingularInformation,
          "matrix is not positive definite");
  const Vec inv_root = solver.eigenvalues().cwiseSqrt().cwiseInverse();
  return solver.eigenvectors() * inv_root.asDiagonal() *
         solver.eigenvectors().transpose();
}

ScoreSet normalize_scores(const Mat& raw, const InformationMatrix& info,
                          const Vec& probs) {
  const int n = static_cast<int>(probs.size());
  const int k_dim = static_cast<int>(raw.cols());
  std::vector<Vec> vectors;
  vectors.reserve(k_dim + 1);
  vectors.push_back(Vec::Ones(n));
  if (k_dim > 0) {
    const Mat normalised = raw * inv_sqrt_psd(info);
    for (int k = 0; k < k_dim; ++k) vectors.push_back(normalised.col(k));
  }
  // The algebra is exact; floating point is not. One cleanup pass restores
  // the Kronecker-delta Gram matrix while leaving q_0 = ones untouched.
  gram_schmidt_weighted(vectors, probs, /*keep_first=*/1);
  ScoreSet set;
  set.vectors = std::move(vectors);
  set.weight_probs = probs;
  return set;
}

ScoreSet score_set_for(const ParametricFamily& family, const Vec& theta,
                       const DiscreteDistribution& dist) {
  const Mat raw = raw_scores(family, theta, dist);
  if (family.param_dim == 0) {
    ScoreSet set;
    set.vectors = {Vec::Ones(dist.size())};
    set.weight_probs = dist.probs;
    return set;
  }
  return normalize_scores(raw, information_matrix(raw, dist.probs), dist.probs);
}

ScoreSet synthetic_score_set(const DiscreteDistribution& dist, int param_dim) {
  const int n = dist.size();
  require(param_dim + 1 <= n, ErrorCode::ConfigError,
          "synthetic score count exceeds cell count");
  // Scale atoms to [0,1] so powers stay well conditioned.
  const double lo = dist.atoms[0];
  const double span = dist.atoms[n - 1] - lo;
  Vec t = span > 0.0 ? Vec((dist.atoms.array() - lo) / span)
                     : Vec::LinSpaced(n, 0.0, 1.0);
  std::vector<Vec> vectors;
  vectors.reserve(param_dim + 1);
  vectors.push_back(Vec::Ones(n));
  Vec power = Vec::Ones(n);
  for (int k = 1; k <= param_dim; ++k) {
    power = power.cwiseProduct(t);
    vectors.push_back(power);
  }
  gram_schmidt_weighted(vectors, dist.probs, /*keep_first=*/1);
  ScoreSet set;
  set.vectors = std::move(vectors);
  set.weight_probs = dist.probs;
  return set;
}

}  // namespace kgof
