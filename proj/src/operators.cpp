#include "kgof/operators.hpp"

#include <cmath>
#include <sstream>

#include "kgof/errors.hpp"

namespace kgof {

namespace {

constexpr double kUnitTolerance = 1e-10;
constexpr double kDegenerate = 1e-12;
constexpr double kOrthoTolerance = 1e-8;

void check_probs(const Vec& probs) {
  require(probs.size() > 0, ErrorCode::ConfigError, "empty probability vector");
  for (int j = 0; j < probs.size(); ++j) {
    require(probs[j] > 0.0, ErrorCode::ConfigError, "probabilities must be positive");
  }
  require(std::abs(probs.sum() - 1.0) <= 1e-10, ErrorCode::ConfigError,
          "probabilities must sum to 1");
}

}  // namespace

const char* operator_role_name(OperatorRole role) {
  switch (role) {
    case OperatorRole::Projection: return "projection";
    case OperatorRole::Reflection: return "reflection";
    case OperatorRole::Embedding: return "embedding";
    case OperatorRole::Rotation: return "rotation";
    case OperatorRole::Accumulation: return "accumulation";
  }
  return "unknown";
}

double weighted_dot(const Vec& a, const Vec& b, const Vec& probs) {
  return a.cwiseProduct(probs).dot(b);
}

double weighted_norm(const Vec& a, const Vec& probs) {
  return std::sqrt(weighted_dot(a, a, probs));
}

LinearOperator pi_sqrt(const Vec& probs) {
  check_probs(probs);
  const Vec root = probs.cwiseSqrt();
  LinearOperator op;
  op.matrix = Mat::Identity(probs.size(), probs.size()) - root * root.transpose();
  op.role = OperatorRole::Projection;
  op.weight = probs;
  return op;
}

LinearOperator pi_sqrt_hat(const ScoreSet& scores) {
  const Vec& p = scores.weight_probs;
  check_probs(p);
  const Vec root = p.cwiseSqrt();
  Mat m = Mat::Identity(p.size(), p.size());
  for (const Vec& q : scores.vectors) {
    const Vec v = root.cwiseProduct(q);
    m -= v * v.transpose();
  }
  LinearOperator op;
  op.matrix = std::move(m);
  op.role = OperatorRole::Projection;
  op.weight = p;
  return op;
}

LinearOperator big_pi(const Vec& probs, const ScoreSet& scores) {
  check_probs(probs);
  require(scores.weight_probs.size() == probs.size(), ErrorCode::ConfigError,
          "score set dimension mismatch");
  const int count = static_cast<int>(scores.vectors.size());
  for (int j = 0; j < count; ++j) {
    for (int k = j; k < count; ++k) {
      const double gram = weighted_dot(scores.vectors[j], scores.vectors[k], probs);
      const double expected = (j == k) ? 1.0 : 0.0;
      if (std::abs(gram - expected) > kOrthoTolerance) {
        std::ostringstream msg;
        msg << "score Gram(" << j << "," << k << ") = " << gram;
        fail(ErrorCode::NonOrthonormalScores, msg.str());
      }
    }
  }
  Mat m = Mat::Identity(probs.size(), probs.size());
  for (const Vec& q : scores.vectors) {
    m -= probs.cwiseProduct(q) * q.transpose();
  }
  LinearOperator op;
  op.matrix = std::move(m);
  op.role = OperatorRole::Projection;
  op.weight = probs;
  return op;
}

LinearOperator reflection_u0(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), ErrorCode::ConfigError, "dimension mismatch");
  require(std::abs(a.norm() - 1.0) <= kUnitTolerance &&
              std::abs(b.norm() - 1.0) <= kUnitTolerance,
          ErrorCode::ConfigError, "reflection_u0 requires unit vectors");
  const Vec diff = a - b;
  // c = 2/||a-b||^2 = 1/(1 - <a,b>); the distance form has no cancellation
  // when the vectors are nearly aligned.
  const double dist_sq = diff.squaredNorm();
  require(dist_sq > 2.0 * kDegenerate, ErrorCode::DegenerateReflection,
          "vectors are (numerically) identical");
  LinearOperator op;
  op.matrix = Mat::Identity(a.size(), a.size()) -
              diff * (2.0 / dist_sq) * diff.transpose();
  op.role = OperatorRole::Reflection;
  return op;
}

namespace detail {

// Reflection from an explicit difference, stable for arbitrarily small
// separations (used by the rotation recursion).
Mat reflection_matrix_weighted(const Vec& xi, const Vec& eta, const Vec& probs) {
  const Vec diff = xi - eta;
  const double dist_sq = weighted_dot(diff, diff, probs);
  return Mat::Identity(xi.size(), xi.size()) -
         (diff * (2.0 / dist_sq)) * diff.cwiseProduct(probs).transpose();
}

}  // namespace detail

LinearOperator reflection_weighted(const Vec& xi, const Vec& eta, const Vec& probs) {
  check_probs(probs);
  require(xi.size() == probs.size() && eta.size() == probs.size(),
          ErrorCode::ConfigError, "dimension mismatch");
  require(std::abs(weighted_norm(xi, probs) - 1.0) <= kUnitTolerance &&
              std::abs(weighted_norm(eta, probs) - 1.0) <= kUnitTolerance,
          ErrorCode::ConfigError, "reflection requires P-unit vectors");
  const Vec diff = xi - eta;
  const double dist_sq = weighted_dot(diff, diff, probs);
  require(dist_sq > 2.0 * kDegenerate, ErrorCode::DegenerateReflection,
          "vectors are (numerically) identical in the P inner product");
  LinearOperator op;
  op.matrix = detail::reflection_matrix_weighted(xi, eta, probs);
  op.role = OperatorRole::Reflection;
  op.weight = probs;
  return op;
}

LinearOperator embed_L(const Vec& p, const Vec& r) {
  check_probs(p);
  check_probs(r);
  require(p.size() == r.size(), ErrorCode::ConfigError, "dimension mismatch");
  LinearOperator op;
  op.matrix = (r.cwiseQuotient(p)).cwiseSqrt().asDiagonal();
  op.role = OperatorRole::Embedding;
  op.weight = p;
  return op;
}

LinearOperator rotation_vk(const ScoreSet& q_set, const ScoreSet& s_set,
                           const Vec& p, const Vec& r) {
  check_probs(p);
  check_probs(r);
  require(q_set.param_dim() == s_set.param_dim(), ErrorCode::ConfigError,
          "score sets must share K");
  require(q_set.size() == static_cast<int>(p.size()) &&
              s_set.size() == static_cast<int>(r.size()) && p.size() == r.size(),
          ErrorCode::ConfigError, "dimension mismatch");

  const Vec l_diag = (r.cwiseQuotient(p)).cwiseSqrt();
  const int n = static_cast<int>(p.size());
  Mat v = Mat::Identity(n, n);
  for (std::size_t j = 0; j < q_set.vectors.size(); ++j) {
    const Vec& q = q_set.vectors[j];
    const Vec mapped = v * l_diag.cwiseProduct(s_set.vectors[j]);
    // Already aligned: this step is a success, not a degenerate reflection.
    if (weighted_norm(q - mapped, p) < 1e-10) continue;
    // Build the reflection directly from the difference; unlike the
    // standalone constructor it stays valid for any nonzero separation.
    v = detail::reflection_matrix_weighted(q, mapped, p) * v;
  }
  LinearOperator op;
  op.matrix = std::move(v);
  op.role = OperatorRole::Rotation;
  op.weight = p;
  return op;
}

Vec accumulate(const Vec& v) {
  Vec out(v.size());
  double running = 0.0;
  for (int j = 0; j < v.size(); ++j) {
    running += v[j];
    out[j] = running;
  }
  return out;
}

}  // namespace kgof
