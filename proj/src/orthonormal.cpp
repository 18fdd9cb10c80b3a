#include "kgof/orthonormal.hpp"

#include <cmath>

#include "kgof/errors.hpp"
#include "kgof/operators.hpp"

namespace kgof {

void gram_schmidt_weighted(std::vector<Vec>& vectors, const Vec& probs,
                           int keep_first) {
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (static_cast<int>(j) < keep_first) continue;  // assumed orthonormal already
    for (std::size_t k = 0; k < j; ++k) {
      vectors[j] -= weighted_dot(vectors[j], vectors[k], probs) * vectors[k];
    }
    const double norm = weighted_norm(vectors[j], probs);
    require(norm > 1e-12, ErrorCode::NonOrthonormalScores,
            "Gram-Schmidt hit a (numerically) dependent vector");
    vectors[j] /= norm;
  }
}

std::vector<Vec> random_weighted_orthonormal(const Vec& probs, int count,
                                             RandomStream& stream) {
  const int n = static_cast<int>(probs.size());
  require(count <= n, ErrorCode::ConfigError,
          "cannot draw more orthonormal vectors than the dimension");
  std::vector<Vec> vectors;
  vectors.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec v(n);
    for (int j = 0; j < n; ++j) v[j] = stream.next_normal();
    vectors.push_back(std::move(v));
  }
  gram_schmidt_weighted(vectors, probs);
  return vectors;
}

ScoreSet random_score_set(const Vec& probs, int param_dim, RandomStream& stream) {
  const int n = static_cast<int>(probs.size());
  require(param_dim + 1 <= n, ErrorCode::ConfigError, "param_dim too large for N");
  std::vector<Vec> vectors;
  vectors.reserve(param_dim + 1);
  vectors.push_back(Vec::Ones(n));
  for (int k = 0; k < param_dim; ++k) {
    Vec v(n);
    for (int j = 0; j < n; ++j) v[j] = stream.next_normal();
    vectors.push_back(std::move(v));
  }
  // q_0 stays exactly all-ones (its P-norm is 1 because probs sum to 1).
  gram_schmidt_weighted(vectors, probs, /*keep_first=*/1);
  ScoreSet set;
  set.vectors = std::move(vectors);
  set.weight_probs = probs;
  return set;
}

Vec random_probability_vector(int n, RandomStream& stream) {
  Vec p(n);
  for (int j = 0; j < n; ++j) p[j] = std::abs(stream.next_normal()) + 0.1;
  p /= p.sum();
  return p;
}

}  // namespace kgof
