#include "kgof/processes.hpp"

#include <cmath>

#include "kgof/errors.hpp"
#include "kgof/rng.hpp"

namespace kgof {

ProcessIncrements simulate_bm_increments(const DiscreteDistribution& dist,
                                         std::uint64_t seed,
                                         std::uint64_t replicate_index) {
  RandomStream stream(seed, replicate_index);
  const int n = dist.size();
  Vec values(n);
  for (int j = 0; j < n; ++j) {
    values[j] = std::sqrt(dist.probs[j]) * stream.next_normal();
  }
  return ProcessIncrements{std::move(values), dist, ProcessKind::Bm};
}

ProcessIncrements project_increments(const ProcessIncrements& dw,
                                     const LinearOperator& projection) {
  require(projection.role == OperatorRole::Projection, ErrorCode::ConfigError,
          "operator is not a projection");
  require(projection.matrix.cols() == dw.values.size(), ErrorCode::ConfigError,
          "projection dimension mismatch");
  return ProcessIncrements{projection.matrix * dw.values, dw.time_scale,
                           ProcessKind::Projected};
}

ProcessIncrements empirical_increments(const CellCounts& counts, const Vec& probs,
                                       const DiscreteDistribution& dist) {
  require(counts.size() == probs.size() && counts.size() == dist.size(),
          ErrorCode::ConfigError, "counts/probs dimension mismatch");
  require(counts.sample_size >= 1, ErrorCode::ConfigError, "empty sample");
  const double n = static_cast<double>(counts.sample_size);
  const double root_n = std::sqrt(n);
  Vec values(counts.size());
  for (int j = 0; j < counts.size(); ++j) {
    values[j] = (counts.counts[j] - n * probs[j]) / root_n;
  }
  return ProcessIncrements{std::move(values), dist, ProcessKind::Empirical};
}

double eval_functional(const DualFunction& phi, const ProcessIncrements& dv) {
  require(phi.values.size() == dv.values.size(), ErrorCode::SpaceMismatch,
          "test function and increments differ in dimension");
  require(same_scale(phi.space, dv.time_scale), ErrorCode::SpaceMismatch,
          "test function lives over a different time scale");
  require(phi.values.allFinite(), ErrorCode::ConfigError,
          "test function has non-finite values");
  return phi.values.dot(dv.values);
}

DualFunction heaviside(double t, const DiscreteDistribution& dist) {
  Vec values(dist.size());
  for (int j = 0; j < dist.size(); ++j) {
    values[j] = dist.atoms[j] < t ? 1.0 : 0.0;
  }
  return DualFunction{std::move(values), dist};
}

DualFunction apply_dual(const LinearOperator& op, const DualFunction& phi) {
  require(op.matrix.rows() == phi.values.size(), ErrorCode::SpaceMismatch,
          "operator/function dimension mismatch");
  return DualFunction{op.matrix.transpose() * phi.values, phi.space};
}

double rotate_functional(const DualFunction& psi, const LinearOperator& v_k,
                         const LinearOperator& l_embed,
                         const ProcessIncrements& dv_p) {
  require(psi.values.size() == dv_p.values.size(), ErrorCode::SpaceMismatch,
          "psi and increments differ in dimension");
  require(l_embed.matrix.rows() == psi.values.size() &&
              v_k.matrix.rows() == psi.values.size(),
          ErrorCode::SpaceMismatch, "operator dimension mismatch");
  const Vec carried = v_k.matrix * (l_embed.matrix * psi.values);
  return carried.dot(dv_p.values);
}

ProcessIncrements primal_rotation(const ProcessIncrements& dv_p,
                                  const LinearOperator& v_k,
                                  const LinearOperator& l_embed,
                                  const DiscreteDistribution& target) {
  require(v_k.matrix.rows() == dv_p.values.size() &&
              l_embed.matrix.rows() == dv_p.values.size(),
          ErrorCode::SpaceMismatch, "operator dimension mismatch");
  require(target.size() == dv_p.size(), ErrorCode::SpaceMismatch,
          "target scale dimension mismatch");
  Vec values = l_embed.matrix * (v_k.matrix.transpose() * dv_p.values);
  return ProcessIncrements{std::move(values), target, ProcessKind::Rotated};
}

Vec cumulative_path(const ProcessIncrements& dv) { return accumulate(dv.values); }

}  // namespace kgof
