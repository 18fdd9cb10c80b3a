#include "kgof/verify.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kgof/accumulators.hpp"
#include "kgof/discretize.hpp"
#include "kgof/errors.hpp"
#include "kgof/gof.hpp"
#include "kgof/kt1.hpp"
#include "kgof/multidim.hpp"
#include "kgof/operators.hpp"
#include "kgof/orthonormal.hpp"
#include "kgof/parallel.hpp"
#include "kgof/processes.hpp"
#include "kgof/scores.hpp"

namespace kgof {

namespace checks {

OperatorDeviations operator_deviations(const Vec& p, const Vec& r,
                                       const ScoreSet& q_set,
                                       const ScoreSet& s_set,
                                       RandomStream& stream) {
  const int n = static_cast<int>(p.size());
  const Mat identity = Mat::Identity(n, n);
  const Mat dp = p.asDiagonal();
  OperatorDeviations dev;
  auto track = [](double& slot, const Mat& m) {
    slot = std::max(slot, m.cwiseAbs().maxCoeff());
  };

  // Projection identities.
  const LinearOperator pi = big_pi(p, q_set);
  track(dev.big_pi, pi.matrix * pi.matrix - pi.matrix);
  const Mat pi_dp = pi.matrix * dp;
  track(dev.big_pi, pi.matrix * dp * pi.matrix.transpose() - pi_dp);
  track(dev.big_pi, pi_dp - dp * pi.matrix.transpose());

  // Plain reflection conjugates the root-weighted projections.
  const Vec root_p = p.cwiseSqrt();
  const Vec root_r = r.cwiseSqrt();
  if ((root_p - root_r).norm() > 1e-8) {
    const LinearOperator u0 = reflection_u0(root_p, root_r);
    track(dev.u0_conjugation, u0.matrix * u0.matrix - identity);
    track(dev.u0_conjugation,
          u0.matrix * pi_sqrt(p).matrix * u0.matrix - pi_sqrt(r).matrix);
  }

  // Weighted reflection on a random P-orthonormal pair.
  const std::vector<Vec> pair = random_weighted_orthonormal(p, 2, stream);
  const LinearOperator u = reflection_weighted(pair[0], pair[1], p);
  track(dev.reflection, u.matrix * u.matrix - identity);
  track(dev.reflection, u.matrix.transpose() * dp * u.matrix - dp);
  track(dev.reflection, (u.matrix * pair[0] - pair[1]).transpose());
  track(dev.reflection, (u.matrix * pair[1] - pair[0]).transpose());

  // Rotation: score mapping and isometry.
  const LinearOperator v = rotation_vk(q_set, s_set, p, r);
  const LinearOperator l = embed_L(p, r);
  for (std::size_t k = 0; k < q_set.vectors.size(); ++k) {
    track(dev.rotation_scores,
          (v.matrix * (l.matrix * s_set.vectors[k]) - q_set.vectors[k]).transpose());
  }
  track(dev.rotation_isometry, v.matrix.transpose() * dp * v.matrix - dp);
  return dev;
}

double rotated_covariance_deviation(const Vec& p, const Vec& r,
                                    const ScoreSet& q_set, const ScoreSet& s_set) {
  const LinearOperator v = rotation_vk(q_set, s_set, p, r);
  const LinearOperator l = embed_L(p, r);
  const LinearOperator pi = big_pi(p, q_set);
  const Mat lhs = l.matrix * v.matrix.transpose() *
                  (pi.matrix * Mat(p.asDiagonal())) * v.matrix * l.matrix;
  Mat rhs = r.asDiagonal();
  for (const Vec& s : s_set.vectors) {
    const Vec weighted = r.cwiseProduct(s);
    rhs -= weighted * weighted.transpose();
  }
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double kt1_innovation_variance_theory(const Kt1State& state, int cell) {
  const double p = state.probs[cell];
  const double h = state.score[cell];
  const double tail = state.tail_mass[cell];
  const double head = state.head_mass[cell];
  const double s = state.tail_score[cell];
  const double m = state.tail_score_sq[cell];
  const double g = h - s;
  if (cell == 0) {
    return p - p * p - p * p * h * h / m;  // s = 0 at the first cell
  }
  // explained variance p^2 (F,g) A^{-1} (F,g)^T with A the n-free covariance
  const double a00 = head * tail;
  const double a01 = head * s;
  const double a11 = m - s * s;
  const double det = a00 * a11 - a01 * a01;
  const double quad =
      (head * (a11 * head - a01 * g) + g * (a00 * g - a01 * head)) / det;
  return p - p * p - p * p * quad;
}

namespace {

struct Kt1Accumulator {
  std::uint64_t replicates = 0;
  std::uint64_t fitted = 0;
  std::uint64_t mle_failures = 0;
  // true-theta sums per cell
  Vec sum_x2s, sum_x2s_sq;
  Vec sum_z, sum_z_sq;  // z = (x1 - tail_mass) * x2star
  // fitted-theta sums per cell
  Vec sum_res, sum_res_sq, sum_x1, sum_x1_sq, sum_x2, sum_x2_sq;
  Vec sum_res_x1, sum_res_x2;
  CovarianceAccumulator paths;

  explicit Kt1Accumulator(int cells = 0)
      : sum_x2s(Vec::Zero(cells)), sum_x2s_sq(Vec::Zero(cells)),
        sum_z(Vec::Zero(cells)), sum_z_sq(Vec::Zero(cells)),
        sum_res(Vec::Zero(cells)), sum_res_sq(Vec::Zero(cells)),
        sum_x1(Vec::Zero(cells)), sum_x1_sq(Vec::Zero(cells)),
        sum_x2(Vec::Zero(cells)), sum_x2_sq(Vec::Zero(cells)),
        sum_res_x1(Vec::Zero(cells)), sum_res_x2(Vec::Zero(cells)),
        paths(cells) {}

  void merge(const Kt1Accumulator& other) {
    replicates += other.replicates;
    fitted += other.fitted;
    mle_failures += other.mle_failures;
    sum_x2s += other.sum_x2s;
    sum_x2s_sq += other.sum_x2s_sq;
    sum_z += other.sum_z;
    sum_z_sq += other.sum_z_sq;
    sum_res += other.sum_res;
    sum_res_sq += other.sum_res_sq;
    sum_x1 += other.sum_x1;
    sum_x1_sq += other.sum_x1_sq;
    sum_x2 += other.sum_x2;
    sum_x2_sq += other.sum_x2_sq;
    sum_res_x1 += other.sum_res_x1;
    sum_res_x2 += other.sum_res_x2;
    paths.merge(other.paths);
  }
};

}  // namespace

Kt1McResult kt1_mc_study(const ParametricFamily& family, const Vec& theta,
                         const DiscreteDistribution& dist, long long n,
                         std::uint64_t reps, std::uint64_t seed, int threads) {
  const Kt1State truth = build_kt1_state(family, theta, dist);
  const int usable = default_cutoff(truth, n);

  auto make_acc = [usable]() { return Kt1Accumulator(usable); };
  Kt1Accumulator acc = replicate_reduce<Kt1Accumulator>(
      reps, make_acc,
      [&](std::uint64_t rep, Kt1Accumulator& local) {
        RandomStream stream(seed, rep);
        std::vector<double> sample(static_cast<std::size_t>(n));
        for (double& x : sample) x = family.quantile(theta, stream.next_uniform());
        const CellCounts counts = counts_from_sample(sample, dist);
        ++local.replicates;

        for (int cell = 0; cell < usable; ++cell) {
          const Kt1Regressors reg = kt1_regressors(counts, truth.score, cell);
          const double x2_star = kt1_centered_regressor(counts, truth, cell);
          local.sum_x2s[cell] += x2_star;
          local.sum_x2s_sq[cell] += x2_star * x2_star;
          const double z = (reg.x1 - truth.tail_mass[cell]) * x2_star;
          local.sum_z[cell] += z;
          local.sum_z_sq[cell] += z * z;
        }

        // Exceptions must not escape the parallel region; a replicate whose
        // estimation (or downstream evaluation) fails is counted and skipped.
        try {
          const Vec theta_hat = mle_discrete(counts, family, theta, dist);
          const Kt1State state = build_kt1_state(family, theta_hat, dist);
          const int cut = std::min(usable, default_cutoff(state, n));
          const ProcessIncrements innovations =
              kt1_innovations(counts, family, theta_hat, dist, cut);
          if (cut == usable) {
            local.paths.add(accumulate(innovations.values).head(usable));
          }
          ++local.fitted;
          const double scale = std::sqrt(static_cast<double>(n));
          for (int cell = 0; cell < cut; ++cell) {
            const Kt1Regressors reg = kt1_regressors(counts, state.score, cell);
            const double residual = innovations.values[cell] / scale;
            local.sum_res[cell] += residual;
            local.sum_res_sq[cell] += residual * residual;
            local.sum_x1[cell] += reg.x1;
            local.sum_x1_sq[cell] += reg.x1 * reg.x1;
            local.sum_x2[cell] += reg.x2;
            local.sum_x2_sq[cell] += reg.x2 * reg.x2;
            local.sum_res_x1[cell] += residual * reg.x1;
            local.sum_res_x2[cell] += residual * reg.x2;
          }
        } catch (const Error&) {
          ++local.mle_failures;
        }
      },
      [](Kt1Accumulator& total, const Kt1Accumulator& part) { total.merge(part); },
      threads);

  Kt1McResult result;
  result.usable_cells = usable;
  result.replicates = acc.replicates;
  result.mle_failures = acc.mle_failures;
  result.mean_x2star_sigmas = Vec::Zero(usable);
  result.cov_x1_x2star_sigmas = Vec::Zero(usable);
  result.residual_corr_x1 = Vec::Zero(usable);
  result.residual_corr_x2 = Vec::Zero(usable);

  const double r_true = static_cast<double>(acc.replicates);
  const double r_fit = static_cast<double>(acc.fitted);
  for (int cell = 0; cell < usable; ++cell) {
    const double mean_x2s = acc.sum_x2s[cell] / r_true;
    const double var_x2s =
        std::max(acc.sum_x2s_sq[cell] / r_true - mean_x2s * mean_x2s, 1e-300);
    result.mean_x2star_sigmas[cell] =
        std::abs(mean_x2s) / std::sqrt(var_x2s / r_true);

    const double mean_z = acc.sum_z[cell] / r_true;
    const double var_z =
        std::max(acc.sum_z_sq[cell] / r_true - mean_z * mean_z, 1e-300);
    result.cov_x1_x2star_sigmas[cell] =
        std::abs(mean_z) / std::sqrt(var_z / r_true);

    const double mean_res = acc.sum_res[cell] / r_fit;
    const double sd_res = std::sqrt(
        std::max(acc.sum_res_sq[cell] / r_fit - mean_res * mean_res, 1e-300));
    const double mean_x1 = acc.sum_x1[cell] / r_fit;
    const double sd_x1 = std::sqrt(
        std::max(acc.sum_x1_sq[cell] / r_fit - mean_x1 * mean_x1, 0.0));
    const double mean_x2 = acc.sum_x2[cell] / r_fit;
    const double sd_x2 = std::sqrt(
        std::max(acc.sum_x2_sq[cell] / r_fit - mean_x2 * mean_x2, 0.0));
    // At the first cell x1 is identically 1 and x2 vanishes by the MLE
    // equation; the normal-equation content there is a zero-mean residual.
    result.residual_corr_x1[cell] =
        sd_x1 > 1e-9 ? std::abs(acc.sum_res_x1[cell] / r_fit - mean_res * mean_x1) /
                           (sd_res * sd_x1)
                     : std::abs(mean_res) / sd_res;
    result.residual_corr_x2[cell] =
        sd_x2 > 1e-6 ? std::abs(acc.sum_res_x2[cell] / r_fit - mean_res * mean_x2) /
                           (sd_res * sd_x2)
                     : std::abs(mean_res) / sd_res;
  }
  result.innovation_path_cov = acc.paths.covariance();
  result.innovation_path_se = acc.paths.standard_error();
  return result;
}

}  // namespace checks

namespace {

std::string format_value(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3g", x);
  return buffer;
}

CheckResult bound_check(const std::string& name, double value, double bound) {
  CheckResult result;
  result.name = name;
  result.pass = value <= bound;
  result.detail = "max deviation " + format_value(value) + " (bound " +
                  format_value(bound) + ")";
  return result;
}

// --------------------------------------------------------------------------
// discretization

void check_discretization(std::vector<CheckResult>& out, std::uint64_t seed) {
  double worst_sum = 0.0;
  double worst_even = 0.0;
  bool partition_ok = true;

  const ParametricFamily exponential = make_exponential_family();
  const ParametricFamily normal = make_normal_family();
  Vec theta_exp(1);
  theta_exp << 2.0;
  Vec theta_norm(2);
  theta_norm << 0.5, 1.5;

  RandomStream stream(seed, 1);
  for (int cells : {2, 5, 10, 37}) {
    for (int which = 0; which < 2; ++which) {
      const ParametricFamily& family = which == 0 ? exponential : normal;
      const Vec& theta = which == 0 ? theta_exp : theta_norm;
      const DiscreteDistribution dist = build_equiprobable_grid(
          family, theta, cells, family.support_floor(theta));
      worst_sum = std::max(worst_sum, std::abs(dist.probs.sum() - 1.0));
      worst_even = std::max(
          worst_even, (dist.probs.array() - 1.0 / cells).abs().maxCoeff());

      std::vector<double> sample(500);
      for (double& x : sample) x = family.quantile(theta, stream.next_uniform());
      const CellCounts counts = counts_from_sample(sample, dist);
      partition_ok = partition_ok &&
                     counts.counts.sum() == static_cast<int>(sample.size());
    }
  }
  out.push_back(bound_check("discretization.cell_probabilities_sum_and_floor",
                            worst_sum, 1e-12));
  out.push_back({"discretization.counts_partition_consistency", partition_ok,
                 partition_ok ? "every sample point lands in exactly one cell"
                              : "count sums disagree with sample sizes"});
  out.push_back(bound_check("discretization.equiprobable_grid_accuracy",
                            worst_even, 1e-9));
}

// --------------------------------------------------------------------------
// operators

void check_operators(std::vector<CheckResult>& out, std::uint64_t seed,
                     double tolerance) {
  RandomStream stream(seed, 2);
  double worst_pi = 0.0;
  checks::OperatorDeviations worst;
  double worst_rotated_cov = 0.0;
  for (int instance = 0; instance < 60; ++instance) {
    const int n = 2 + static_cast<int>(stream.next_uniform() * 49);
    const int k = std::min(n - 1, static_cast<int>(stream.next_uniform() * 5));
    const Vec p = random_probability_vector(n, stream);
    const Vec r = random_probability_vector(n, stream);
    const ScoreSet q_set = random_score_set(p, k, stream);
    const ScoreSet s_set = random_score_set(r, k, stream);

    const LinearOperator pi_p = pi_sqrt(p);
    worst_pi = std::max(
        worst_pi,
        (pi_p.matrix * pi_p.matrix - pi_p.matrix).cwiseAbs().maxCoeff());
    worst_pi = std::max(
        worst_pi, (pi_p.matrix - pi_p.matrix.transpose()).cwiseAbs().maxCoeff());
    worst_pi = std::max(worst_pi,
                        (pi_p.matrix * p.cwiseSqrt()).cwiseAbs().maxCoeff());

    const checks::OperatorDeviations dev =
        checks::operator_deviations(p, r, q_set, s_set, stream);
    worst.big_pi = std::max(worst.big_pi, dev.big_pi);
    worst.reflection = std::max(worst.reflection, dev.reflection);
    worst.u0_conjugation = std::max(worst.u0_conjugation, dev.u0_conjugation);
    worst.rotation_scores = std::max(worst.rotation_scores, dev.rotation_scores);
    worst.rotation_isometry =
        std::max(worst.rotation_isometry, dev.rotation_isometry);
    worst_rotated_cov = std::max(
        worst_rotated_cov,
        checks::rotated_covariance_deviation(p, r, q_set, s_set));
  }
  out.push_back(bound_check("operators.pi_sqrt_projection", worst_pi, 1e-12));
  out.push_back(bound_check("operators.weighted_reflection_identities",
                            worst.reflection, tolerance));
  out.push_back(bound_check("operators.u0_conjugates_projections",
                            worst.u0_conjugation, tolerance));
  out.push_back(bound_check("operators.big_pi_three_way_identity", worst.big_pi,
                            tolerance));
  out.push_back(
      bound_check("operators.rotation_maps_scores", worst.rotation_scores, 1e-9));
  out.push_back(bound_check("operators.rotation_preserves_norm",
                            worst.rotation_isometry, tolerance));
  out.push_back(bound_check("operators.rotated_covariance_identity",
                            worst_rotated_cov, 1e-9));
}

// --------------------------------------------------------------------------
// scores

ParametricFamily rescale_family(const ParametricFamily& base, const Vec& scale) {
  ParametricFamily scaled = base;
  scaled.name = base.name + "-rescaled";
  auto base_cdf = base.cdf;
  scaled.cdf = [base_cdf, scale](const Vec& theta, double x) {
    return base_cdf(theta.cwiseProduct(scale), x);
  };
  scaled.prob_below = scaled.cdf;
  if (base.cell_prob_jacobian) {
    auto base_jac = base.cell_prob_jacobian;
    scaled.cell_prob_jacobian = [base_jac, scale](const Vec& theta,
                                                  const Vec& atoms) {
      Mat jac = base_jac(theta.cwiseProduct(scale), atoms);
      for (int k = 0; k < jac.cols(); ++k) jac.col(k) *= scale[k];
      return jac;
    };
  }
  auto base_valid = base.theta_valid;
  scaled.theta_valid = [base_valid, scale](const Vec& theta) {
    return theta.size() == scale.size() &&
           (!base_valid || base_valid(theta.cwiseProduct(scale)));
  };
  auto base_floor = base.support_floor;
  scaled.support_floor = [base_floor, scale](const Vec& theta) {
    return base_floor(theta.cwiseProduct(scale));
  };
  return scaled;
}

void check_scores(std::vector<CheckResult>& out) {
  const ParametricFamily exponential = make_exponential_family();
  const ParametricFamily normal = make_normal_family();
  Vec theta_exp(1);
  theta_exp << 1.7;
  Vec theta_norm(2);
  theta_norm << -0.3, 2.0;

  double worst_fd = 0.0;
  double worst_gram = 0.0;
  double worst_span = 0.0;
  for (int which = 0; which < 2; ++which) {
    const ParametricFamily& family = which == 0 ? exponential : normal;
    const Vec& theta = which == 0 ? theta_exp : theta_norm;
    const DiscreteDistribution dist =
        build_equiprobable_grid(family, theta, 12, family.support_floor(theta));

    const Mat analytic = raw_scores(family, theta, dist);
    const Mat fd = raw_scores_fd(family, theta, dist);
    worst_fd = std::max(worst_fd, ((analytic - fd).cwiseAbs().maxCoeff()) /
                                      analytic.cwiseAbs().maxCoeff());

    const ScoreSet scores = score_set_for(family, theta, dist);
    const int count = static_cast<int>(scores.vectors.size());
    for (int a = 0; a < count; ++a) {
      for (int b = 0; b < count; ++b) {
        const double gram =
            weighted_dot(scores.vectors[a], scores.vectors[b], dist.probs);
        worst_gram = std::max(worst_gram, std::abs(gram - (a == b ? 1.0 : 0.0)));
      }
    }

    // Componentwise rescaling of theta must leave the score span unchanged.
    Vec scale = Vec::Constant(family.param_dim, 1.0);
    for (int k = 0; k < scale.size(); ++k) scale[k] = 1.5 + 0.75 * k;
    const ParametricFamily scaled = rescale_family(family, scale);
    const Vec theta_scaled = theta.cwiseQuotient(scale);
    const ScoreSet scores_scaled = score_set_for(scaled, theta_scaled, dist);
    Mat projector = Mat::Zero(dist.size(), dist.size());
    Mat projector_scaled = projector;
    for (int k = 1; k < count; ++k) {
      projector += scores.vectors[k] *
                   dist.probs.cwiseProduct(scores.vectors[k]).transpose();
      projector_scaled +=
          scores_scaled.vectors[k] *
          dist.probs.cwiseProduct(scores_scaled.vectors[k]).transpose();
    }
    worst_span = std::max(
        worst_span, (projector - projector_scaled).cwiseAbs().maxCoeff());
  }
  out.push_back(bound_check("scores.analytic_vs_fd_agreement", worst_fd, 1e-6));
  out.push_back(bound_check("scores.gram_identity", worst_gram, 1e-10));
  out.push_back(
      bound_check("scores.reparametrization_span_invariance", worst_span, 1e-9));
}

// --------------------------------------------------------------------------
// processes

void check_processes(std::vector<CheckResult>& out, std::uint64_t seed,
                     int threads) {
  const ParametricFamily exponential = make_exponential_family();
  Vec theta(1);
  theta << 1.0;
  const DiscreteDistribution dist =
      build_equiprobable_grid(exponential, theta, 10, 0.0);
  const int n = dist.size();

  const ScoreSet q0_only{{Vec::Ones(n)}, dist.probs};
  const LinearOperator bridge_projection = big_pi(dist.probs, q0_only);

  // Tie-down: terminal cumulative value vanishes for every replicate.
  double worst_tie = 0.0;
  for (std::uint64_t rep = 0; rep < 2000; ++rep) {
    const ProcessIncrements dw = simulate_bm_increments(dist, seed, rep);
    const ProcessIncrements dv = project_increments(dw, bridge_projection);
    worst_tie = std::max(worst_tie, std::abs(cumulative_path(dv)[n - 1]));
  }
  out.push_back(bound_check("processes.bridge_tie_down", worst_tie, 1e-12));

  // Dual/primal consistency on random test functions.
  RandomStream stream(seed, 77);
  double worst_dual = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    Vec phi_values(n);
    for (int j = 0; j < n; ++j) phi_values[j] = stream.next_normal();
    const DualFunction phi{phi_values, dist};
    const ProcessIncrements dw = simulate_bm_increments(dist, seed, 5000 + rep);
    const ProcessIncrements dv = project_increments(dw, bridge_projection);
    const double primal = eval_functional(phi, dv);
    const double dual = eval_functional(apply_dual(bridge_projection, phi), dw);
    worst_dual = std::max(worst_dual, std::abs(primal - dual));
  }
  out.push_back(bound_check("processes.dual_primal_consistency", worst_dual, 1e-12));

  // Increment-variance law on merged cells, 4 SE.
  const std::uint64_t reps = 100000;
  auto make_acc = [n]() { return CovarianceAccumulator(n); };
  CovarianceAccumulator acc = replicate_reduce<CovarianceAccumulator>(
      reps, make_acc,
      [&](std::uint64_t rep, CovarianceAccumulator& local) {
        const ProcessIncrements dw = simulate_bm_increments(dist, seed + 1, rep);
        const ProcessIncrements dv = project_increments(dw, bridge_projection);
        local.add(dv.values);
      },
      [](CovarianceAccumulator& total, const CovarianceAccumulator& part) {
        total.merge(part);
      },
      threads);
  const Mat cov = acc.covariance();
  const Mat se = acc.standard_error();
  double worst_sigmas = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int m = k; m < n; ++m) {
      double mass = 0.0;
      for (int j = k; j <= m; ++j) mass += dist.probs[j];
      const double expected = mass - mass * mass;
      double observed = 0.0, error = 0.0;
      for (int a = k; a <= m; ++a) {
        for (int b = k; b <= m; ++b) {
          observed += cov(a, b);
          error += se(a, b) * se(a, b);
        }
      }
      error = std::sqrt(error);
      worst_sigmas = std::max(worst_sigmas, std::abs(observed - expected) / error);
    }
  }
  out.push_back(bound_check("processes.increment_variance_law", worst_sigmas, 4.0));

  // Functional covariance: exact matrix form against the moment formula.
  double worst_fc = 0.0;
  {
    Vec phi(n), psi(n);
    for (int j = 0; j < n; ++j) {
      phi[j] = std::sin(j + 1.0);
      psi[j] = std::cos(2.0 * j + 0.5);
    }
    const Mat cov_matrix = bridge_projection.matrix * Mat(dist.probs.asDiagonal()) *
                           bridge_projection.matrix.transpose();
    const double lhs = phi.dot(cov_matrix * psi);
    const double mean_phi = weighted_dot(phi, Vec::Ones(n), dist.probs);
    const double mean_psi = weighted_dot(psi, Vec::Ones(n), dist.probs);
    const double rhs = weighted_dot(phi, psi, dist.probs) - mean_phi * mean_psi;
    worst_fc = std::abs(lhs - rhs);
  }
  out.push_back(bound_check("processes.functional_covariance", worst_fc, 1e-12));

  // Rotation preserves P-norms.
  RandomStream rot_stream(seed, 78);
  double worst_norm = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int dim = 3 + static_cast<int>(rot_stream.next_uniform() * 20);
    const int k = std::min(dim - 1, static_cast<int>(rot_stream.next_uniform() * 4));
    const Vec p = random_probability_vector(dim, rot_stream);
    const Vec r = random_probability_vector(dim, rot_stream);
    const ScoreSet q_set = random_score_set(p, k, rot_stream);
    const ScoreSet s_set = random_score_set(r, k, rot_stream);
    const LinearOperator v = rotation_vk(q_set, s_set, p, r);
    const LinearOperator l = embed_L(p, r);
    Vec psi(dim);
    for (int j = 0; j < dim; ++j) psi[j] = rot_stream.next_normal();
    const Vec carried = v.matrix * (l.matrix * psi);
    worst_norm = std::max(
        worst_norm, std::abs(weighted_norm(carried, p) - weighted_norm(psi, r)));
  }
  out.push_back(bound_check("processes.rotation_preserves_p_norm", worst_norm, 1e-10));
}

// --------------------------------------------------------------------------
// kt1

void check_kt1(std::vector<CheckResult>& out, std::uint64_t seed, int threads) {
  const ParametricFamily family = make_exponential_family();
  Vec theta(1);
  theta << 2.0;
  const long long n = 1000;
  const DiscreteDistribution dist = build_equiprobable_grid(family, theta, 10, 0.0);
  const std::uint64_t reps = 10000;

  const checks::Kt1McResult study =
      checks::kt1_mc_study(family, theta, dist, n, reps, seed + 7, threads);

  out.push_back(bound_check("kt1.centered_regressor_mean_zero",
                            study.mean_x2star_sigmas.maxCoeff(), 3.0));
  out.push_back(bound_check("kt1.regressor_orthogonality",
                            study.cov_x1_x2star_sigmas.maxCoeff(), 3.0));
  const double worst_corr = std::max(study.residual_corr_x1.maxCoeff(),
                                     study.residual_corr_x2.maxCoeff());
  out.push_back(bound_check("kt1.residual_regressor_uncorrelated", worst_corr,
                            3.0 / std::sqrt(static_cast<double>(study.replicates))));
}

// --------------------------------------------------------------------------
// multidim

void check_multidim(std::vector<CheckResult>& out) {
  bool roundtrip_ok = true;
  for (int n = 1; n <= 50; ++n) {
    const SymIndexMap map(n);
    int seen = 0;
    for (int i = 0; i < n && roundtrip_ok; ++i) {
      for (int j = i; j < n && roundtrip_ok; ++j) {
        const int flat = map.flat_of(i, j);
        roundtrip_ok = flat == map.flat_of(j, i) &&
                       map.pair_of(flat) == std::make_pair(i, j);
        ++seen;
      }
    }
    roundtrip_ok = roundtrip_ok && seen == map.flat_count();
  }
  out.push_back({"multidim.sym_index_roundtrip", roundtrip_ok,
                 roundtrip_ok ? "bijective for N <= 50" : "round trip failed"});

  // 2-D rotated-covariance identity on a 3x3 independent grid.
  DiscreteDistribution x;
  x.atoms = Vec::LinSpaced(3, 0.0, 2.0);
  Vec px(3);
  px << 0.2, 0.5, 0.3;
  x.probs = px;
  DiscreteDistribution y = x;
  Vec py(3);
  py << 0.25, 0.35, 0.4;
  y.probs = py;
  const Grid2D grid = make_independent_grid2d(x, y);
  const DiscreteDistribution flat = flattened_distribution(grid);
  const DiscreteDistribution target = uniform_target(flat.size());
  const ScoreSet q_flat{{Vec::Ones(flat.size())}, flat.probs};
  const ScoreSet s_flat = synthetic_score_set(target, 0);
  const double dev = checks::rotated_covariance_deviation(
      flat.probs, target.probs, q_flat, s_flat);
  out.push_back(bound_check("multidim.rotation_identity_on_flattened", dev, 1e-9));

  bool sym_ok = true;
  for (double a : {0.5, 1.5, 2.5}) {
    for (double b : {0.0, 1.0, 2.0}) {
      const DualFunction fwd = symmetrize_colour_blind(a, b, grid);
      const DualFunction rev = symmetrize_colour_blind(b, a, grid);
      sym_ok = sym_ok && fwd.values == rev.values;
      for (int i = 0; i < 3 && sym_ok; ++i) {
        for (int j = 0; j < 3 && sym_ok; ++j) {
          sym_ok = fwd.values[flatten_2d(i, j, 3)] ==
                   fwd.values[flatten_2d(j, i, 3)];
        }
      }
    }
  }
  out.push_back({"multidim.symmetrize_swap_invariance", sym_ok,
                 sym_ok ? "indicator symmetric and swap-invariant"
                        : "symmetry violated"});
}

// --------------------------------------------------------------------------
// gof

void check_gof(std::vector<CheckResult>& out, std::uint64_t seed, int threads) {
  // Mean of ||Y_hat||^2 under estimation-projection: N - (K + 1).
  {
    const int n = 12, k = 2;
    RandomStream stream(seed, 301);
    const Vec p = random_probability_vector(n, stream);
    const ScoreSet scores = random_score_set(p, k, stream);
    const LinearOperator projector = pi_sqrt_hat(scores);
    MeanAccumulator acc = replicate_reduce<MeanAccumulator>(
        200000, []() { return MeanAccumulator(); },
        [&](std::uint64_t rep, MeanAccumulator& local) {
          RandomStream z_stream(seed + 11, rep);
          Vec z(n);
          for (int j = 0; j < n; ++j) z[j] = z_stream.next_normal();
          local.add((projector.matrix * z).squaredNorm());
        },
        [](MeanAccumulator& total, const MeanAccumulator& part) {
          total.merge(part);
        },
        threads);
    const double expected = n - (k + 1);
    const double sigmas =
        std::abs(acc.mean() - expected) / acc.standard_error();
    out.push_back(bound_check("gof.estimated_mean_check", sigmas, 3.0));
  }

  // Distribution-freeness: rotated-KS samples from two different sources.
  {
    const long long reps = 5000;
    GridSpec grid;
    grid.cells = 10;
    TargetSpec target{10, 1};

    FamilyPipelineModel exp_model;
    exp_model.family_name = "exponential";
    exp_model.params = Vec::Constant(1, 2.0);
    exp_model.n = 2000;
    exp_model.grid = grid;
    exp_model.estimate = true;
    exp_model.target = target;

    FamilyPipelineModel norm_model;
    norm_model.family_name = "normal-mean";
    Vec norm_params(2);
    norm_params << 0.0, 1.0;
    norm_model.params = norm_params;
    norm_model.n = 2000;
    norm_model.grid = grid;
    norm_model.estimate = true;
    norm_model.target = target;

    const NullTable exp_table =
        mc_null_table(StatisticKind::Ks, exp_model, reps, seed + 21, threads);
    const NullTable norm_table =
        mc_null_table(StatisticKind::Ks, norm_model, reps, seed + 22, threads);
    const TwoSampleKsResult ks = two_sample_ks(exp_table.values, norm_table.values);
    CheckResult result;
    result.name = "gof.distribution_freeness";
    result.pass = ks.p_value > 0.01;
    result.detail = "two-sample KS distance " + format_value(ks.distance) +
                    ", p = " + format_value(ks.p_value);
    out.push_back(result);
  }

  // p-value uniformity under a true null.
  {
    const long long table_reps = 20000;
    const TargetSpec target{10, 1};
    const NullTable table = mc_null_table(
        StatisticKind::Ks, GaussianTargetModel{target}, table_reps, seed + 31,
        threads);

    FamilyPipelineModel data_model;
    data_model.family_name = "exponential";
    data_model.params = Vec::Constant(1, 2.0);
    data_model.n = 4000;
    data_model.grid = GridSpec{};
    data_model.grid.cells = 10;
    data_model.estimate = true;
    data_model.target = target;
    const NullTable stats = mc_null_table(StatisticKind::Ks, data_model, 5000,
                                          seed + 32, threads);
    std::vector<double> pvalues;
    pvalues.reserve(stats.values.size());
    for (double s : stats.values) pvalues.push_back(p_value_from_table(table, s));
    const double distance = ks_uniform_distance(pvalues);
    const double critical = 1.6276 / std::sqrt(static_cast<double>(pvalues.size()));
    CheckResult result;
    result.name = "gof.pvalue_uniformity";
    result.pass = distance <= critical;
    result.detail = "KS distance from uniform " + format_value(distance) +
                    " (1% critical " + format_value(critical) + ")";
    out.push_back(result);
  }
}

// --------------------------------------------------------------------------
// cli-level determinism (library side: identical seeds give identical bytes)

void check_determinism(std::vector<CheckResult>& out, std::uint64_t seed) {
  const TargetSpec target{8, 1};
  const NullTable a = mc_null_table(StatisticKind::Ks,
                                    GaussianTargetModel{target}, 1000, seed, 0);
  const NullTable b = mc_null_table(StatisticKind::Ks,
                                    GaussianTargetModel{target}, 1000, seed, 1);
  bool same = a.values == b.values;

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kgof-verify";
  fs::create_directories(dir);
  const std::string path_a = (dir / "table_a.nulltab").string();
  const std::string path_b = (dir / "table_b.nulltab").string();
  write_null_table(a, path_a);
  write_null_table(b, path_b);
  std::ifstream fa(path_a), fb(path_b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  same = same && sa.str() == sb.str();
  fs::remove(path_a);
  fs::remove(path_b);
  out.push_back({"cli.determinism", same,
                 same ? "parallel and serial tables agree byte-for-byte"
                      : "outputs differ between runs"});
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  check_discretization(results, options.seed);
  check_operators(results, options.seed, options.operator_tolerance);
  check_scores(results);
  check_processes(results, options.seed, options.threads);
  check_kt1(results, options.seed, options.threads);
  check_multidim(results);
  check_gof(results, options.seed, options.threads);
  check_determinism(results, options.seed);
  return results;
}

std::string verification_summary_json(const std::vector<CheckResult>& results) {
  nlohmann::ordered_json doc;
  bool all_pass = true;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const CheckResult& result : results) {
    checks.push_back({{"name", result.name},
                      {"pass", result.pass},
                      {"detail", result.detail}});
    all_pass = all_pass && result.pass;
  }
  doc["all_pass"] = all_pass;
  doc["checks"] = checks;
  return doc.dump(2) + "\n";
}

}  // namespace kgof
