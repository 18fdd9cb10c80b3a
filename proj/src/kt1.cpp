#include "kgof/kt1.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "kgof/discretize.hpp"
#include "kgof/errors.hpp"
#include "kgof/scores.hpp"

namespace kgof {

namespace {

constexpr double kScoreTolerance = 1e-8;   // |score equation| <= tol * n
constexpr double kTailFloor = 1e-12;
constexpr double kDetFloor = 1e-14;        // on the covariance determinant

double score_equation(const CellCounts& counts, const ParametricFamily& family,
                      const Vec& theta, const DiscreteDistribution& dist) {
  const Mat raw = raw_scores(family, theta, dist);
  double total = 0.0;
  for (int j = 0; j < counts.size(); ++j) total += raw(j, 0) * counts.counts[j];
  return total;
}

}  // namespace

Vec mle_discrete(const CellCounts& counts, const ParametricFamily& family,
                 const Vec& theta0, const DiscreteDistribution& dist) {
  require(family.param_dim == 1, ErrorCode::ConfigError,
          "mle_discrete handles a scalar parameter");
  require(counts.sample_size >= 1, ErrorCode::ConfigError, "empty sample");
  require(!family.theta_valid || family.theta_valid(theta0),
          ErrorCode::InvalidFamily, "theta0 outside admissible set");

  auto valid = [&](double t) {
    Vec v(1);
    v[0] = t;
    return !family.theta_valid || family.theta_valid(v);
  };
  // Evaluate the score; a failed evaluation (grid starved at an extreme
  // candidate, finite-difference step leaving the admissible set) reports
  // ok = false instead of propagating.
  auto try_g = [&](double t, bool& ok) {
    Vec v(1);
    v[0] = t;
    if (!valid(t)) {
      ok = false;
      return 0.0;
    }
    try {
      ok = true;
      return score_equation(counts, family, v, dist);
    } catch (const Error&) {
      ok = false;
      return 0.0;
    }
  };

  const double n = static_cast<double>(counts.sample_size);
  const double tol = kScoreTolerance * n;
  const double start = theta0[0];
  bool ok = false;
  const double g_start = try_g(start, ok);
  require(ok, ErrorCode::MleNotFound, "score evaluation failed at theta0");
  if (std::abs(g_start) <= tol) return theta0;

  // Expand a bracket around theta0 until the score changes sign.
  const double delta = 0.5 * std::max(1.0, std::abs(start));
  double lo = start, hi = start;
  double g_lo = g_start, g_hi = g_start;
  bool lo_open = true, hi_open = true;
  bool bracketed = false;
  for (int k = 1; k <= 60 && !bracketed; ++k) {
    if (hi_open) {
      const double candidate = start + delta * (std::pow(2.0, k) - 1.0);
      const double value = try_g(candidate, ok);
      if (ok) {
        if (g_hi * value <= 0.0 && value != g_hi) {
          lo = hi; g_lo = g_hi;
          hi = candidate; g_hi = value;
          bracketed = g_lo * g_hi < 0.0 || g_hi == 0.0;
        } else {
          hi = candidate;
          g_hi = value;
        }
      } else {
        hi_open = false;
      }
    }
    if (bracketed) break;
    if (lo_open) {
      double candidate = start - delta * (std::pow(2.0, k) - 1.0);
      if (!valid(candidate)) candidate = start / std::pow(2.0, k);
      double value = 0.0;
      ok = candidate < lo;
      if (ok) value = try_g(candidate, ok);
      if (ok) {
        if (g_lo * value <= 0.0 && value != g_lo) {
          hi = lo; g_hi = g_lo;
          lo = candidate; g_lo = value;
          bracketed = g_lo * g_hi < 0.0 || g_lo == 0.0;
        } else {
          lo = candidate;
          g_lo = value;
        }
      } else {
        lo_open = false;
      }
    }
    if (!lo_open && !hi_open) break;
  }
  require(bracketed && g_lo * g_hi <= 0.0, ErrorCode::MleNotFound,
          "score equation has no sign change in the admissible range");
  if (lo > hi) { std::swap(lo, hi); std::swap(g_lo, g_hi); }

  // Safeguarded Newton with the bracket as fallback.
  double x = 0.5 * (lo + hi);
  double gx = try_g(x, ok);
  require(ok, ErrorCode::MleNotFound, "score evaluation failed inside the bracket");
  const double fd_step = std::cbrt(std::numeric_limits<double>::epsilon());
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(gx) <= tol) {
      Vec result(1);
      result[0] = x;
      return result;
    }
    if (gx * g_lo < 0.0) {
      hi = x; g_hi = gx;
    } else {
      lo = x; g_lo = gx;
    }
    const double h = fd_step * std::max(1.0, std::abs(x));
    double next = x;
    bool newton_ok = false;
    bool ok_up = false, ok_down = false;
    const double g_up = try_g(x + h, ok_up);
    const double g_down = try_g(x - h, ok_down);
    if (ok_up && ok_down) {
      const double derivative = (g_up - g_down) / (2.0 * h);
      if (std::abs(derivative) > 1e-300) {
        next = x - gx / derivative;
        newton_ok = next > lo && next < hi;
      }
    }
    if (!newton_ok) next = 0.5 * (lo + hi);
    x = next;
    gx = try_g(x, ok);
    require(ok, ErrorCode::MleNotFound, "score evaluation failed inside the bracket");
  }
  fail(ErrorCode::MleNotFound, "score solver did not converge");
}

Kt1State build_kt1_state(const ParametricFamily& family, const Vec& theta_hat,
                         const DiscreteDistribution& dist) {
  require(family.param_dim == 1, ErrorCode::ConfigError,
          "kt1 handles a scalar parameter");
  Kt1State state;
  state.theta_hat = theta_hat;
  state.probs = cell_probabilities(family, theta_hat, dist.atoms);
  state.score = raw_scores(family, theta_hat, dist).col(0);

  const int n = state.size();
  state.tail_mass = Vec(n);
  state.tail_score = Vec(n);
  state.tail_score_sq = Vec(n);
  state.head_mass = Vec(n);
  double mass = 0.0, score_sum = 0.0, score_sq = 0.0;
  for (int j = n - 1; j >= 0; --j) {
    mass += state.probs[j];
    score_sum += state.score[j] * state.probs[j];
    score_sq += state.score[j] * state.score[j] * state.probs[j];
    state.tail_mass[j] = mass;
    state.tail_score[j] = score_sum;
    state.tail_score_sq[j] = score_sq;
  }
  double head = 0.0;
  for (int j = 0; j < n; ++j) {
    state.head_mass[j] = head;
    head += state.probs[j];
  }
  state.cond_mean = state.tail_score.cwiseQuotient(state.tail_mass);
  return state;
}

double conditional_score_mean(const ParametricFamily& family, const Vec& theta,
                              const DiscreteDistribution& dist, int cell) {
  require(cell >= 0 && cell < dist.size(), ErrorCode::ConfigError,
          "cell index out of range");
  const Vec score = raw_scores(family, theta, dist).col(0);
  const Vec p_theta = cell_probabilities(family, theta, dist.atoms);
  double mass = 0.0, total = 0.0;
  for (int j = cell; j < dist.size(); ++j) {
    mass += p_theta[j];
    total += score[j] * p_theta[j];
  }
  require(mass > kTailFloor, ErrorCode::TailExhausted,
          "no probability mass beyond this cell");
  return total / mass;
}

Kt1Regressors kt1_regressors(const CellCounts& counts, const Vec& score, int cell) {
  require(cell >= 0 && cell < counts.size(), ErrorCode::ConfigError,
          "cell index out of range");
  const double n = static_cast<double>(counts.sample_size);
  Kt1Regressors reg;
  for (int j = cell; j < counts.size(); ++j) {
    reg.x1 += counts.counts[j];
    reg.x2 += score[j] * counts.counts[j];
  }
  reg.x1 /= n;
  reg.x2 /= n;
  return reg;
}

double kt1_centered_regressor(const CellCounts& counts, const Kt1State& state,
                              int cell) {
  const double n = static_cast<double>(counts.sample_size);
  const double centre = state.cond_mean[cell];
  double total = 0.0;
  for (int j = cell; j < counts.size(); ++j) {
    total += (state.score[j] - centre) * counts.counts[j];
  }
  return total / n;
}

namespace {

// First-cell prediction: everyone is at risk (x1 is the constant 1, the
// covariance matrix is singular), so the regression collapses to the exact
// limit p * x1 + (p h / M) * (x2 - S x1), which at the fitted MLE is just
// the fitted cell probability.
double predict_first_cell(const Kt1State& state, const Kt1Regressors& reg) {
  const double p = state.probs[0];
  const double h = state.score[0];
  const double s = state.tail_score[0];
  const double m = state.tail_score_sq[0];
  require(m - s * s > kTailFloor, ErrorCode::SingularCovariance,
          "degenerate score variance");
  return p * reg.x1 + p * (h - s) / (m - s * s) * (reg.x2 - s * reg.x1);
}

}  // namespace

double kt1_predict(const CellCounts& counts, const Kt1State& state, int cell,
                   Kt1Predictor predictor) {
  require(cell >= 0 && cell < state.size(), ErrorCode::ConfigError,
          "cell index out of range");
  require(counts.size() == state.size(), ErrorCode::ConfigError,
          "counts/state dimension mismatch");
  require(state.tail_mass[cell] > kTailFloor, ErrorCode::TailExhausted,
          "no probability mass beyond this cell");

  const double n = static_cast<double>(counts.sample_size);
  const double p = state.probs[cell];
  const double h = state.score[cell];
  const double tail = state.tail_mass[cell];
  const double head = state.head_mass[cell];
  const double s = state.tail_score[cell];
  const double m = state.tail_score_sq[cell];

  // n * Covar(x1, x2) assembled from the multinomial tail moments.
  Mat covar(2, 2);
  covar(0, 0) = head * tail;
  covar(0, 1) = covar(1, 0) = head * s;
  covar(1, 1) = m - s * s;
  const double det = covar(0, 0) * covar(1, 1) - covar(0, 1) * covar(1, 0);
  if (det / (n * n) < kDetFloor) {
    std::ostringstream msg;
    msg << "regressor covariance is singular at cell " << cell + 1;
    fail(ErrorCode::SingularCovariance, msg.str());
  }

  const Kt1Regressors reg = kt1_regressors(counts, state.score, cell);
  Vec moment(2);
  if (predictor == Kt1Predictor::Uncentered) {
    moment << p, p * h;
  } else {
    moment << p * head, p * (h - s);
  }
  Vec coefficients(2);
  coefficients[0] = (covar(1, 1) * moment[0] - covar(0, 1) * moment[1]) / det;
  coefficients[1] = (covar(0, 0) * moment[1] - covar(0, 1) * moment[0]) / det;
  return coefficients[0] * reg.x1 + coefficients[1] * reg.x2;
}

int default_cutoff(const Kt1State& state, long long sample_size) {
  const double n = static_cast<double>(sample_size);
  const double mass_floor = 5.0 / n;
  int cutoff = 0;
  for (int cell = 0; cell < state.size(); ++cell) {
    if (state.tail_mass[cell] < mass_floor) break;
    if (cell > 0) {
      const double head = state.head_mass[cell];
      const double tail = state.tail_mass[cell];
      const double s = state.tail_score[cell];
      const double m = state.tail_score_sq[cell];
      const double det = head * tail * (m - s * s) - head * head * s * s;
      if (det / (n * n) < kDetFloor) break;
    }
    cutoff = cell + 1;
  }
  return cutoff;
}

ProcessIncrements kt1_innovations(const CellCounts& counts,
                                  const ParametricFamily& family,
                                  const Vec& theta_hat,
                                  const DiscreteDistribution& dist, int cutoff,
                                  Kt1Predictor predictor) {
  require(cutoff >= 1 && cutoff <= dist.size(), ErrorCode::ConfigError,
          "cutoff out of range");
  const Kt1State state = build_kt1_state(family, theta_hat, dist);
  const double n = static_cast<double>(counts.sample_size);
  const double root_n = std::sqrt(n);

  Vec values = Vec::Zero(dist.size());
  for (int cell = 0; cell < cutoff; ++cell) {
    double predicted;
    if (cell == 0) {
      if (predictor == Kt1Predictor::Uncentered) {
        // The raw-moment formula has no finite first-cell limit; leave the
        // increment at zero for that variant.
        continue;
      }
      predicted = predict_first_cell(state, kt1_regressors(counts, state.score, 0));
    } else {
      predicted = kt1_predict(counts, state, cell, predictor);
    }
    values[cell] = root_n * (counts.counts[cell] / n - predicted);
  }
  return ProcessIncrements{std::move(values), dist, ProcessKind::Empirical};
}

}  // namespace kgof
