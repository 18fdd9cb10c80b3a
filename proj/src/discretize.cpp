#include "kgof/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kgof/errors.hpp"

namespace kgof {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kSumTolerance = 1e-12;

void check_grid(const Vec& atoms) {
  require(atoms.size() >= 1, ErrorCode::ConfigError, "grid needs at least one edge");
  for (int j = 1; j < atoms.size(); ++j) {
    require(atoms[j] > atoms[j - 1], ErrorCode::ConfigError,
            "grid edges must be strictly increasing");
  }
}

}  // namespace

std::vector<std::string> validate_distribution(const DiscreteDistribution& dist) {
  std::vector<std::string> violations;
  if (dist.atoms.size() != dist.probs.size()) {
    violations.push_back("atoms and probs differ in length");
    return violations;
  }
  for (int j = 1; j < dist.atoms.size(); ++j) {
    if (!(dist.atoms[j] > dist.atoms[j - 1])) {
      violations.push_back("atoms not strictly increasing");
      break;
    }
  }
  if (dist.atoms.size() > 0 && dist.atoms[0] < dist.lower_bound) {
    violations.push_back("first atom below lower_bound");
  }
  bool positive = true;
  for (int j = 0; j < dist.probs.size(); ++j) {
    if (!(dist.probs[j] > 0.0)) positive = false;
  }
  if (!positive) violations.push_back("probs not strictly positive");
  if (dist.probs.size() > 0 &&
      std::abs(dist.probs.sum() - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg << "sum != 1 (got " << dist.probs.sum() << ")";
    violations.push_back(msg.str());
  }
  return violations;
}

Vec cell_probabilities(const ParametricFamily& family, const Vec& theta,
                       const Vec& atoms) {
  check_grid(atoms);
  require(!family.theta_valid || family.theta_valid(theta),
          ErrorCode::InvalidFamily, "theta outside admissible set");

  const int n = static_cast<int>(atoms.size());
  Vec below(n + 1);
  for (int j = 0; j < n; ++j) below[j] = family.prob_below(theta, atoms[j]);
  below[n] = 1.0;  // F((+inf)^-) for a proper distribution

  for (int j = 0; j <= n; ++j) {
    require(std::isfinite(below[j]) && below[j] >= -1e-15 && below[j] <= 1.0 + 1e-15,
            ErrorCode::InvalidFamily, "cdf value outside [0,1]");
    if (j > 0) {
      require(below[j] >= below[j - 1] - 1e-15, ErrorCode::InvalidFamily,
              "cdf not non-decreasing on the grid");
    }
  }

  Vec probs(n);
  for (int j = 0; j < n; ++j) {
    probs[j] = below[j + 1] - below[j];
    if (probs[j] < kProbFloor) {
      std::ostringstream msg;
      msg << "cell " << j + 1 << " has mass " << probs[j]
          << " < 1e-12; coarsen the grid";
      fail(ErrorCode::GridTooFine, msg.str());
    }
  }
  require(std::abs(probs.sum() - 1.0) <= kSumTolerance, ErrorCode::InvalidFamily,
          "cell probabilities do not sum to 1; is the first edge at the support floor?");
  return probs;
}

DiscreteDistribution build_equiprobable_grid(const ParametricFamily& family,
                                             const Vec& theta, int cells,
                                             double lower_bound) {
  require(cells >= 2, ErrorCode::ConfigError, "need at least 2 cells");
  require(!family.theta_valid || family.theta_valid(theta),
          ErrorCode::InvalidFamily, "theta outside admissible set");

  Vec atoms(cells);
  atoms[0] = lower_bound;

  // Bracket for the largest quantile we need, expanding to the right.
  double hi = lower_bound + 1.0;
  const double top_target = (cells - 1.0) / cells;
  for (int iter = 0; family.cdf(theta, hi) < top_target; ++iter) {
    require(iter < 200, ErrorCode::InvalidFamily,
            "failed to bracket quantiles; cdf does not reach 1");
    hi = lower_bound + (hi - lower_bound) * 2.0;
  }

  double lo_edge = lower_bound;
  for (int j = 1; j < cells; ++j) {
    const double target = static_cast<double>(j) / cells;
    double lo = lo_edge, up = hi;
    require(family.cdf(theta, lo) <= target && family.cdf(theta, up) >= target,
            ErrorCode::InvalidFamily, "quantile bracket lost");
    double mid = 0.5 * (lo + up);
    for (int iter = 0; iter < 200; ++iter) {
      mid = 0.5 * (lo + up);
      const double value = family.cdf(theta, mid);
      if (std::abs(value - target) <= 1e-12) break;
      if (value < target) {
        lo = mid;
      } else {
        up = mid;
      }
    }
    atoms[j] = mid;
    require(atoms[j] > atoms[j - 1], ErrorCode::InvalidFamily,
            "quantiles collapsed; cdf may be flat (not strictly increasing)");
    lo_edge = mid;
  }

  DiscreteDistribution dist;
  dist.atoms = atoms;
  dist.lower_bound = lower_bound;
  dist.probs = cell_probabilities(family, theta, atoms);
  return dist;
}

DiscreteDistribution build_grid_from_edges(const ParametricFamily& family,
                                           const Vec& theta, const Vec& edges) {
  check_grid(edges);
  DiscreteDistribution dist;
  dist.atoms = edges;
  dist.lower_bound = edges[0];
  dist.probs = cell_probabilities(family, theta, edges);
  return dist;
}

CellCounts counts_from_sample(std::span<const double> sample,
                              const DiscreteDistribution& dist) {
  const int n_cells = dist.size();
  CellCounts result;
  result.counts = Eigen::VectorXi::Zero(n_cells);
  const double* begin = dist.atoms.data();
  const double* end = begin + n_cells;
  for (double value : sample) {
    if (value < dist.atoms[0]) {
      std::ostringstream msg;
      msg << "sample value " << value << " below the grid floor " << dist.atoms[0];
      fail(ErrorCode::OutOfSupport, msg.str());
    }
    // Cell j holds [x_j, x_{j+1}); upper_bound gives the first edge > value.
    const int cell = static_cast<int>(std::upper_bound(begin, end, value) - begin) - 1;
    ++result.counts[cell];
  }
  result.sample_size = static_cast<long long>(sample.size());
  return result;
}

}  // namespace kgof
