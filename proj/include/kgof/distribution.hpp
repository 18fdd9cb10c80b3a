#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kgof {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Discrete approximation of a distribution: N grid points (cell left edges)
/// with positive cell masses summing to one. The mass of an atom sitting
/// exactly on a grid point belongs to the cell starting there, and the cell
/// of x_N extends to +infinity.
struct DiscreteDistribution {
  Vec atoms;   // strictly increasing cell edges x_1 < ... < x_N
  Vec probs;   // positive cell probabilities, sum 1
  double lower_bound = 0.0;  // finite support floor; atoms[0] >= lower_bound

  int size() const { return static_cast<int>(atoms.size()); }
};

/// Observed frequencies on the cells of a DiscreteDistribution.
struct CellCounts {
  Eigen::VectorXi counts;
  long long sample_size = 0;

  int size() const { return static_cast<int>(counts.size()); }
};

/// Invariant check; returns human-readable violations (empty means ok).
std::vector<std::string> validate_distribution(const DiscreteDistribution& dist);

/// True when two process/function spaces refer to the same discretization.
inline bool same_scale(const DiscreteDistribution& a,
                       const DiscreteDistribution& b) {
  return a.atoms.size() == b.atoms.size() && a.atoms == b.atoms &&
         a.probs == b.probs;
}

}  // namespace kgof
