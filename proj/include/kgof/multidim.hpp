#pragma once

// Two-dimensional grids, the doubly tied-down (pillow) projection, and
// colour-blind symmetrization. Everything runs on flattened vectors so the
// one-dimensional operator machinery applies unchanged.

#include <utility>

#include "kgof/distribution.hpp"
#include "kgof/processes.hpp"

namespace kgof {

/// Square 2-D grid with cell probabilities h_ij and the two marginals.
struct Grid2D {
  Vec x_atoms;
  Vec y_atoms;
  Mat probs;        // N x N cell probabilities (x index first)
  Vec x_marginal;   // row sums
  Vec y_marginal;   // column sums

  int size() const { return static_cast<int>(x_atoms.size()); }
};

/// Build and validate a Grid2D (marginals are computed, total mass checked).
Grid2D make_grid2d(const Vec& x_atoms, const Vec& y_atoms, const Mat& probs);

/// Product grid h_ij = p_i r_j from two 1-D distributions.
Grid2D make_independent_grid2d(const DiscreteDistribution& x,
                               const DiscreteDistribution& y);

/// Row-major flat index of cell (i, j), 0-based, and its inverse.
int flatten_2d(int i, int j, int n);
std::pair<int, int> unflatten_2d(int flat, int n);

/// The flattened grid as a 1-D discretization (synthetic index atoms), so
/// operators, scores, and rotations apply directly to N^2-vectors.
DiscreteDistribution flattened_distribution(const Grid2D& grid);

/// Indicator of the rectangle {x <= a, y <= b} over the flattened space.
DualFunction rectangle_indicator(double a, double b, const Grid2D& grid);

/// Tie a flattened field of BM increments down on both far edges:
/// dv(i,j) = dw(i,j) - p_i C_j - r_j R_i + p_i r_j Tot, with row/column sums
/// R, C and marginal masses p, r. The cumulative field of the result
/// vanishes along the full last row and last column.
Vec pillow_increments(const Vec& dw_flat, const Grid2D& grid);

/// Indicator of the symmetrized rectangle R(a,b) union R(b,a). Requires the
/// two coordinate grids to be identical (the colours share one scale).
DualFunction symmetrize_colour_blind(double a, double b, const Grid2D& grid);

/// Bijection between unordered index pairs {i, j} and 0..N(N+1)/2 - 1.
class SymIndexMap {
 public:
  explicit SymIndexMap(int n) : n_(n) {}

  int flat_count() const { return n_ * (n_ + 1) / 2; }

  int flat_of(int i, int j) const;
  std::pair<int, int> pair_of(int flat) const;

 private:
  int n_;
};

/// Compress a symmetric flattened function to length N(N+1)/2 and back.
Vec compress_symmetric(const Vec& full, const SymIndexMap& map);
Vec expand_symmetric(const Vec& compressed, const SymIndexMap& map);

}  // namespace kgof
