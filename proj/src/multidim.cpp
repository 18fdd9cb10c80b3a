#include "kgof/multidim.hpp"

#include <cmath>

#include "kgof/errors.hpp"

namespace kgof {

Grid2D make_grid2d(const Vec& x_atoms, const Vec& y_atoms, const Mat& probs) {
  const int n = static_cast<int>(x_atoms.size());
  require(y_atoms.size() == n, ErrorCode::ConfigError,
          "2-D grid must be square");
  require(probs.rows() == n && probs.cols() == n, ErrorCode::ConfigError,
          "probability table has wrong shape");
  for (int j = 1; j < n; ++j) {
    require(x_atoms[j] > x_atoms[j - 1] && y_atoms[j] > y_atoms[j - 1],
            ErrorCode::ConfigError, "grid atoms must be strictly increasing");
  }
  require(probs.minCoeff() > 0.0, ErrorCode::ConfigError,
          "cell probabilities must be positive");
  require(std::abs(probs.sum() - 1.0) <= 1e-12, ErrorCode::ConfigError,
          "cell probabilities must sum to 1");
  Grid2D grid;
  grid.x_atoms = x_atoms;
  grid.y_atoms = y_atoms;
  grid.probs = probs;
  grid.x_marginal = probs.rowwise().sum();
  grid.y_marginal = probs.colwise().sum().transpose();
  return grid;
}

Grid2D make_independent_grid2d(const DiscreteDistribution& x,
                               const DiscreteDistribution& y) {
  require(x.size() == y.size(), ErrorCode::ConfigError, "grids must be square");
  return make_grid2d(x.atoms, y.atoms, x.probs * y.probs.transpose());
}

int flatten_2d(int i, int j, int n) {
  require(i >= 0 && i < n && j >= 0 && j < n, ErrorCode::ConfigError,
          "2-D index out of range");
  return i * n + j;
}

std::pair<int, int> unflatten_2d(int flat, int n) {
  require(flat >= 0 && flat < n * n, ErrorCode::ConfigError,
          "flat index out of range");
  return {flat / n, flat % n};
}

DiscreteDistribution flattened_distribution(const Grid2D& grid) {
  const int n = grid.size();
  DiscreteDistribution dist;
  dist.atoms = Vec::LinSpaced(n * n, 0.0, n * n - 1.0);
  dist.lower_bound = 0.0;
  Vec probs(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) probs[flatten_2d(i, j, n)] = grid.probs(i, j);
  }
  dist.probs = std::move(probs);
  return dist;
}

DualFunction rectangle_indicator(double a, double b, const Grid2D& grid) {
  const int n = grid.size();
  Vec values = Vec::Zero(n * n);
  for (int i = 0; i < n; ++i) {
    if (grid.x_atoms[i] > a) break;
    for (int j = 0; j < n; ++j) {
      if (grid.y_atoms[j] > b) break;
      values[flatten_2d(i, j, n)] = 1.0;
    }
  }
  return DualFunction{std::move(values), flattened_distribution(grid)};
}

Vec pillow_increments(const Vec& dw_flat, const Grid2D& grid) {
  const int n = grid.size();
  require(dw_flat.size() == n * n, ErrorCode::ConfigError,
          "flattened increments have wrong length");
  Vec row_sum = Vec::Zero(n);  // over j for fixed i
  Vec col_sum = Vec::Zero(n);  // over i for fixed j
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = dw_flat[i * n + j];
      row_sum[i] += w;
      col_sum[j] += w;
    }
  }
  const double total = row_sum.sum();
  Vec out(n * n);
  for (int i = 0; i < n; ++i) {
    const double pi = grid.x_marginal[i];
    for (int j = 0; j < n; ++j) {
      const double rj = grid.y_marginal[j];
      out[i * n + j] = dw_flat[i * n + j] - pi * col_sum[j] - rj * row_sum[i] +
                       pi * rj * total;
    }
  }
  return out;
}

DualFunction symmetrize_colour_blind(double a, double b, const Grid2D& grid) {
  require(grid.x_atoms == grid.y_atoms, ErrorCode::AsymmetricGrids,
          "colour-blind symmetrization needs identical coordinate grids");
  const DualFunction fwd = rectangle_indicator(a, b, grid);
  const DualFunction rev = rectangle_indicator(b, a, grid);
  return DualFunction{fwd.values.cwiseMax(rev.values), fwd.space};
}

int SymIndexMap::flat_of(int i, int j) const {
  require(i >= 0 && i < n_ && j >= 0 && j < n_, ErrorCode::ConfigError,
          "index out of range");
  const int a = std::min(i, j);
  const int b = std::max(i, j);
  // Upper-triangle row-major: row a starts after a rows of lengths N..N-a+1.
  return a * (2 * n_ - a - 1) / 2 + b;
}

std::pair<int, int> SymIndexMap::pair_of(int flat) const {
  require(flat >= 0 && flat < flat_count(), ErrorCode::ConfigError,
          "flat index out of range");
  int a = 0;
  int row_start = 0;
  while (row_start + (n_ - a) <= flat) {
    row_start += n_ - a;
    ++a;
  }
  return {a, a + (flat - row_start)};
}

Vec compress_symmetric(const Vec& full, const SymIndexMap& map) {
  const int flat = static_cast<int>(std::lround(std::sqrt(double(full.size()))));
  require(flat * flat == full.size(), ErrorCode::ConfigError,
          "input is not a flattened square field");
  Vec out(map.flat_count());
  for (int k = 0; k < out.size(); ++k) {
    const auto [i, j] = map.pair_of(k);
    const double upper = full[i * flat + j];
    const double lower = full[j * flat + i];
    require(upper == lower, ErrorCode::ConfigError, "field is not symmetric");
    out[k] = upper;
  }
  return out;
}

Vec expand_symmetric(const Vec& compressed, const SymIndexMap& map) {
  const int count = map.flat_count();
  require(compressed.size() == count, ErrorCode::ConfigError,
          "compressed vector has wrong length");
  const auto [last_i, last_j] = map.pair_of(count - 1);
  const int n = last_j + 1;
  Vec out(n * n);
  for (int k = 0; k < count; ++k) {
    const auto [i, j] = map.pair_of(k);
    out[i * n + j] = compressed[k];
    out[j * n + i] = compressed[k];
  }
  return out;
}

}  // namespace kgof
