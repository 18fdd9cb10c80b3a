#pragma once

#include <span>

#include "kgof/distribution.hpp"
#include "kgof/family.hpp"

namespace kgof {

/// Cell probabilities p_j = F(x_{j+1}^-) - F(x_j^-) on a strictly increasing
/// grid, with the last cell open to +infinity. Every cell must carry at least
/// 1e-12 of mass; a grid with a starved cell is rejected (GridTooFine) rather
/// than silently merged.
Vec cell_probabilities(const ParametricFamily& family, const Vec& theta,
                       const Vec& atoms);

/// Equiprobable grid with N cells starting at lower_bound; interior edges are
/// located by quantile bisection (1e-12 in probability, at most 200 steps).
DiscreteDistribution build_equiprobable_grid(const ParametricFamily& family,
                                             const Vec& theta, int cells,
                                             double lower_bound);

/// Grid from user-supplied edges.
DiscreteDistribution build_grid_from_edges(const ParametricFamily& family,
                                           const Vec& theta, const Vec& edges);

/// Bin a sample into cells; values below atoms[0] are out of support.
CellCounts counts_from_sample(std::span<const double> sample,
                              const DiscreteDistribution& dist);

}  // namespace kgof
