#pragma once

#include <functional>
#include <string>

#include "kgof/distribution.hpp"

namespace kgof {

/// Parametric CDF provider indexed by a K-vector theta. K = 0 means the
/// hypothesis is fully specified. prob_below gives P(X < x) (the left limit
/// of the CDF) so that atoms sitting on grid points are assigned to the cell
/// on their right; for continuous families it coincides with the CDF.
struct ParametricFamily {
  std::string name;
  int param_dim = 0;  // K

  std::function<double(const Vec& theta, double x)> cdf;
  std::function<double(const Vec& theta, double x)> prob_below;

  /// Optional analytic N x K Jacobian of cell probabilities for a given grid;
  /// when absent, scores fall back to central finite differences.
  std::function<Mat(const Vec& theta, const Vec& atoms)> cell_prob_jacobian;

  /// Optional analytic quantile (used for fast sample simulation).
  std::function<double(const Vec& theta, double u)> quantile;

  /// Grid edge low enough that cdf(theta, edge) vanishes to double precision.
  std::function<double(const Vec& theta)> support_floor;

  std::function<bool(const Vec& theta)> theta_valid;

  bool has_analytic_scores() const { return static_cast<bool>(cell_prob_jacobian); }
};

ParametricFamily make_exponential_family();
ParametricFamily make_normal_family();
/// Normal with known standard deviation; theta = (mean).
ParametricFamily make_normal_mean_family(double sd);
ParametricFamily make_uniform_family(double a, double b);

/// User-supplied cell probabilities p(theta) on a fixed grid; scores come
/// from finite differences only.
ParametricFamily make_tabulated_family(const Vec& atoms,
                                       std::function<Vec(const Vec&)> probs_fn,
                                       int param_dim,
                                       const std::string& name = "tabulated");

/// Freeze a family at theta0, producing a fully specified (K = 0) hypothesis.
ParametricFamily fix_family(const ParametricFamily& family, const Vec& theta0);

/// Degenerate distribution with all mass at a point (testing aid; exercises
/// the atom-on-grid-point convention).
ParametricFamily make_point_mass_family(double location);

/// Look up a built-in family by CLI name ("exponential", "normal",
/// "normal-mean", "uniform"); params are the reference parameter values.
ParametricFamily family_by_name(const std::string& name, const Vec& params);

/// Reference theta for family_by_name (the free-parameter part of params).
Vec family_reference_theta(const std::string& name, const Vec& params);

}  // namespace kgof
