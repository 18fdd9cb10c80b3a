#pragma once

// Mergeable Monte-Carlo summary accumulators (the only shared mutable state
// allowed in the simulation code paths).

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace kgof {

/// Mean / standard-error tracker for a scalar statistic.
struct MeanAccumulator {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const MeanAccumulator& other) {
    n += other.n;
    sum += other.sum;
    sum_sq += other.sum_sq;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double variance() const {
    const double m = mean();
    return sum_sq / static_cast<double>(n) - m * m;
  }
  double standard_error() const {
    return std::sqrt(variance() / static_cast<double>(n));
  }
};

/// Covariance tracker for a vector-valued statistic. Keeps enough second and
/// fourth moments to report an MC standard error for each covariance entry.
struct CovarianceAccumulator {
  std::uint64_t n = 0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd sum_prod;     // sum of x_k x_l
  Eigen::MatrixXd sum_prod_sq;  // sum of (x_k x_l)^2

  explicit CovarianceAccumulator(int dim = 0)
      : sum(Eigen::VectorXd::Zero(dim)),
        sum_prod(Eigen::MatrixXd::Zero(dim, dim)),
        sum_prod_sq(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(const Eigen::VectorXd& x) {
    ++n;
    sum += x;
    const Eigen::MatrixXd outer = x * x.transpose();
    sum_prod += outer;
    sum_prod_sq += outer.cwiseProduct(outer);
  }
  void merge(const CovarianceAccumulator& other) {
    n += other.n;
    sum += other.sum;
    sum_prod += other.sum_prod;
    sum_prod_sq += other.sum_prod_sq;
  }

  Eigen::MatrixXd covariance() const {
    const double r = static_cast<double>(n);
    const Eigen::VectorXd m = sum / r;
    return sum_prod / r - m * m.transpose();
  }

  /// Standard error of each covariance entry: sd of the per-replicate
  /// products divided by sqrt(n).
  Eigen::MatrixXd standard_error() const {
    const double r = static_cast<double>(n);
    const Eigen::MatrixXd mean_prod = sum_prod / r;
    Eigen::MatrixXd var_prod =
        sum_prod_sq / r - mean_prod.cwiseProduct(mean_prod);
    var_prod = var_prod.cwiseMax(0.0);
    return (var_prod / r).cwiseSqrt();
  }
};

}  // namespace kgof
