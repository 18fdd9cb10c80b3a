#include "kgof/family.hpp"

#include <cmath>

#include "kgof/errors.hpp"
#include "kgof/rng.hpp"

namespace kgof {

namespace {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

}  // namespace

ParametricFamily make_exponential_family() {
  ParametricFamily family;
  family.name = "exponential";
  family.param_dim = 1;
  family.cdf = [](const Vec& theta, double x) {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-theta[0] * x);
  };
  family.prob_below = family.cdf;
  family.cell_prob_jacobian = [](const Vec& theta, const Vec& atoms) {
    const int n = static_cast<int>(atoms.size());
    const double rate = theta[0];
    // d/d rate of F(x) = x exp(-rate x); the open last cell contributes 0.
    auto dF = [rate](double x) { return x <= 0.0 ? 0.0 : x * std::exp(-rate * x); };
    Mat jac(n, 1);
    for (int j = 0; j < n; ++j) {
      const double upper = (j + 1 < n) ? dF(atoms[j + 1]) : 0.0;
      jac(j, 0) = upper - dF(atoms[j]);
    }
    return jac;
  };
  family.quantile = [](const Vec& theta, double u) {
    return -std::log1p(-u) / theta[0];
  };
  family.support_floor = [](const Vec&) { return 0.0; };
  family.theta_valid = [](const Vec& theta) {
    return theta.size() == 1 && theta[0] > 0.0 && std::isfinite(theta[0]);
  };
  return family;
}

namespace {

ParametricFamily make_normal_base(int param_dim, double fixed_sd) {
  // param_dim 2: theta = (mean, sd); param_dim 1: theta = (mean), sd fixed.
  ParametricFamily family;
  family.name = param_dim == 2 ? "normal" : "normal-mean";
  family.param_dim = param_dim;
  auto unpack = [param_dim, fixed_sd](const Vec& theta, double& mu, double& sd) {
    mu = theta[0];
    sd = param_dim == 2 ? theta[1] : fixed_sd;
  };
  family.cdf = [unpack](const Vec& theta, double x) {
    double mu, sd;
    unpack(theta, mu, sd);
    return normal_cdf((x - mu) / sd);
  };
  family.prob_below = family.cdf;
  family.cell_prob_jacobian = [unpack, param_dim](const Vec& theta,
                                                  const Vec& atoms) {
    double mu, sd;
    unpack(theta, mu, sd);
    const int n = static_cast<int>(atoms.size());
    Mat jac = Mat::Zero(n, param_dim);
    auto dmu = [&](double x) { return -normal_pdf((x - mu) / sd) / sd; };
    auto dsd = [&](double x) {
      const double z = (x - mu) / sd;
      return -z * normal_pdf(z) / sd;
    };
    for (int j = 0; j < n; ++j) {
      const bool last = (j + 1 == n);
      jac(j, 0) = (last ? 0.0 : dmu(atoms[j + 1])) - dmu(atoms[j]);
      if (param_dim == 2) {
        jac(j, 1) = (last ? 0.0 : dsd(atoms[j + 1])) - dsd(atoms[j]);
      }
    }
    return jac;
  };
  family.quantile = [unpack](const Vec& theta, double u) {
    double mu, sd;
    unpack(theta, mu, sd);
    return mu + sd * inverse_normal_cdf(u);
  };
  family.support_floor = [unpack](const Vec& theta) {
    double mu, sd;
    unpack(theta, mu, sd);
    return mu - 40.0 * sd;  // cdf underflows to exactly 0 here
  };
  family.theta_valid = [param_dim](const Vec& theta) {
    if (theta.size() != param_dim) return false;
    if (!theta.allFinite()) return false;
    return param_dim == 1 || theta[1] > 0.0;
  };
  return family;
}

}  // namespace

ParametricFamily make_normal_family() { return make_normal_base(2, 0.0); }

ParametricFamily make_normal_mean_family(double sd) {
  require(sd > 0.0, ErrorCode::InvalidFamily, "normal sd must be positive");
  return make_normal_base(1, sd);
}

ParametricFamily make_uniform_family(double a, double b) {
  require(a < b, ErrorCode::InvalidFamily, "uniform requires a < b");
  ParametricFamily family;
  family.name = "uniform";
  family.param_dim = 0;
  family.cdf = [a, b](const Vec&, double x) {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    return (x - a) / (b - a);
  };
  family.prob_below = family.cdf;
  family.quantile = [a, b](const Vec&, double u) { return a + u * (b - a); };
  family.support_floor = [a](const Vec&) { return a; };
  family.theta_valid = [](const Vec& theta) { return theta.size() == 0; };
  return family;
}

ParametricFamily make_tabulated_family(const Vec& atoms,
                                       std::function<Vec(const Vec&)> probs_fn,
                                       int param_dim, const std::string& name) {
  ParametricFamily family;
  family.name = name;
  family.param_dim = param_dim;
  family.cdf = [atoms, probs_fn](const Vec& theta, double x) {
    const Vec p = probs_fn(theta);
    double total = 0.0;
    for (int j = 0; j < atoms.size(); ++j) {
      if (atoms[j] <= x) total += p[j];
    }
    return total;
  };
  family.prob_below = [atoms, probs_fn](const Vec& theta, double x) {
    const Vec p = probs_fn(theta);
    double total = 0.0;
    for (int j = 0; j < atoms.size(); ++j) {
      if (atoms[j] < x) total += p[j];
    }
    return total;
  };
  family.support_floor = [atoms](const Vec&) { return atoms[0]; };
  family.theta_valid = [param_dim](const Vec& theta) {
    return theta.size() == param_dim && theta.allFinite();
  };
  return family;
}

ParametricFamily fix_family(const ParametricFamily& family, const Vec& theta0) {
  require(family.theta_valid == nullptr || family.theta_valid(theta0),
          ErrorCode::InvalidFamily, "theta outside admissible set");
  ParametricFamily fixed;
  fixed.name = family.name + "-fixed";
  fixed.param_dim = 0;
  auto base_cdf = family.cdf;
  auto base_below = family.prob_below;
  fixed.cdf = [base_cdf, theta0](const Vec&, double x) { return base_cdf(theta0, x); };
  fixed.prob_below = [base_below, theta0](const Vec&, double x) {
    return base_below(theta0, x);
  };
  if (family.quantile) {
    auto base_q = family.quantile;
    fixed.quantile = [base_q, theta0](const Vec&, double u) {
      return base_q(theta0, u);
    };
  }
  auto base_floor = family.support_floor;
  fixed.support_floor = [base_floor, theta0](const Vec&) {
    return base_floor(theta0);
  };
  fixed.theta_valid = [](const Vec& theta) { return theta.size() == 0; };
  return fixed;
}

ParametricFamily make_point_mass_family(double location) {
  ParametricFamily family;
  family.name = "point-mass";
  family.param_dim = 0;
  family.cdf = [location](const Vec&, double x) { return x >= location ? 1.0 : 0.0; };
  family.prob_below = [location](const Vec&, double x) {
    return x > location ? 1.0 : 0.0;
  };
  family.support_floor = [location](const Vec&) { return location - 1.0; };
  family.theta_valid = [](const Vec& theta) { return theta.size() == 0; };
  return family;
}

ParametricFamily family_by_name(const std::string& name, const Vec& params) {
  if (name == "exponential") {
    require(params.size() == 1, ErrorCode::ConfigError,
            "exponential expects params: rate");
    return make_exponential_family();
  }
  if (name == "normal") {
    require(params.size() == 2, ErrorCode::ConfigError,
            "normal expects params: mean,sd");
    return make_normal_family();
  }
  if (name == "normal-mean") {
    require(params.size() == 2, ErrorCode::ConfigError,
            "normal-mean expects params: mean,sd (sd held fixed)");
    return make_normal_mean_family(params[1]);
  }
  if (name == "uniform") {
    require(params.size() == 2, ErrorCode::ConfigError,
            "uniform expects params: a,b");
    return make_uniform_family(params[0], params[1]);
  }
  fail(ErrorCode::ConfigError, "unknown family: " + name);
}

Vec family_reference_theta(const std::string& name, const Vec& params) {
  if (name == "exponential" || name == "normal") return params;
  if (name == "normal-mean") return params.head(1);
  if (name == "uniform") return Vec();
  fail(ErrorCode::ConfigError, "unknown family: " + name);
}

}  // namespace kgof
