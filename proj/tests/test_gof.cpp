#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "kgof/discretize.hpp"
#include "kgof/errors.hpp"
#include "kgof/family.hpp"
#include "kgof/gof.hpp"
#include "kgof/kt1.hpp"
#include "kgof/operators.hpp"
#include "kgof/processes.hpp"
#include "kgof/rng.hpp"
#include "kgof/scores.hpp"

using namespace kgof;

namespace {

Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<int>(values.size()));
  int j = 0;
  for (double x : values) v[j++] = x;
  return v;
}

CellCounts counts_of(std::initializer_list<int> values) {
  CellCounts counts;
  counts.counts = Eigen::VectorXi(static_cast<int>(values.size()));
  int j = 0;
  long long total = 0;
  for (int v : values) {
    counts.counts[j++] = v;
    total += v;
  }
  counts.sample_size = total;
  return counts;
}

ProcessIncrements increments_of(std::initializer_list<double> values) {
  DiscreteDistribution dist;
  dist.atoms = Vec::LinSpaced(static_cast<int>(values.size()), 0.0,
                              static_cast<double>(values.size()) - 1.0);
  dist.probs = Vec::Constant(static_cast<int>(values.size()),
                             1.0 / static_cast<double>(values.size()));
  Vec v(static_cast<int>(values.size()));
  int j = 0;
  for (double x : values) v[j++] = x;
  return ProcessIncrements{v, dist, ProcessKind::Empirical};
}

}  // namespace

TEST_CASE("chi-squared statistic") {
  const Vec p = make_vec({0.5, 0.5});
  CHECK(chi_squared_stat(counts_of({50, 50}), p) == doctest::Approx(0.0));
  // (60-50)^2/50 + (40-50)^2/50 = 2 + 2
  CHECK(chi_squared_stat(counts_of({60, 40}), p) == doctest::Approx(4.0));
}

TEST_CASE("ks and cvm statistics") {
  CHECK(ks_stat(increments_of({0.0, 0.0, 0.0})) == 0.0);
  CHECK(ks_stat(increments_of({1.0, -1.0})) == doctest::Approx(1.0));

  const ProcessIncrements zero = increments_of({0.0, 0.0});
  CHECK(cvm_stat(zero, zero.time_scale.probs) == 0.0);
  {
    // single cell: path^2 * mass
    ProcessIncrements one = increments_of({0.7});
    CHECK(cvm_stat(one, make_vec({1.0})) == doctest::Approx(0.49));
  }

  RandomStream stream(61, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(stream.next_uniform() * 12);
    Vec values(n);
    for (int j = 0; j < n; ++j) values[j] = stream.next_normal();
    DiscreteDistribution dist;
    dist.atoms = Vec::LinSpaced(n, 0.0, n - 1.0);
    Vec p(n);
    for (int j = 0; j < n; ++j) p[j] = 0.1 + stream.next_uniform();
    p /= p.sum();
    dist.probs = p;
    const ProcessIncrements dv{values, dist, ProcessKind::Empirical};

    // Brute-force oracles.
    double best = 0.0, weighted = 0.0, running = 0.0;
    for (int j = 0; j < n; ++j) {
      running += values[j];
      best = std::max(best, std::abs(running));
      weighted += running * running * p[j];
    }
    CHECK(ks_stat(dv) == doctest::Approx(best));
    CHECK(cvm_stat(dv, p) == doctest::Approx(weighted));
  }
}

TEST_CASE("p-values from a table are never zero") {
  NullTable table;
  table.statistic_name = "ks";
  table.values = {0.1, 0.2, 0.3, 0.4};
  table.reps = 4;
  CHECK(p_value_from_table(table, 0.25) == doctest::Approx(3.0 / 5.0));
  CHECK(p_value_from_table(table, 10.0) == doctest::Approx(1.0 / 5.0));
  CHECK(p_value_from_table(table, -1.0) == doctest::Approx(1.0));
}

TEST_CASE("kolmogorov tail values") {
  // Classical critical points: Q(1.3581) ~ 0.05 and Q(1.6276) ~ 0.01.
  CHECK(kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(kolmogorov_tail(1.6276) == doctest::Approx(0.01).epsilon(0.01));
  CHECK(kolmogorov_tail(0.0) == 1.0);
  // The two series branches agree where they meet (|Q'| ~ 1 there, so the
  // 2e-6 argument gap shows up in the values).
  CHECK(kolmogorov_tail(0.999999) == doctest::Approx(kolmogorov_tail(1.000001))
                                         .epsilon(3e-5));
}

TEST_CASE("two-sample ks distance") {
  const std::vector<double> a = {0.1, 0.2, 0.3};
  CHECK(two_sample_ks(a, a).distance == doctest::Approx(0.0));
  CHECK(two_sample_ks(a, a).p_value == doctest::Approx(1.0));

  const std::vector<double> low = {0.0, 0.1, 0.2};
  const std::vector<double> high = {1.0, 1.1, 1.2};
  CHECK(two_sample_ks(low, high).distance == doctest::Approx(1.0));

  RandomStream stream(62, 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(40), y(25);
    for (double& v : x) v = stream.next_normal();
    for (double& v : y) v = stream.next_normal() + 0.3;
    const TwoSampleKsResult result = two_sample_ks(x, y);
    // Brute-force sup over all observed points.
    double oracle = 0.0;
    std::vector<double> xs = x, ys = y;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    for (double point : xs) {
      const double fx =
          std::upper_bound(xs.begin(), xs.end(), point) - xs.begin();
      const double fy =
          std::upper_bound(ys.begin(), ys.end(), point) - ys.begin();
      oracle = std::max(oracle, std::abs(fx / xs.size() - fy / ys.size()));
    }
    for (double point : ys) {
      const double fx =
          std::upper_bound(xs.begin(), xs.end(), point) - xs.begin();
      const double fy =
          std::upper_bound(ys.begin(), ys.end(), point) - ys.begin();
      oracle = std::max(oracle, std::abs(fx / xs.size() - fy / ys.size()));
    }
    CHECK(result.distance == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("null tables are deterministic and sorted") {
  const GaussianTargetModel model{{8, 1}};
  const NullTable a = mc_null_table(StatisticKind::Ks, model, 1000, 99, 0);
  const NullTable b = mc_null_table(StatisticKind::Ks, model, 1000, 99, 1);
  CHECK(a.values == b.values);
  CHECK(std::is_sorted(a.values.begin(), a.values.end()));
  CHECK(a.values.size() == 1000);
  CHECK_THROWS_AS(mc_null_table(StatisticKind::Ks, model, 10, 99, 0), Error);
}

TEST_CASE("null table files round-trip byte for byte") {
  namespace fs = std::filesystem;
  const GaussianTargetModel model{{6, 0}};
  const NullTable table = mc_null_table(StatisticKind::Cvm, model, 1000, 5, 0);
  const fs::path dir = fs::temp_directory_path() / "kgof-test-tables";
  fs::create_directories(dir);
  const std::string path = (dir / "t.nulltab").string();
  write_null_table(table, path);
  const NullTable loaded = read_null_table(path);
  CHECK(loaded.values == table.values);
  CHECK(loaded.statistic_name == table.statistic_name);
  CHECK(loaded.seed == table.seed);
  CHECK(loaded.reps == table.reps);
  CHECK(loaded.model == table.model);
  fs::remove(path);
}

TEST_CASE("pipeline tables: estimated-parameter rotated statistics") {
  FamilyPipelineModel model;
  model.family_name = "exponential";
  model.params = make_vec({2.0});
  model.n = 400;
  model.grid.cells = 8;
  model.estimate = true;
  model.target = TargetSpec{8, 1};
  const NullTable table = mc_null_table(StatisticKind::Ks, model, 1000, 7, 0);
  CHECK(table.values.size() == 1000);
  CHECK(table.values.front() > 0.0);
  // Deterministic under rerun.
  const NullTable again = mc_null_table(StatisticKind::Ks, model, 1000, 7, 1);
  CHECK(table.values == again.values);
}

TEST_CASE("tables built from chronically failing estimation are rejected") {
  // Two observations rarely pin down a rate: the score equation often has no
  // root, and more than 1% of replicates fail.
  FamilyPipelineModel model;
  model.family_name = "exponential";
  model.params = make_vec({2.0});
  model.n = 2;
  model.grid.cells = 8;
  model.estimate = true;
  model.target = TargetSpec{8, 1};
  CHECK_THROWS_AS(mc_null_table(StatisticKind::Ks, model, 1000, 11, 0), Error);
  try {
    mc_null_table(StatisticKind::Ks, model, 1000, 11, 0);
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::TableUnreliable);
  }
}

TEST_CASE("rotation preserves the chi-squared statistic exactly") {
  const ParametricFamily family = make_exponential_family();
  const Vec theta = make_vec({1.5});
  const DiscreteDistribution grid = build_equiprobable_grid(family, theta, 9, 0.0);
  RandomStream stream(63, 0);
  std::vector<double> sample(600);
  for (double& x : sample) x = family.quantile(theta, stream.next_uniform());
  const CellCounts counts = counts_from_sample(sample, grid);

  const Vec theta_hat = mle_discrete(counts, family, theta, grid);
  DiscreteDistribution fitted = grid;
  fitted.probs = cell_probabilities(family, theta_hat, grid.atoms);
  const ScoreSet q_set = score_set_for(family, theta_hat, fitted);

  const DiscreteDistribution target = uniform_target(9);
  const ScoreSet s_set = synthetic_score_set(target, 1);
  const LinearOperator rotation = rotation_vk(q_set, s_set, fitted.probs, target.probs);
  const LinearOperator embedding = embed_L(fitted.probs, target.probs);

  const ProcessIncrements dv = empirical_increments(counts, fitted.probs, fitted);
  const ProcessIncrements rotated = primal_rotation(dv, rotation, embedding, target);

  CHECK(chi_squared_of_increments(rotated, target.probs) ==
        doctest::Approx(chi_squared_stat(counts, fitted.probs)).epsilon(1e-9));
}

TEST_CASE("run_test end to end") {
  const ParametricFamily family = make_exponential_family();
  const Vec theta = make_vec({2.0});
  RandomStream stream(64, 0);
  std::vector<double> sample(1500);
  for (double& x : sample) x = family.quantile(theta, stream.next_uniform());

  GridSpec grid_spec;
  grid_spec.cells = 10;
  RunOptions options;
  options.reps = 2000;
  options.seed = 11;

  const TestReport report = run_test(sample, family, theta, grid_spec, options);
  CHECK(report.statistic_name == "ks");
  CHECK(report.n == 1500);
  CHECK(report.cells == 10);
  CHECK(report.p_value > 0.0);
  CHECK(report.p_value <= 1.0);
  REQUIRE(report.theta_hat.has_value());
  CHECK((*report.theta_hat)[0] == doctest::Approx(2.0).epsilon(0.2));

  // Identical inputs give byte-identical reports.
  const TestReport again = run_test(sample, family, theta, grid_spec, options);
  CHECK(report_to_json(report) == report_to_json(again));

  // Empty samples are rejected.
  const std::vector<double> empty;
  CHECK_THROWS_AS(run_test(empty, family, theta, grid_spec, options), Error);
}

TEST_CASE("run_test uses the table cache") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kgof-test-cache";
  fs::remove_all(dir);

  const ParametricFamily family = make_uniform_family(0.0, 1.0);
  RandomStream stream(65, 0);
  std::vector<double> sample(400);
  for (double& x : sample) x = stream.next_uniform();

  GridSpec grid_spec;
  grid_spec.cells = 6;
  RunOptions options;
  options.reps = 1000;
  options.seed = 3;
  options.cache_dir = dir.string();

  const TestReport first = run_test(sample, family, Vec(), grid_spec, options);
  // The first run leaves the table on disk under its cache key.
  const std::string key = null_table_cache_key(
      StatisticKind::Ks, GaussianTargetModel{{6, 0}}, options.reps, options.seed);
  CHECK(fs::exists(dir / key));
  // The second run reads it back and produces the identical report.
  const TestReport second = run_test(sample, family, Vec(), grid_spec, options);
  CHECK(report_to_json(first) == report_to_json(second));
  fs::remove_all(dir);
}

TEST_CASE("gross alternatives are rejected more often than not") {
  // Exponential data tested against a normal location family.
  const ParametricFamily exponential = make_exponential_family();
  const ParametricFamily tested = make_normal_mean_family(1.0);
  const Vec exp_theta = make_vec({1.0});

  GridSpec grid_spec;
  grid_spec.cells = 10;
  RunOptions options;
  options.reps = 2000;
  options.seed = 17;
  options.table = std::make_shared<NullTable>(mc_null_table(
      StatisticKind::Ks, GaussianTargetModel{{10, 1}}, options.reps, options.seed, 0));

  const int trials = 60;
  int rejections = 0;
  for (int trial = 0; trial < trials; ++trial) {
    RandomStream stream(1000 + trial, 0);
    std::vector<double> sample(2000);
    for (double& x : sample) {
      x = exponential.quantile(exp_theta, stream.next_uniform());
    }
    const TestReport report =
        run_test(sample, tested, make_vec({1.0}), grid_spec, options);
    if (report.p_value < 0.05) ++rejections;
  }
  CHECK(rejections > trials / 2);
}

TEST_CASE("model descriptors and hashes are stable") {
  const GaussianTargetModel a{{10, 1}};
  const GaussianTargetModel b{{10, 2}};
  CHECK(model_descriptor(a) == "target=uniform;cells=10;k=1");
  CHECK(model_hash(a) != model_hash(b));
  CHECK(null_table_cache_key(StatisticKind::Ks, a, 5000, 7) ==
        "ks_" + model_hash(a) + "_N10_K1_r5000_s7.nulltab");
}
