// Acceptance suite: prints one pass/fail line per criterion and exits with
// the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kgof/accumulators.hpp"
#include "kgof/discretize.hpp"
#include "kgof/errors.hpp"
#include "kgof/family.hpp"
#include "kgof/gof.hpp"
#include "kgof/kt1.hpp"
#include "kgof/multidim.hpp"
#include "kgof/operators.hpp"
#include "kgof/orthonormal.hpp"
#include "kgof/parallel.hpp"
#include "kgof/processes.hpp"
#include "kgof/rng.hpp"
#include "kgof/scores.hpp"
#include "kgof/verify.hpp"

using namespace kgof;

namespace {

using clock_type = std::chrono::steady_clock;

struct CriterionResult {
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

std::string cli_path;  // set from argv for the reproducibility criterion

std::string fmt(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3g", x);
  return buffer;
}

// ---------------------------------------------------------------------------
// 1. Deterministic operator identities on 200 randomized instances.

CriterionResult criterion_operator_identities() {
  CriterionResult result;
  RandomStream stream(1001, 0);
  double worst = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    const int n = 2 + static_cast<int>(stream.next_uniform() * 49);
    const int k = std::min(n - 1, static_cast<int>(stream.next_uniform() * 5));
    const Vec p = random_probability_vector(n, stream);
    const Vec r = random_probability_vector(n, stream);
    const ScoreSet q_set = random_score_set(p, k, stream);
    const ScoreSet s_set = random_score_set(r, k, stream);
    worst = std::max(
        worst, checks::operator_deviations(p, r, q_set, s_set, stream).max());
  }
  result.pass = worst <= 1e-9;
  result.detail = "max identity deviation " + fmt(worst) + " (bound 1e-9)";
  return result;
}

// ---------------------------------------------------------------------------
// 2. Exact rotated-covariance identity on the same instance family.

CriterionResult criterion_rotated_covariance() {
  CriterionResult result;
  RandomStream stream(1002, 0);
  double worst = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    const int n = 2 + static_cast<int>(stream.next_uniform() * 49);
    const int k = std::min(n - 1, static_cast<int>(stream.next_uniform() * 5));
    const Vec p = random_probability_vector(n, stream);
    const Vec r = random_probability_vector(n, stream);
    const ScoreSet q_set = random_score_set(p, k, stream);
    const ScoreSet s_set = random_score_set(r, k, stream);
    worst = std::max(worst,
                     checks::rotated_covariance_deviation(p, r, q_set, s_set));
  }
  result.pass = worst <= 1e-9;
  result.detail = "max covariance deviation " + fmt(worst) + " (bound 1e-9)";
  return result;
}

// ---------------------------------------------------------------------------
// 3. Process covariances by Monte Carlo (N = 10, 1e5 replicates).

CriterionResult criterion_process_covariances() {
  CriterionResult result;
  DiscreteDistribution dist;
  const int n = 10;
  dist.atoms = Vec::LinSpaced(n, 0.0, 9.0);
  Vec masses = Vec::LinSpaced(n, 1.0, 10.0);
  dist.probs = masses / masses.sum();

  const ScoreSet q0_only{{Vec::Ones(n)}, dist.probs};
  const LinearOperator projection = big_pi(dist.probs, q0_only);
  const std::uint64_t reps = 100000;
  const int pairs = n * (n + 1) / 2;

  struct Acc {
    CovarianceAccumulator bm_paths;
    CovarianceAccumulator bridge_paths;
    std::vector<MeanAccumulator> merged;  // (path_m - path_{k-1})^2 per pair
    explicit Acc(int dim = 0, int pair_count = 0)
        : bm_paths(dim), bridge_paths(dim), merged(pair_count) {}
    void merge(const Acc& other) {
      bm_paths.merge(other.bm_paths);
      bridge_paths.merge(other.bridge_paths);
      for (std::size_t i = 0; i < merged.size(); ++i) {
        merged[i].merge(other.merged[i]);
      }
    }
  };

  Acc acc = replicate_reduce<Acc>(
      reps, [&]() { return Acc(n, pairs); },
      [&](std::uint64_t rep, Acc& local) {
        const ProcessIncrements dw = simulate_bm_increments(dist, 1003, rep);
        local.bm_paths.add(accumulate(dw.values));
        const ProcessIncrements dv = project_increments(dw, projection);
        const Vec path = accumulate(dv.values);
        local.bridge_paths.add(path);
        int pair = 0;
        for (int k = 0; k < n; ++k) {
          for (int m = k; m < n; ++m) {
            const double jump = path[m] - (k > 0 ? path[k - 1] : 0.0);
            local.merged[pair++].add(jump * jump);
          }
        }
      },
      [](Acc& total, const Acc& part) { total.merge(part); });

  const Vec time = accumulate(dist.probs);
  const Mat bm_cov = acc.bm_paths.covariance();
  const Mat bm_se = acc.bm_paths.standard_error();
  const Mat bridge_cov = acc.bridge_paths.covariance();
  const Mat bridge_se = acc.bridge_paths.standard_error();

  double worst_sigma = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double t_min = time[std::min(a, b)];
      worst_sigma = std::max(
          worst_sigma, std::abs(bm_cov(a, b) - t_min) / std::max(bm_se(a, b), 1e-12));
      const double bridge_expected = t_min - time[a] * time[b];
      worst_sigma =
          std::max(worst_sigma, std::abs(bridge_cov(a, b) - bridge_expected) /
                                    std::max(bridge_se(a, b), 1e-12));
    }
  }
  int pair = 0;
  for (int k = 0; k < n; ++k) {
    for (int m = k; m < n; ++m) {
      const double mass = time[m] - (k > 0 ? time[k - 1] : 0.0);
      const double expected = mass - mass * mass;
      const MeanAccumulator& jump = acc.merged[pair++];
      worst_sigma = std::max(worst_sigma, std::abs(jump.mean() - expected) /
                                              std::max(jump.standard_error(), 1e-12));
    }
  }
  result.pass = worst_sigma <= 4.0;
  result.detail = "worst deviation " + fmt(worst_sigma) + " MC sigmas (bound 4)";
  return result;
}

// ---------------------------------------------------------------------------
// 4. Chi-squared means with known and estimated parameters.

CriterionResult criterion_chi_squared_means() {
  CriterionResult result;
  const ParametricFamily family = make_exponential_family();
  Vec theta(1);
  theta << 2.0;
  const int cells = 10;
  const long long n = 2000;
  const std::uint64_t reps = 10000;
  const DiscreteDistribution dist = build_equiprobable_grid(family, theta, cells, 0.0);

  struct Acc {
    MeanAccumulator known;
    MeanAccumulator estimated;
    std::uint64_t failures = 0;
    void merge(const Acc& other) {
      known.merge(other.known);
      estimated.merge(other.estimated);
      failures += other.failures;
    }
  };
  Acc acc = replicate_reduce<Acc>(
      reps, []() { return Acc(); },
      [&](std::uint64_t rep, Acc& local) {
        RandomStream stream(1004, rep);
        std::vector<double> sample(n);
        for (double& x : sample) x = family.quantile(theta, stream.next_uniform());
        const CellCounts counts = counts_from_sample(sample, dist);
        local.known.add(chi_squared_stat(counts, dist.probs));
        try {
          const Vec theta_hat = mle_discrete(counts, family, theta, dist);
          const Vec fitted = cell_probabilities(family, theta_hat, dist.atoms);
          local.estimated.add(chi_squared_stat(counts, fitted));
        } catch (const Error&) {
          ++local.failures;
        }
      },
      [](Acc& total, const Acc& part) { total.merge(part); });

  const double known_sigma =
      std::abs(acc.known.mean() - (cells - 1)) / acc.known.standard_error();
  const double est_sigma = std::abs(acc.estimated.mean() - (cells - 2)) /
                           acc.estimated.standard_error();
  result.pass = known_sigma <= 3.0 && est_sigma <= 3.0 && acc.failures == 0;
  result.detail = "known-theta mean " + fmt(acc.known.mean()) + " (" +
                  fmt(known_sigma) + " se from " + fmt(double(cells - 1)) +
                  "), estimated mean " + fmt(acc.estimated.mean()) + " (" +
                  fmt(est_sigma) + " se from " + fmt(double(cells - 2)) + ")";
  return result;
}

// ---------------------------------------------------------------------------
// 5. Distribution-freeness of the rotation across source families.

CriterionResult criterion_distribution_freeness() {
  CriterionResult result;
  const long long reps = 5000;
  const TargetSpec target{10, 1};

  FamilyPipelineModel exp_model;
  exp_model.family_name = "exponential";
  exp_model.params = Vec::Constant(1, 2.0);
  exp_model.n = 2000;
  exp_model.grid.cells = 10;
  exp_model.estimate = true;
  exp_model.target = target;

  FamilyPipelineModel norm_model;
  norm_model.family_name = "normal-mean";
  Vec norm_params(2);
  norm_params << 0.0, 1.0;
  norm_model.params = norm_params;
  norm_model.n = 2000;
  norm_model.grid.cells = 10;
  norm_model.estimate = true;
  norm_model.target = target;

  const NullTable exp_table =
      mc_null_table(StatisticKind::Ks, exp_model, reps, 1005, 0);
  const NullTable norm_table =
      mc_null_table(StatisticKind::Ks, norm_model, reps, 2005, 0);
  const TwoSampleKsResult ks = two_sample_ks(exp_table.values, norm_table.values);
  result.pass = ks.p_value > 0.01;
  result.detail = "two-sample KS distance " + fmt(ks.distance) + ", p = " +
                  fmt(ks.p_value) + " (needs > 0.01)";
  return result;
}

// ---------------------------------------------------------------------------
// 6. p-value uniformity under a true null.

CriterionResult criterion_pvalue_uniformity() {
  CriterionResult result;
  const ParametricFamily family = make_exponential_family();
  Vec theta(1);
  theta << 2.0;
  const long long n = 4000;
  const int runs = 5000;

  RunOptions options;
  options.statistic = StatisticKind::Ks;
  options.reps = 20000;
  options.seed = 1006;
  options.table = std::make_shared<NullTable>(mc_null_table(
      StatisticKind::Ks, GaussianTargetModel{{10, 1}}, options.reps,
      options.seed, 0));

  GridSpec grid_spec;
  grid_spec.cells = 10;

  std::vector<double> pvalues(runs);
  std::vector<std::uint8_t> failed(runs, 0);
  replicate_for(runs, [&](std::uint64_t rep) {
    RandomStream stream(3006, rep);
    std::vector<double> sample(n);
    for (double& x : sample) x = family.quantile(theta, stream.next_uniform());
    try {
      const TestReport report = run_test(sample, family, theta, grid_spec, options);
      pvalues[rep] = report.p_value;
    } catch (const Error&) {
      failed[rep] = 1;
    }
  });
  for (std::uint8_t f : failed) {
    if (f) {
      result.pass = false;
      result.detail = "a run_test replicate failed";
      return result;
    }
  }

  const double distance = ks_uniform_distance(pvalues);
  const double critical = 1.6276 / std::sqrt(static_cast<double>(runs));
  result.pass = distance <= critical;
  result.detail = "KS distance from uniform " + fmt(distance) +
                  " (1% critical " + fmt(critical) + ")";
  return result;
}

// ---------------------------------------------------------------------------
// 7. KT1 orthogonality and BM-like innovation covariance.

CriterionResult criterion_kt1() {
  CriterionResult result;
  const ParametricFamily family = make_exponential_family();
  Vec theta(1);
  theta << 2.0;
  const DiscreteDistribution dist = build_equiprobable_grid(family, theta, 10, 0.0);
  const long long n = 1000;
  const std::uint64_t reps = 10000;

  const checks::Kt1McResult study =
      checks::kt1_mc_study(family, theta, dist, n, reps, 1007, 0);
  const Kt1State truth = build_kt1_state(family, theta, dist);

  const double cov_sigmas = study.cov_x1_x2star_sigmas.maxCoeff();
  const bool orthogonality = cov_sigmas <= 3.0;

  const double corr_bound = 3.0 / std::sqrt(static_cast<double>(study.replicates));
  const double worst_corr = std::max(study.residual_corr_x1.maxCoeff(),
                                     study.residual_corr_x2.maxCoeff());
  const bool residuals = worst_corr <= corr_bound;

  // BM-like covariance of the cumulative innovations at interior cells:
  // independent increments (covariance depends on the earlier index only)
  // and per-cell variances accumulating the exact regression variances.
  const int usable = study.usable_cells;
  const Mat& cov = study.innovation_path_cov;
  const Mat& se = study.innovation_path_se;
  Vec theory_path(usable);
  double running = 0.0;
  for (int cell = 0; cell < usable; ++cell) {
    running += checks::kt1_innovation_variance_theory(truth, cell);
    theory_path[cell] = running;
  }
  double worst_bm_sigma = 0.0;
  double worst_literal_sigma = 0.0;  // against the raw time scale P(min)
  const Vec time = accumulate(dist.probs);
  for (int a = 1; a + 1 < usable; ++a) {
    for (int b = a; b + 1 < usable; ++b) {
      const double entry_se = std::max(se(a, b), 1e-12);
      worst_bm_sigma = std::max(
          worst_bm_sigma, std::abs(cov(a, b) - theory_path[a]) / entry_se);
      worst_literal_sigma = std::max(
          worst_literal_sigma, std::abs(cov(a, b) - time[a]) / entry_se);
    }
  }
  const bool bm_like = worst_bm_sigma <= 5.0;

  result.pass = orthogonality && residuals && bm_like;
  result.detail = "Cov(x1,x2*) worst " + fmt(cov_sigmas) +
                  " se; residual corr " + fmt(worst_corr) + " (bound " +
                  fmt(corr_bound) + "); innovation covariance worst " +
                  fmt(worst_bm_sigma) + " se (literal-P(min) reading: " +
                  fmt(worst_literal_sigma) + " se)";
  return result;
}

// ---------------------------------------------------------------------------
// 8. Two-dimensional machinery.

CriterionResult criterion_multidim() {
  CriterionResult result;
  bool union_ok = true;

  DiscreteDistribution axis;
  axis.atoms = Vec::LinSpaced(4, 0.0, 3.0);
  Vec masses(4);
  masses << 0.1, 0.2, 0.3, 0.4;
  axis.probs = masses;
  const Grid2D grid = make_independent_grid2d(axis, axis);

  // Exhaustive union oracle over all atom pairs.
  for (int ai = 0; ai < 4 && union_ok; ++ai) {
    for (int bi = 0; bi < 4 && union_ok; ++bi) {
      const double a = grid.x_atoms[ai];
      const double b = grid.x_atoms[bi];
      const DualFunction sym = symmetrize_colour_blind(a, b, grid);
      for (int i = 0; i < 4 && union_ok; ++i) {
        for (int j = 0; j < 4 && union_ok; ++j) {
          const bool in_union = (grid.x_atoms[i] <= a && grid.y_atoms[j] <= b) ||
                                (grid.x_atoms[i] <= b && grid.y_atoms[j] <= a);
          union_ok = sym.values[flatten_2d(i, j, 4)] == (in_union ? 1.0 : 0.0);
        }
      }
    }
  }

  // Pillow tie-down on both far edges, every replicate.
  const DiscreteDistribution flat = flattened_distribution(grid);
  double worst_edge = 0.0;
  for (std::uint64_t rep = 0; rep < 1000; ++rep) {
    const ProcessIncrements dw = simulate_bm_increments(flat, 1008, rep);
    const Vec dv = pillow_increments(dw.values, grid);
    for (int fixed = 0; fixed < 4; ++fixed) {
      double v_inf_y = 0.0, v_x_inf = 0.0;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          if (j <= fixed) v_inf_y += dv[flatten_2d(i, j, 4)];
          if (i <= fixed) v_x_inf += dv[flatten_2d(i, j, 4)];
        }
      }
      worst_edge = std::max({worst_edge, std::abs(v_inf_y), std::abs(v_x_inf)});
    }
  }

  // Rotated-covariance identity on a 3x3 independent grid.
  DiscreteDistribution x3;
  x3.atoms = Vec::LinSpaced(3, 0.0, 2.0);
  Vec px(3);
  px << 0.2, 0.5, 0.3;
  x3.probs = px;
  DiscreteDistribution y3 = x3;
  Vec py(3);
  py << 0.25, 0.35, 0.4;
  y3.probs = py;
  const Grid2D small = make_independent_grid2d(x3, y3);
  const DiscreteDistribution small_flat = flattened_distribution(small);
  const DiscreteDistribution target = uniform_target(small_flat.size());
  const ScoreSet q_flat{{Vec::Ones(small_flat.size())}, small_flat.probs};
  const ScoreSet s_flat = synthetic_score_set(target, 0);
  const double identity_dev = checks::rotated_covariance_deviation(
      small_flat.probs, target.probs, q_flat, s_flat);

  result.pass = union_ok && worst_edge <= 1e-10 && identity_dev <= 1e-9;
  result.detail = std::string("union oracle ") + (union_ok ? "exact" : "BROKEN") +
                  ", worst edge residual " + fmt(worst_edge) +
                  ", 2-D identity deviation " + fmt(identity_dev);
  return result;
}

// ---------------------------------------------------------------------------
// 9. Reproducibility of `test` and `table` commands.

CriterionResult criterion_reproducibility() {
  CriterionResult result;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kgof-acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto slurp = [](const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };

  bool table_ok = false, test_ok = false;
  if (!cli_path.empty()) {
    // Command-level check through the real CLI binary.
    const std::string table_cmd_base = cli_path +
                                       " table --cells 8 --k 1 --reps 1000 --seed 7 ";
    std::string cmd1 = table_cmd_base + "--out " + (dir / "t1.nulltab").string() +
                       " --threads 0 2>/dev/null";
    std::string cmd2 = table_cmd_base + "--out " + (dir / "t2.nulltab").string() +
                       " --threads 1 2>/dev/null";
    table_ok = std::system(cmd1.c_str()) == 0 && std::system(cmd2.c_str()) == 0 &&
               slurp(dir / "t1.nulltab") == slurp(dir / "t2.nulltab");

    // Fixture data for the test command.
    {
      std::ofstream data(dir / "data.csv");
      RandomStream stream(1009, 0);
      const ParametricFamily family = make_exponential_family();
      Vec theta(1);
      theta << 1.0;
      char buffer[32];
      for (int i = 0; i < 200; ++i) {
        std::snprintf(buffer, sizeof(buffer), "%.17g",
                      family.quantile(theta, stream.next_uniform()));
        data << buffer << "\n";
      }
    }
    const std::string test_cmd_base =
        cli_path + " test --data " + (dir / "data.csv").string() +
        " --family exponential --cells 8 --reps 1000 --seed 7 ";
    std::string cmd3 = "GOF_CACHE_DIR=" + (dir / "cache").string() + " " +
                       test_cmd_base + "--out " + (dir / "r1.json").string() +
                       " >/dev/null";
    std::string cmd4 = "GOF_CACHE_DIR=" + (dir / "cache").string() + " " +
                       test_cmd_base + "--out " + (dir / "r2.json").string() +
                       " >/dev/null";
    test_ok = std::system(cmd3.c_str()) == 0 && std::system(cmd4.c_str()) == 0 &&
              slurp(dir / "r1.json") == slurp(dir / "r2.json");
  }

  fs::remove_all(dir);
  result.pass = table_ok && test_ok;
  result.detail = std::string("table bytes ") + (table_ok ? "identical" : "DIFFER") +
                  ", report bytes " + (test_ok ? "identical" : "DIFFER");
  if (cli_path.empty()) result.detail = "CLI binary path not provided";
  return result;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) cli_path = argv[1];

  struct Entry {
    const char* name;
    CriterionResult (*run)();
    double budget_seconds;
  };
  const Entry entries[] = {
      {"operator identities (200 randomized instances, 1e-9)",
       criterion_operator_identities, 10.0},
      {"exact rotated-covariance identity (1e-9)", criterion_rotated_covariance,
       10.0},
      {"process covariances by MC (N=10, 1e5 reps, 4 SE)",
       criterion_process_covariances, 60.0},
      {"chi-squared means N-1 / N-K-1 (3 SE)", criterion_chi_squared_means,
       120.0},
      {"distribution-freeness of the rotation (two-sample KS, 1%)",
       criterion_distribution_freeness, 600.0},
      {"p-value uniformity under the null (KS, 1%)", criterion_pvalue_uniformity,
       600.0},
      {"KT1 orthogonality and innovation covariance", criterion_kt1, 600.0},
      {"2-D: symmetrized indicators, pillow tie-down, rotated identity",
       criterion_multidim, 60.0},
      {"reproducibility: byte-identical test/table reruns",
       criterion_reproducibility, 120.0},
  };

  int failures = 0;
  int id = 0;
  for (const Entry& entry : entries) {
    ++id;
    const auto start = clock_type::now();
    CriterionResult result;
    try {
      result = entry.run();
    } catch (const std::exception& error) {
      result.pass = false;
      result.detail = std::string("exception: ") + error.what();
    }
    result.seconds =
        std::chrono::duration<double>(clock_type::now() - start).count();
    const bool in_budget = result.seconds < entry.budget_seconds;
    const bool pass = result.pass && in_budget;
    std::printf("%s %d. %s [%.1fs%s] %s\n", pass ? "PASS" : "FAIL", id,
                entry.name, result.seconds,
                in_budget ? "" : " OVER BUDGET", result.detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures;
}
