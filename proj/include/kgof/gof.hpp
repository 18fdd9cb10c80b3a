#pragma once

// Test statistics, Monte-Carlo null tables, and the end-to-end rotated
// goodness-of-fit test.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kgof/discretize.hpp"
#include "kgof/distribution.hpp"
#include "kgof/family.hpp"
#include "kgof/processes.hpp"

namespace kgof {

// ---------------------------------------------------------------------------
// Statistics

enum class StatisticKind { Ks, Cvm, ChiSquared };

const char* statistic_name(StatisticKind kind);
StatisticKind statistic_by_name(const std::string& name);

/// Classical chi-squared statistic sum (nu - n p)^2 / (n p).
double chi_squared_stat(const CellCounts& counts, const Vec& probs);

/// Sup of the absolute cumulative path.
double ks_stat(const ProcessIncrements& dv);

/// Cell-mass-weighted squared path: sum_j path_j^2 p_j.
double cvm_stat(const ProcessIncrements& dv, const Vec& probs);

/// sum_j dv_j^2 / p_j; on empirical increments this equals the classical
/// chi-squared statistic, and the rotation preserves it exactly.
double chi_squared_of_increments(const ProcessIncrements& dv, const Vec& probs);

double statistic_of(StatisticKind kind, const ProcessIncrements& dv,
                    const Vec& probs);

// ---------------------------------------------------------------------------
// Grid and target specification (mirrors the config schema)

struct GridSpec {
  enum class Scheme { Equiprobable, Edges };
  Scheme scheme = Scheme::Equiprobable;
  int cells = 10;
  Vec edges;  // used by the Edges scheme
};

DiscreteDistribution build_grid(const ParametricFamily& family, const Vec& theta,
                                const GridSpec& spec);

/// Parameter-free rotation target: uniform masses on synthetic cell
/// midpoints (j + 1/2) / N over [0, 1].
struct TargetSpec {
  int cells = 10;
  int param_dim = 0;  // synthetic score directions padded onto s_0
};

DiscreteDistribution uniform_target(int cells);

// ---------------------------------------------------------------------------
// Null tables

struct NullTable {
  std::string statistic_name;
  std::vector<double> values;  // sorted ascending, one per replicate
  long long reps = 0;
  std::uint64_t seed = 0;
  std::string model;
};

/// p = (1 + #{table >= observed}) / (reps + 1): unbiased, never zero.
double p_value_from_table(const NullTable& table, double observed);

/// Asymptotic table model: Gaussian increments in the target time scale,
/// projected by the padded score set. Parameter-free, hence reusable across
/// hypothesized families.
struct GaussianTargetModel {
  TargetSpec target;
};

/// Finite-sample pipeline model: draw n samples from the family, estimate,
/// rotate to the target, record the statistic. Used by the
/// distribution-freeness harness.
struct FamilyPipelineModel {
  std::string family_name;
  Vec params;          // reference/generating parameters
  long long n = 1000;
  GridSpec grid;
  bool estimate = true;
  TargetSpec target;
};

using NullModel = std::variant<GaussianTargetModel, FamilyPipelineModel>;

std::string model_descriptor(const NullModel& model);
std::string model_hash(const NullModel& model);

/// FNV-1a hash of a string, 16 hex characters.
std::string fnv1a_hex(const std::string& text);

/// Generated tables are deterministic in (model, statistic, reps, seed) and
/// independent of thread count. Replicates whose estimation fails are
/// re-simulated from reserved stream ids; more than 1% failures raises
/// TableUnreliable.
NullTable mc_null_table(StatisticKind statistic, const NullModel& model,
                        long long reps, std::uint64_t seed, int threads = 0);

// Null-table file format: `# key: value` header lines, then one full
// precision value per line.
void write_null_table(const NullTable& table, const std::string& path);
NullTable read_null_table(const std::string& path);
std::string null_table_cache_key(StatisticKind statistic, const NullModel& model,
                                 long long reps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// End-to-end test

struct DiagnosticEntry {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct TestReport {
  std::string statistic_name;
  double statistic_value = 0.0;
  double p_value = 1.0;
  std::optional<Vec> theta_hat;
  long long n = 0;
  int cells = 0;
  std::string target;
  long long replicates = 0;
  std::uint64_t seed = 0;
  std::vector<DiagnosticEntry> diagnostics;
};

std::string report_to_json(const TestReport& report);

struct RunOptions {
  StatisticKind statistic = StatisticKind::Ks;
  long long reps = 5000;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string cache_dir;  // empty disables the on-disk table cache
  // Preloaded null table (must match statistic/model/reps/seed); used by
  // callers that evaluate many tests against one table.
  std::shared_ptr<const NullTable> table;
};

/// Full pipeline: bin the sample, estimate theta when the family has a free
/// parameter (at most one), form empirical increments, rotate to the uniform
/// target, and read the p-value off the target's null table.
TestReport run_test(std::span<const double> sample, const ParametricFamily& family,
                    const Vec& theta_ref, const GridSpec& grid_spec,
                    const RunOptions& options);

// ---------------------------------------------------------------------------
// Two-sample comparison (verification harness)

struct TwoSampleKsResult {
  double distance = 0.0;
  double p_value = 1.0;
};

TwoSampleKsResult two_sample_ks(std::vector<double> a, std::vector<double> b);

/// Kolmogorov tail Q(lambda) = P(sup |bridge| > lambda).
double kolmogorov_tail(double lambda);

/// Sup distance of a sample from the uniform law on [0,1].
double ks_uniform_distance(std::vector<double> values);

}  // namespace kgof
