#include "kgof/gof.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kgof/errors.hpp"
#include "kgof/kt1.hpp"
#include "kgof/operators.hpp"
#include "kgof/parallel.hpp"
#include "kgof/rng.hpp"
#include "kgof/scores.hpp"

namespace kgof {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Statistics

const char* statistic_name(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::Ks: return "ks";
    case StatisticKind::Cvm: return "cvm";
    case StatisticKind::ChiSquared: return "chisq";
  }
  return "unknown";
}

StatisticKind statistic_by_name(const std::string& name) {
  if (name == "ks") return StatisticKind::Ks;
  if (name == "cvm") return StatisticKind::Cvm;
  if (name == "chisq") return StatisticKind::ChiSquared;
  fail(ErrorCode::ConfigError, "unknown statistic: " + name);
}

double chi_squared_stat(const CellCounts& counts, const Vec& probs) {
  require(counts.size() == probs.size(), ErrorCode::ConfigError,
          "counts/probs dimension mismatch");
  const double n = static_cast<double>(counts.sample_size);
  double total = 0.0;
  for (int j = 0; j < counts.size(); ++j) {
    const double expected = n * probs[j];
    const double diff = counts.counts[j] - expected;
    total += diff * diff / expected;
  }
  return total;
}

double ks_stat(const ProcessIncrements& dv) {
  double best = 0.0;
  double running = 0.0;
  for (int j = 0; j < dv.size(); ++j) {
    running += dv.values[j];
    best = std::max(best, std::abs(running));
  }
  return best;
}

double cvm_stat(const ProcessIncrements& dv, const Vec& probs) {
  require(dv.size() == probs.size(), ErrorCode::ConfigError,
          "increments/probs dimension mismatch");
  double total = 0.0;
  double running = 0.0;
  for (int j = 0; j < dv.size(); ++j) {
    running += dv.values[j];
    total += running * running * probs[j];
  }
  return total;
}

double chi_squared_of_increments(const ProcessIncrements& dv, const Vec& probs) {
  require(dv.size() == probs.size(), ErrorCode::ConfigError,
          "increments/probs dimension mismatch");
  double total = 0.0;
  for (int j = 0; j < dv.size(); ++j) {
    total += dv.values[j] * dv.values[j] / probs[j];
  }
  return total;
}

double statistic_of(StatisticKind kind, const ProcessIncrements& dv,
                    const Vec& probs) {
  switch (kind) {
    case StatisticKind::Ks: return ks_stat(dv);
    case StatisticKind::Cvm: return cvm_stat(dv, probs);
    case StatisticKind::ChiSquared: return chi_squared_of_increments(dv, probs);
  }
  fail(ErrorCode::ConfigError, "unknown statistic");
}

// ---------------------------------------------------------------------------
// Grids and targets

DiscreteDistribution build_grid(const ParametricFamily& family, const Vec& theta,
                                const GridSpec& spec) {
  if (spec.scheme == GridSpec::Scheme::Equiprobable) {
    return build_equiprobable_grid(family, theta, spec.cells,
                                   family.support_floor(theta));
  }
  return build_grid_from_edges(family, theta, spec.edges);
}

DiscreteDistribution uniform_target(int cells) {
  require(cells >= 2, ErrorCode::ConfigError, "target needs at least 2 cells");
  DiscreteDistribution dist;
  dist.atoms = Vec::LinSpaced(cells, 0.5 / cells, (cells - 0.5) / cells);
  dist.probs = Vec::Constant(cells, 1.0 / cells);
  dist.lower_bound = 0.0;
  return dist;
}

// ---------------------------------------------------------------------------
// Null tables

double p_value_from_table(const NullTable& table, double observed) {
  const auto& v = table.values;
  const auto at_least =
      v.end() - std::lower_bound(v.begin(), v.end(), observed);
  return (1.0 + static_cast<double>(at_least)) /
         (static_cast<double>(table.reps) + 1.0);
}

namespace {

std::string format_double(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

std::string grid_descriptor(const GridSpec& spec) {
  std::ostringstream out;
  if (spec.scheme == GridSpec::Scheme::Equiprobable) {
    out << "equiprobable;cells=" << spec.cells;
  } else {
    out << "edges;edges=";
    for (int j = 0; j < spec.edges.size(); ++j) {
      if (j > 0) out << ",";
      out << format_double(spec.edges[j]);
    }
  }
  return out.str();
}

}  // namespace

std::string model_descriptor(const NullModel& model) {
  std::ostringstream out;
  if (const auto* target = std::get_if<GaussianTargetModel>(&model)) {
    out << "target=uniform;cells=" << target->target.cells
        << ";k=" << target->target.param_dim;
  } else {
    const auto& pipe = std::get<FamilyPipelineModel>(model);
    out << "family=" << pipe.family_name << ";params=";
    for (int j = 0; j < pipe.params.size(); ++j) {
      if (j > 0) out << ",";
      out << format_double(pipe.params[j]);
    }
    out << ";n=" << pipe.n << ";grid=" << grid_descriptor(pipe.grid)
        << ";estimate=" << (pipe.estimate ? 1 : 0)
        << ";target=uniform;cells=" << pipe.target.cells
        << ";k=" << pipe.target.param_dim;
  }
  return out.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

std::string model_hash(const NullModel& model) {
  return fnv1a_hex(model_descriptor(model));
}

namespace {

struct TargetContext {
  DiscreteDistribution dist;
  ScoreSet scores;
};

TargetContext make_target_context(const TargetSpec& spec) {
  TargetContext ctx;
  ctx.dist = uniform_target(spec.cells);
  ctx.scores = synthetic_score_set(ctx.dist, spec.param_dim);
  return ctx;
}

// One Gaussian replicate in the target space: project BM increments by the
// padded score set and evaluate the statistic.
double gaussian_target_replicate(const TargetContext& ctx,
                                 const LinearOperator& projection,
                                 StatisticKind statistic, std::uint64_t seed,
                                 std::uint64_t stream) {
  const ProcessIncrements dw = simulate_bm_increments(ctx.dist, seed, stream);
  const ProcessIncrements dv = project_increments(dw, projection);
  return statistic_of(statistic, dv, ctx.dist.probs);
}

struct PipelineContext {
  ParametricFamily family;
  Vec theta_ref;
  DiscreteDistribution grid;
  long long n = 0;
  bool estimate = false;
  TargetContext target;
};

PipelineContext make_pipeline_context(const FamilyPipelineModel& model) {
  PipelineContext ctx;
  ctx.family = family_by_name(model.family_name, model.params);
  ctx.theta_ref = family_reference_theta(model.family_name, model.params);
  require(static_cast<bool>(ctx.family.quantile), ErrorCode::ConfigError,
          "pipeline model needs a family quantile for sampling");
  ctx.grid = build_grid(ctx.family, ctx.theta_ref, model.grid);
  ctx.n = model.n;
  ctx.estimate = model.estimate && ctx.family.param_dim > 0;
  require(!ctx.estimate || ctx.family.param_dim == 1, ErrorCode::ConfigError,
          "pipeline estimation supports one parameter");
  require(model.target.cells == ctx.grid.size(), ErrorCode::ConfigError,
          "target must have as many cells as the grid");
  ctx.target = make_target_context(model.target);
  require(ctx.target.scores.param_dim() ==
              (ctx.estimate ? ctx.family.param_dim : 0),
          ErrorCode::ConfigError,
          "target score padding must match the number of estimated parameters");
  return ctx;
}

double pipeline_replicate(const PipelineContext& ctx, StatisticKind statistic,
                          std::uint64_t seed, std::uint64_t stream) {
  RandomStream rng(seed, stream);
  std::vector<double> sample(static_cast<std::size_t>(ctx.n));
  for (double& x : sample) x = ctx.family.quantile(ctx.theta_ref, rng.next_uniform());
  const CellCounts counts = counts_from_sample(sample, ctx.grid);

  Vec theta = ctx.theta_ref;
  if (ctx.estimate) theta = mle_discrete(counts, ctx.family, ctx.theta_ref, ctx.grid);

  DiscreteDistribution fitted = ctx.grid;
  if (ctx.estimate) fitted.probs = cell_probabilities(ctx.family, theta, ctx.grid.atoms);
  const ScoreSet q_set = ctx.estimate
                             ? score_set_for(ctx.family, theta, fitted)
                             : ScoreSet{{Vec::Ones(fitted.size())}, fitted.probs};

  const ProcessIncrements dv = empirical_increments(counts, fitted.probs, fitted);
  const LinearOperator rotation =
      rotation_vk(q_set, ctx.target.scores, fitted.probs, ctx.target.dist.probs);
  const LinearOperator embedding = embed_L(fitted.probs, ctx.target.dist.probs);
  const ProcessIncrements rotated =
      primal_rotation(dv, rotation, embedding, ctx.target.dist);
  return statistic_of(statistic, rotated, ctx.target.dist.probs);
}

}  // namespace

NullTable mc_null_table(StatisticKind statistic, const NullModel& model,
                        long long reps, std::uint64_t seed, int threads) {
  require(reps >= 1000, ErrorCode::ConfigError, "null tables need reps >= 1000");

  std::vector<double> values(static_cast<std::size_t>(reps));
  std::vector<std::uint8_t> failed(static_cast<std::size_t>(reps), 0);

  if (const auto* target_model = std::get_if<GaussianTargetModel>(&model)) {
    const TargetContext ctx = make_target_context(target_model->target);
    const LinearOperator projection = big_pi(ctx.dist.probs, ctx.scores);
    replicate_for(
        static_cast<std::uint64_t>(reps),
        [&](std::uint64_t rep) {
          values[rep] =
              gaussian_target_replicate(ctx, projection, statistic, seed, rep);
        },
        threads);
  } else {
    const PipelineContext ctx =
        make_pipeline_context(std::get<FamilyPipelineModel>(model));
    replicate_for(
        static_cast<std::uint64_t>(reps),
        [&](std::uint64_t rep) {
          // Estimation can fail for extreme replicates; re-simulate from
          // reserved stream ids so the table keeps one value per replicate.
          for (int attempt = 0; attempt < 3; ++attempt) {
            const std::uint64_t stream =
                rep + static_cast<std::uint64_t>(reps) * attempt;
            try {
              values[rep] = pipeline_replicate(ctx, statistic, seed, stream);
              if (attempt > 0) failed[rep] = 1;
              return;
            } catch (const Error&) {
            }
          }
          failed[rep] = 2;  // unresolved after retries
        },
        threads);
  }

  long long failures = 0;
  bool unresolved = false;
  for (std::uint8_t f : failed) {
    if (f > 0) ++failures;
    if (f > 1) unresolved = true;
  }
  if (unresolved ||
      static_cast<double>(failures) > 0.01 * static_cast<double>(reps)) {
    std::ostringstream msg;
    msg << failures << " of " << reps << " replicates failed estimation";
    fail(ErrorCode::TableUnreliable, msg.str());
  }

  std::sort(values.begin(), values.end());
  NullTable table;
  table.statistic_name = statistic_name(statistic);
  table.values = std::move(values);
  table.reps = reps;
  table.seed = seed;
  table.model = model_descriptor(model);
  return table;
}

std::string null_table_cache_key(StatisticKind statistic, const NullModel& model,
                                 long long reps, std::uint64_t seed) {
  int cells = 0, k = 0;
  if (const auto* target = std::get_if<GaussianTargetModel>(&model)) {
    cells = target->target.cells;
    k = target->target.param_dim;
  } else {
    const auto& pipe = std::get<FamilyPipelineModel>(model);
    cells = pipe.target.cells;
    k = pipe.target.param_dim;
  }
  std::ostringstream out;
  out << statistic_name(statistic) << "_" << model_hash(model) << "_N" << cells
      << "_K" << k << "_r" << reps << "_s" << seed << ".nulltab";
  return out.str();
}

// ---------------------------------------------------------------------------
// Reports

std::string report_to_json(const TestReport& report) {
  json doc;
  doc["statistic_name"] = report.statistic_name;
  doc["statistic_value"] = report.statistic_value;
  doc["p_value"] = report.p_value;
  if (report.theta_hat) {
    json theta = json::array();
    for (int j = 0; j < report.theta_hat->size(); ++j) {
      theta.push_back((*report.theta_hat)[j]);
    }
    doc["theta_hat"] = theta;
  }
  doc["n"] = report.n;
  doc["cells"] = report.cells;
  doc["target"] = report.target;
  doc["replicates"] = report.replicates;
  doc["seed"] = report.seed;
  json diagnostics = json::array();
  for (const DiagnosticEntry& entry : report.diagnostics) {
    diagnostics.push_back(
        {{"name", entry.name}, {"pass", entry.pass}, {"detail", entry.detail}});
  }
  doc["diagnostics"] = diagnostics;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// run_test

TestReport run_test(std::span<const double> sample, const ParametricFamily& family,
                    const Vec& theta_ref, const GridSpec& grid_spec,
                    const RunOptions& options) {
  require(!sample.empty(), ErrorCode::ConfigError, "sample is empty");
  require(options.reps >= 1000, ErrorCode::ConfigError,
          "reported p-values need reps >= 1000");
  require(family.param_dim <= 1, ErrorCode::ConfigError,
          "run_test supports at most one estimated parameter");

  const DiscreteDistribution grid = build_grid(family, theta_ref, grid_spec);
  const CellCounts counts = counts_from_sample(sample, grid);

  TestReport report;
  report.statistic_name = statistic_name(options.statistic);
  report.n = counts.sample_size;
  report.cells = grid.size();
  report.seed = options.seed;
  report.replicates = options.reps;

  DiscreteDistribution fitted = grid;
  ScoreSet q_set{{Vec::Ones(grid.size())}, grid.probs};
  if (family.param_dim == 1) {
    const Vec theta_hat = mle_discrete(counts, family, theta_ref, grid);
    report.theta_hat = theta_hat;
    fitted.probs = cell_probabilities(family, theta_hat, grid.atoms);
    q_set = score_set_for(family, theta_hat, fitted);
  }

  const double min_expected =
      static_cast<double>(counts.sample_size) * fitted.probs.minCoeff();
  if (min_expected < 5.0) {
    std::ostringstream detail;
    detail << "min expected cell count " << min_expected << " < 5";
    report.diagnostics.push_back({"small_sample", false, detail.str()});
  } else {
    report.diagnostics.push_back({"small_sample", true, "all expected counts >= 5"});
  }

  const TargetSpec target_spec{grid.size(), family.param_dim};
  const DiscreteDistribution target = uniform_target(target_spec.cells);
  const ScoreSet s_set = synthetic_score_set(target, target_spec.param_dim);
  report.target = model_descriptor(GaussianTargetModel{target_spec});

  const ProcessIncrements dv = empirical_increments(counts, fitted.probs, fitted);
  const LinearOperator rotation =
      rotation_vk(q_set, s_set, fitted.probs, target.probs);
  const LinearOperator embedding = embed_L(fitted.probs, target.probs);
  const ProcessIncrements rotated = primal_rotation(dv, rotation, embedding, target);
  report.statistic_value = statistic_of(options.statistic, rotated, target.probs);

  // Parameter-free table: cached when a cache directory is configured. The
  // diagnostic records the table key only, so reports stay byte-identical
  // whether the table was generated or read back.
  const NullModel table_model = GaussianTargetModel{target_spec};
  const std::string table_key = null_table_cache_key(options.statistic, table_model,
                                                     options.reps, options.seed);
  report.diagnostics.push_back({"null_table", true, table_key});
  if (options.table) {
    require(options.table->statistic_name == statistic_name(options.statistic) &&
                options.table->model == model_descriptor(table_model) &&
                options.table->reps == options.reps &&
                options.table->seed == options.seed,
            ErrorCode::ConfigError, "preloaded table does not match the run");
    report.p_value = p_value_from_table(*options.table, report.statistic_value);
    return report;
  }
  NullTable table;
  bool from_cache = false;
  std::string cache_path;
  if (!options.cache_dir.empty()) {
    std::filesystem::create_directories(options.cache_dir);
    cache_path = options.cache_dir + "/" + table_key;
    if (std::filesystem::exists(cache_path)) {
      table = read_null_table(cache_path);
      from_cache = table.model == model_descriptor(table_model) &&
                   table.reps == options.reps && table.seed == options.seed &&
                   table.statistic_name == statistic_name(options.statistic);
    }
  }
  if (!from_cache) {
    table = mc_null_table(options.statistic, table_model, options.reps,
                          options.seed, options.threads);
    if (!cache_path.empty()) write_null_table(table, cache_path);
  }

  report.p_value = p_value_from_table(table, report.statistic_value);
  return report;
}

// ---------------------------------------------------------------------------
// Two-sample comparison

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    // Dual (Jacobi theta) series, accurate for small arguments.
    double cdf = 0.0;
    const double factor = std::sqrt(2.0 * M_PI) / lambda;
    for (int k = 1; k <= 100; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term =
          std::exp(-odd * odd * M_PI * M_PI / (8.0 * lambda * lambda));
      cdf += term;
      if (term < 1e-18) break;
    }
    return std::clamp(1.0 - factor * cdf, 0.0, 1.0);
  }
  double tail = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    tail += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(tail, 0.0, 1.0);
}

TwoSampleKsResult two_sample_ks(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::ConfigError,
          "two_sample_ks needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double distance = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    distance = std::max(distance, std::abs(i / na - j / nb));
  }
  TwoSampleKsResult result;
  result.distance = distance;
  const double effective = std::sqrt(na * nb / (na + nb));
  result.p_value = kolmogorov_tail(effective * distance);
  return result;
}

double ks_uniform_distance(std::vector<double> values) {
  require(!values.empty(), ErrorCode::ConfigError, "empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double distance = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double low = values[i] - static_cast<double>(i) / n;
    const double high = static_cast<double>(i + 1) / n - values[i];
    distance = std::max({distance, low, high});
  }
  return distance;
}

}  // namespace kgof
