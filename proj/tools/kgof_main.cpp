// Command-line surface: run tests on CSV data, generate null tables,
// simulate process paths, and run the verification suite.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kgof/csv.hpp"
#include "kgof/discretize.hpp"
#include "kgof/errors.hpp"
#include "kgof/family.hpp"
#include "kgof/gof.hpp"
#include "kgof/kt1.hpp"
#include "kgof/operators.hpp"
#include "kgof/orthonormal.hpp"
#include "kgof/processes.hpp"
#include "kgof/scores.hpp"
#include "kgof/verify.hpp"

namespace {

using json = nlohmann::json;
using kgof::Vec;

Vec parse_params(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (token.empty()) continue;
    values.push_back(std::stod(token));
  }
  Vec result(static_cast<int>(values.size()));
  for (int j = 0; j < result.size(); ++j) result[j] = values[j];
  return result;
}

std::string default_params(const std::string& family) {
  if (family == "exponential") return "1";
  return "0,1";
}

kgof::GridSpec grid_spec_from_json(const json& doc) {
  kgof::GridSpec spec;
  const std::string scheme = doc.at("scheme").get<std::string>();
  if (scheme == "equiprobable") {
    spec.scheme = kgof::GridSpec::Scheme::Equiprobable;
    spec.cells = doc.at("cells").get<int>();
  } else if (scheme == "edges") {
    spec.scheme = kgof::GridSpec::Scheme::Edges;
    const auto& edges = doc.at("edges");
    spec.edges = Vec(static_cast<int>(edges.size()));
    for (int j = 0; j < spec.edges.size(); ++j) {
      spec.edges[j] = edges[j].get<double>();
    }
    spec.cells = static_cast<int>(spec.edges.size());
  } else {
    kgof::fail(kgof::ErrorCode::ConfigError, "unknown grid scheme: " + scheme);
  }
  return spec;
}

kgof::NullModel model_from_json(const std::string& text) {
  const json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  kgof::require(!doc.is_discarded(), kgof::ErrorCode::ConfigError,
                "--model is not valid JSON");
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "target") {
    kgof::GaussianTargetModel model;
    model.target.cells = doc.at("cells").get<int>();
    model.target.param_dim = doc.value("k", 0);
    return model;
  }
  if (kind == "family") {
    kgof::FamilyPipelineModel model;
    model.family_name = doc.at("family").get<std::string>();
    const auto& params = doc.at("params");
    model.params = Vec(static_cast<int>(params.size()));
    for (int j = 0; j < model.params.size(); ++j) {
      model.params[j] = params[j].get<double>();
    }
    model.n = doc.at("n").get<long long>();
    model.grid = grid_spec_from_json(doc.at("grid"));
    model.estimate = doc.value("estimate", true);
    model.target.cells = doc.at("target").at("cells").get<int>();
    model.target.param_dim = doc.at("target").value("k", 0);
    return model;
  }
  kgof::fail(kgof::ErrorCode::ConfigError, "unknown model kind: " + kind);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp);
    kgof::require(out.good(), kgof::ErrorCode::IoError, "cannot open " + temp);
    out << content;
    kgof::require(out.good(), kgof::ErrorCode::IoError, "write failed for " + temp);
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  kgof::require(!ec, kgof::ErrorCode::IoError, "rename failed: " + ec.message());
}

std::string format_full(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

struct TestArgs {
  std::string data;
  std::string family;
  std::string params;
  int cells = 10;
  std::string edges;
  std::string grid_json;
  std::string statistic = "ks";
  long long reps = 5000;
  std::uint64_t seed = 1;
  std::string out = "report.json";
  bool fix_params = false;
  int threads = 0;
};

int run_test_command(const TestArgs& args) {
  const std::string params_text =
      args.params.empty() ? default_params(args.family) : args.params;
  const Vec params = parse_params(params_text);
  kgof::ParametricFamily family = kgof::family_by_name(args.family, params);
  Vec theta_ref = kgof::family_reference_theta(args.family, params);
  if (args.fix_params) {
    family = kgof::fix_family(family, theta_ref);
    theta_ref = Vec();
  }

  kgof::GridSpec grid_spec;
  if (!args.grid_json.empty()) {
    const json doc = json::parse(args.grid_json, nullptr, false);
    kgof::require(!doc.is_discarded(), kgof::ErrorCode::ConfigError,
                  "--grid is not valid JSON");
    grid_spec = grid_spec_from_json(doc);
  } else if (!args.edges.empty()) {
    grid_spec.scheme = kgof::GridSpec::Scheme::Edges;
    grid_spec.edges = parse_params(args.edges);
    grid_spec.cells = static_cast<int>(grid_spec.edges.size());
  } else {
    grid_spec.cells = args.cells;
  }

  const std::vector<double> sample = kgof::read_samples(args.data);

  kgof::RunOptions options;
  options.statistic = kgof::statistic_by_name(args.statistic);
  options.reps = args.reps;
  options.seed = args.seed;
  options.threads = args.threads;
  const char* cache_env = std::getenv("GOF_CACHE_DIR");
  options.cache_dir = cache_env != nullptr ? cache_env : ".gof-cache";

  const kgof::TestReport report =
      kgof::run_test(sample, family, theta_ref, grid_spec, options);
  const std::string body = kgof::report_to_json(report);
  write_text_atomic(args.out, body);
  std::cout << body;
  return 0;
}

struct TableArgs {
  std::string statistic = "ks";
  int cells = 10;
  int k = 0;
  std::string model_json;
  long long reps = 5000;
  std::uint64_t seed = 0;
  std::string out = "table.nulltab";
  int threads = 0;
};

int run_table_command(const TableArgs& args) {
  kgof::NullModel model = kgof::GaussianTargetModel{{args.cells, args.k}};
  if (!args.model_json.empty()) model = model_from_json(args.model_json);
  const kgof::NullTable table =
      kgof::mc_null_table(kgof::statistic_by_name(args.statistic), model,
                          args.reps, args.seed, args.threads);
  kgof::write_null_table(table, args.out);
  std::cerr << "wrote " << table.values.size() << " values to " << args.out << "\n";
  return 0;
}

struct SimulateArgs {
  std::string process = "bridge";
  std::string family = "uniform";
  std::string params;
  int cells = 10;
  int k = 0;
  long long n = 1000;
  long long reps = 100;
  std::uint64_t seed = 1;
  std::string out = "paths.csv";
  std::string kt1_predictor = "centered";
  int kt1_cutoff = 0;
};

int run_simulate_command(const SimulateArgs& args) {
  const std::string params_text =
      args.params.empty() ? default_params(args.family) : args.params;
  const Vec params = parse_params(params_text);
  const kgof::ParametricFamily family = kgof::family_by_name(args.family, params);
  const Vec theta = kgof::family_reference_theta(args.family, params);
  const kgof::DiscreteDistribution dist = kgof::build_equiprobable_grid(
      family, theta, args.cells, family.support_floor(theta));

  std::ostringstream out;
  out << "cell_index,time,path_value,replicate\n";
  auto emit = [&out](const Vec& path, const kgof::DiscreteDistribution& scale,
                     long long rep) {
    for (int j = 0; j < path.size(); ++j) {
      out << j + 1 << "," << format_full(scale.atoms[j]) << ","
          << format_full(path[j]) << "," << rep << "\n";
    }
  };

  if (args.process == "bm" || args.process == "bridge" ||
      args.process == "projected") {
    int k = args.k;
    if (args.process == "bridge") k = 0;
    const kgof::ScoreSet scores = kgof::synthetic_score_set(dist, k);
    const kgof::LinearOperator projection = kgof::big_pi(dist.probs, scores);
    for (long long rep = 0; rep < args.reps; ++rep) {
      kgof::ProcessIncrements increments =
          kgof::simulate_bm_increments(dist, args.seed, rep);
      if (args.process != "bm") {
        increments = kgof::project_increments(increments, projection);
      }
      emit(kgof::cumulative_path(increments), dist, rep);
    }
  } else if (args.process == "kt1") {
    kgof::require(family.param_dim == 1, kgof::ErrorCode::ConfigError,
                  "kt1 simulation needs a one-parameter family");
    const kgof::Kt1Predictor predictor =
        args.kt1_predictor == "uncentered" ? kgof::Kt1Predictor::Uncentered
                                           : kgof::Kt1Predictor::Centered;
    for (long long rep = 0; rep < args.reps; ++rep) {
      kgof::RandomStream stream(args.seed, static_cast<std::uint64_t>(rep));
      std::vector<double> sample(static_cast<std::size_t>(args.n));
      for (double& x : sample) x = family.quantile(theta, stream.next_uniform());
      const kgof::CellCounts counts = kgof::counts_from_sample(sample, dist);
      const Vec theta_hat = kgof::mle_discrete(counts, family, theta, dist);
      const kgof::Kt1State state = kgof::build_kt1_state(family, theta_hat, dist);
      const int cutoff = args.kt1_cutoff > 0
                             ? args.kt1_cutoff
                             : kgof::default_cutoff(state, counts.sample_size);
      const kgof::ProcessIncrements innovations = kgof::kt1_innovations(
          counts, family, theta_hat, dist, cutoff, predictor);
      emit(kgof::accumulate(innovations.values), dist, rep);
    }
  } else {
    kgof::fail(kgof::ErrorCode::ConfigError,
               "unknown process: " + args.process);
  }
  write_text_atomic(args.out, out.str());
  std::cerr << "wrote " << args.reps << " paths to " << args.out << "\n";
  return 0;
}

struct VerifyArgs {
  std::string out = "verify.json";
  std::uint64_t seed = 20250801;
  int threads = 0;
  double op_tolerance = 1e-10;
};

int run_verify_command(const VerifyArgs& args) {
  kgof::VerifyOptions options;
  options.seed = args.seed;
  options.threads = args.threads;
  options.operator_tolerance = args.op_tolerance;
  const std::vector<kgof::CheckResult> results = kgof::run_verification(options);
  const std::string summary = kgof::verification_summary_json(results);
  write_text_atomic(args.out, summary);
  bool all_pass = true;
  for (const kgof::CheckResult& result : results) {
    std::cout << (result.pass ? "PASS " : "FAIL ") << result.name << " ("
              << result.detail << ")\n";
    all_pass = all_pass && result.pass;
  }
  std::cout << (all_pass ? "verification passed" : "verification FAILED") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-free goodness-of-fit tests on discretized distributions"};
  app.require_subcommand(1);

  TestArgs test_args;
  CLI::App* test = app.add_subcommand("test", "test CSV data against a family");
  test->add_option("--data", test_args.data, "CSV file, one value per line")
      ->required();
  test->add_option("--family", test_args.family,
                   "exponential | normal-mean | normal | uniform")
      ->required();
  test->add_option("--params", test_args.params,
                   "comma-separated family parameters (reference values)");
  test->add_option("--cells", test_args.cells, "equiprobable cell count")
      ->check(CLI::Range(2, 100000));
  test->add_option("--edges", test_args.edges, "comma-separated grid edges");
  test->add_option("--grid", test_args.grid_json, "grid spec as JSON");
  test->add_option("--statistic", test_args.statistic, "ks | cvm | chisq");
  test->add_option("--reps", test_args.reps, "null-table replicates")
      ->check(CLI::Range(1000LL, 100000000LL));
  test->add_option("--seed", test_args.seed, "seed for the null table");
  test->add_option("--out", test_args.out, "report path (JSON)");
  test->add_flag("--fix-params", test_args.fix_params,
                 "treat the family as fully specified (no estimation)");
  test->add_option("--threads", test_args.threads, "0 = all cores, 1 = serial");

  TableArgs table_args;
  CLI::App* table = app.add_subcommand("table", "generate a null table");
  table->add_option("--statistic", table_args.statistic, "ks | cvm | chisq");
  table->add_option("--cells", table_args.cells, "target cell count")
      ->check(CLI::Range(2, 100000));
  table->add_option("--k", table_args.k, "synthetic target score directions")
      ->check(CLI::Range(0, 64));
  table->add_option("--model", table_args.model_json, "full model spec as JSON");
  table->add_option("--reps", table_args.reps, "replicates")
      ->check(CLI::Range(1000LL, 100000000LL));
  table->add_option("--seed", table_args.seed, "seed")->required();
  table->add_option("--out", table_args.out, "output path");
  table->add_option("--threads", table_args.threads, "0 = all cores, 1 = serial");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "write simulated process paths");
  simulate->add_option("--process", sim_args.process,
                       "bm | bridge | projected | kt1");
  simulate->add_option("--family", sim_args.family, "family for the time scale");
  simulate->add_option("--params", sim_args.params, "family parameters");
  simulate->add_option("--cells", sim_args.cells, "cell count")
      ->check(CLI::Range(2, 100000));
  simulate->add_option("--k", sim_args.k, "projected score directions");
  simulate->add_option("--n", sim_args.n, "sample size per replicate (kt1)");
  simulate->add_option("--reps", sim_args.reps, "number of paths");
  simulate->add_option("--seed", sim_args.seed, "seed");
  simulate->add_option("--out", sim_args.out, "output CSV path");
  simulate->add_option("--kt1-predictor", sim_args.kt1_predictor,
                       "centered | uncentered");
  simulate->add_option("--kt1-cutoff", sim_args.kt1_cutoff,
                       "last usable cell (0 = automatic)");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "run all module invariant checks");
  verify->add_option("--out", verify_args.out, "summary path (JSON)");
  verify->add_option("--seed", verify_args.seed, "seed");
  verify->add_option("--threads", verify_args.threads, "0 = all cores, 1 = serial");
  verify->add_option("--op-tolerance", verify_args.op_tolerance,
                     "max-norm bound for operator identities");

  CLI11_PARSE(app, argc, argv);

  try {
    if (test->parsed()) return run_test_command(test_args);
    if (table->parsed()) return run_table_command(table_args);
    if (simulate->parsed()) return run_simulate_command(sim_args);
    if (verify->parsed()) return run_verify_command(verify_args);
  } catch (const kgof::Error& error) {
    json message;
    message["error"] = kgof::error_code_name(error.code());
    message["message"] = error.what();
    std::cout << message.dump(2) << "\n";
    if (error.code() == kgof::ErrorCode::IoError) return 2;
    if (error.code() == kgof::ErrorCode::ConfigError) return 1;
    return 3;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
