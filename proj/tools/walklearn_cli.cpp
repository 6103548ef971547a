// walklearn: prepare partitions, run random-walk SGD, sweep experiments and
// compute regret series from completed runs.
//
// Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "walklearn/config.hpp"
#include "walklearn/data.hpp"
#include "walklearn/engine.hpp"
#include "walklearn/error.hpp"
#include "walklearn/oracle.hpp"
#include "walklearn/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace walklearn;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

void emit(const json& line) { std::cout << line.dump() << '\n'; }

// ---------------------------------------------------------------------------

struct PrepareArgs {
  std::string source = "synthetic";
  std::string images;
  std::string labels;
  std::size_t nodes = 100;
  int similarity = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t local_n = 20;
  double sigma = 1.0;
  double mean_range = 5.0;
  double test_fraction = 0.2;
};

int cmd_prepare(const PrepareArgs& a) {
  if (a.source == "idx" && (a.images.empty() || a.labels.empty())) {
    throw UsageError("--source idx needs both --images and --labels");
  }
  const fs::path out(a.out);
  ensure_dir(out);
  Partition partition;
  std::vector<LabeledPoint> test;
  if (a.source == "synthetic") {
    auto data = gen_synthetic_gaussian(
        SyntheticParams{a.nodes, a.local_n, a.sigma, a.mean_range, a.seed});
    partition = std::move(data.train);
    test = std::move(data.test);
  } else {
    auto pool = load_idx(resolve_data_path(a.images), resolve_data_path(a.labels));
    auto split = split_pool(std::move(pool), a.test_fraction, a.seed);
    partition = partition_by_similarity(split.train, a.nodes, a.similarity, a.seed);
    test = std::move(split.test);
  }
  save_partition(partition, out / "partition.json");
  save_points(test, partition.meta.num_classes, out / "test.json");
  emit({{"partition", (out / "partition.json").string()},
        {"test", (out / "test.json").string()},
        {"N", partition.num_nodes()},
        {"n", partition.meta.local_size},
        {"d", partition.meta.dim},
        {"K", partition.meta.num_classes},
        {"test_points", test.size()}});
  return kOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::string> partition, test, graph, graph_file, walker, model;
  std::optional<std::size_t> graph_nodes, graph_side, horizon, eval_every;
  std::optional<double> graph_p, step_scale, step_exponent, radius, target;
  std::optional<std::uint64_t> graph_seed, seed;
  bool exact_costs = false;
  bool stop_at_target = false;
  bool pretty = false;
  bool gnuplot = false;
};

RunConfig assemble_config(const RunArgs& a) {
  json doc = json::object();
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw ConfigError("config: cannot open " + a.config);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  // Inline flags override the file.
  auto& graph = doc["graph"];
  if (graph.is_null()) graph = json::object();
  if (a.graph) graph["kind"] = *a.graph;
  if (a.graph_file) {
    graph["kind"] = "custom";
    graph["path"] = *a.graph_file;
  }
  if (a.graph_nodes) graph["nodes"] = *a.graph_nodes;
  if (a.graph_side) graph["side"] = *a.graph_side;
  if (a.graph_p) graph["p"] = *a.graph_p;
  if (a.graph_seed) graph["seed"] = *a.graph_seed;
  auto& data = doc["data"];
  if (data.is_null()) data = json::object();
  if (a.partition) data["partition"] = *a.partition;
  if (a.test) data["test"] = *a.test;
  auto& walker = doc["walker"];
  if (walker.is_null()) walker = json::object();
  if (a.walker) walker["kind"] = *a.walker;
  if (a.model) doc["model"] = *a.model;
  if (a.horizon) doc["horizon"] = *a.horizon;
  if (a.eval_every) doc["eval_every"] = *a.eval_every;
  if (a.step_scale) doc["step_scale"] = *a.step_scale;
  if (a.step_exponent) doc["step_exponent"] = *a.step_exponent;
  if (a.radius) doc["radius"] = *a.radius;
  if (a.target) doc["target_accuracy"] = *a.target;
  if (a.seed) doc["seed"] = *a.seed;
  if (a.exact_costs) doc["exact_cost_metrics"] = true;
  if (a.stop_at_target) doc["stop_at_target"] = true;
  RunConfig cfg = run_config_from_json(doc);
  if (!cfg.data.partition_path.empty()) {
    cfg.data.partition_path = resolve_data_path(cfg.data.partition_path).string();
  }
  if (!cfg.data.test_path.empty()) cfg.data.test_path = resolve_data_path(cfg.data.test_path).string();
  return cfg;
}

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

void write_gnuplot(const fs::path& path, const std::string& csv, const std::string& x,
                   const std::string& y, const std::string& title) {
  std::ofstream out(path);
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set title '" << title << "'\n"
      << "set xlabel '" << x << "'\n"
      << "set ylabel '" << y << "'\n"
      << "plot '" << csv << "' using '" << x << "':'" << y << "' with lines\n";
}

int cmd_run(const RunArgs& a) {
  const RunConfig cfg = assemble_config(a);
  const fs::path out(a.out);
  ensure_dir(out);
  const auto inputs = load_inputs(cfg);

  const auto start = std::chrono::steady_clock::now();
  const auto result = run(cfg, inputs);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_trace_csv(result, out / "trace.csv");
  save_edge_list(inputs.graph, out / "graph.txt");

  json summary;
  summary["config"] = to_json(cfg);
  summary["rounds_to_target"] = optional_json(result.rounds_to_target);
  summary["final_accuracy"] = result.final_accuracy;
  summary["final_loss"] = result.final_loss;
  summary["rounds_run"] = result.rounds_run;
  summary["projections"] = result.projections;
  summary["runtime_seconds"] = seconds;
  summary["spectral_diagnostic"] =
      result.spectral_diagnostic ? json(*result.spectral_diagnostic) : json(nullptr);
  if (cfg.exact_cost_metrics) {
    write_cost_profiles(result, out / "costs.csv");
    double walker_cost = 0.0;
    for (std::size_t t = 0; t < result.profiles.size(); ++t) {
      walker_cost += result.profiles[t].costs[result.profiled_steps[t].chosen];
    }
    const auto per_round = sleeping_regret(inputs.graph, result.profiled_steps, result.profiles,
                                           RegretMode::per_round_available_min);
    const auto fixed = sleeping_regret(inputs.graph, result.profiled_steps, result.profiles,
                                       RegretMode::best_fixed_node);
    summary["oracle"] = {
        {"profiled_rounds", result.profiles.size()},
        {"walker_exact_cost", walker_cost},
        {"oracle_cumulative_cost", oracle_cumulative_cost(result.profiles)},
        {"uniform_cumulative_cost", uniform_cumulative_cost(result.profiles)},
        {"regret_per_round_available_min", per_round.empty() ? 0.0 : per_round.back()},
        {"regret_best_fixed_node", fixed.empty() ? 0.0 : fixed.back()}};
  }
  {
    std::ofstream s(out / "summary.json");
    s << summary.dump(2) << '\n';
    if (!s) throw Error("write failed for summary.json");
  }
  if (a.gnuplot) {
    write_gnuplot(out / "accuracy.gp", (out / "trace.csv").string(), "k", "accuracy",
                  std::string(to_string(cfg.walker.kind)));
  }

  if (a.pretty) {
    std::printf("walker            %s\n", std::string(to_string(cfg.walker.kind)).c_str());
    std::printf("rounds run        %zu\n", result.rounds_run);
    if (result.rounds_to_target) {
      std::printf("rounds to target  %zu\n", *result.rounds_to_target);
    } else {
      std::printf("rounds to target  (not reached)\n");
    }
    std::printf("final accuracy    %.4f\n", result.final_accuracy);
  } else {
    emit({{"rounds_to_target", optional_json(result.rounds_to_target)},
          {"final_accuracy", result.final_accuracy}});
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string spec;
  std::optional<std::size_t> jobs;
  std::optional<std::string> output_dir;
  bool pretty = false;
  bool gnuplot = false;
};

int cmd_sweep(const SweepArgs& a) {
  ExperimentSpec spec = load_experiment(a.spec);
  if (a.jobs) spec.jobs = *a.jobs;
  if (a.output_dir) spec.output_dir = *a.output_dir;
  validate(spec);
  const fs::path out(spec.output_dir);
  ensure_dir(out);

  std::vector<LabeledPoint> pool;
  if (spec.pool) pool = load_idx(resolve_data_path(spec.pool->images), resolve_data_path(spec.pool->labels));
  const auto results = run_sweep(spec, pool);
  const auto rows = aggregate(results);
  write_results_csv(results, out / "results.csv");
  write_aggregate_csv(rows, out / "aggregate.csv");
  if (a.gnuplot) {
    write_gnuplot(out / "aggregate.gp", (out / "aggregate.csv").string(), "similarity",
                  "median_rounds_to_target", "median rounds to target");
  }

  std::size_t failures = 0;
  for (const auto& r : results) {
    if (!r.error.empty()) {
      ++failures;
      std::cerr << "cell " << to_string(r.cell.walker) << " seed " << r.cell.seed
                << " failed: " << r.error << '\n';
    }
  }
  for (const auto& row : rows) {
    if (a.pretty) {
      std::printf("%-9s sim=%-4s p=%-6s median=%-8s reached=%zu/%zu\n",
                  std::string(to_string(row.walker)).c_str(),
                  row.similarity ? std::to_string(*row.similarity).c_str() : "-",
                  row.connectivity ? std::to_string(*row.connectivity).substr(0, 5).c_str() : "-",
                  row.median_rounds ? std::to_string(*row.median_rounds).c_str() : "-",
                  row.reached, row.runs);
    } else {
      emit({{"walker", to_string(row.walker)},
            {"similarity", row.similarity ? json(*row.similarity) : json(nullptr)},
            {"connectivity", row.connectivity ? json(*row.connectivity) : json(nullptr)},
            {"median_rounds_to_target", row.median_rounds ? json(*row.median_rounds) : json(nullptr)},
            {"reached", row.reached},
            {"runs", row.runs}});
    }
  }
  return failures == 0 ? kOk : kFailure;
}

// ---------------------------------------------------------------------------

struct RegretArgs {
  std::string run_dir;
  std::string out;
};

int cmd_regret(const RegretArgs& a) {
  const fs::path dir(a.run_dir);
  const fs::path costs = dir / "costs.csv";
  if (!fs::exists(costs)) {
    throw Error("run directory " + dir.string() +
                " has no cost profiles (costs.csv); rerun with exact_cost_metrics enabled");
  }
  const Graph graph = load_edge_list(dir / "graph.txt");
  const auto walk = read_cost_profiles(costs);
  const auto per_round =
      sleeping_regret(graph, walk.steps, walk.profiles, RegretMode::per_round_available_min);
  const auto fixed = sleeping_regret(graph, walk.steps, walk.profiles, RegretMode::best_fixed_node);

  const fs::path out = a.out.empty() ? dir / "regret.csv" : fs::path(a.out);
  std::ofstream csv(out);
  if (!csv) throw Error("cannot open " + out.string() + " for writing");
  csv << "k,regret_available_min,rate_available_min,regret_best_fixed,rate_best_fixed\n";
  for (std::size_t t = 0; t < walk.steps.size(); ++t) {
    const double k = static_cast<double>(walk.steps[t].round);
    char line[160];
    std::snprintf(line, sizeof line, "%zu,%.10g,%.10g,%.10g,%.10g\n", walk.steps[t].round,
                  per_round[t], per_round[t] / k, fixed[t], fixed[t] / k);
    csv << line;
  }
  if (!csv) throw Error("write failed for " + out.string());
  emit({{"regret_csv", out.string()},
        {"rounds", walk.steps.size()},
        {"final_regret_available_min", per_round.empty() ? 0.0 : per_round.back()},
        {"final_regret_best_fixed", fixed.empty() ? 0.0 : fixed.back()}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-walk SGD with sleeping-bandit node sampling"};
  app.require_subcommand(1);

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare", "Build a node partition and held-out split");
  prepare->add_option("--source", prep.source, "synthetic or idx")
      ->check(CLI::IsMember({"synthetic", "idx"}));
  prepare->add_option("--images", prep.images, "IDX image file");
  prepare->add_option("--labels", prep.labels, "IDX label file");
  prepare->add_option("--nodes", prep.nodes, "number of nodes N");
  prepare->add_option("--similarity", prep.similarity, "similarity level s in 0..100")
      ->check(CLI::Range(0, 100));
  prepare->add_option("--seed", prep.seed);
  prepare->add_option("--out", prep.out, "output directory")->required();
  prepare->add_option("--local-n", prep.local_n, "points per node (synthetic)");
  prepare->add_option("--sigma", prep.sigma, "blob standard deviation (synthetic)");
  prepare->add_option("--mean-range", prep.mean_range, "node means in [-R, R]^2 (synthetic)");
  prepare->add_option("--test-fraction", prep.test_fraction, "held-out fraction (idx)");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run one random-walk SGD experiment");
  run_cmd->add_option("--config", ra.config, "JSON run config");
  run_cmd->add_option("--out", ra.out, "output directory")->required();
  run_cmd->add_option("--walker", ra.walker)->check(
      CLI::IsMember({"exp3", "uniform", "weighted", "exploit"}));
  run_cmd->add_option("--model", ra.model);
  run_cmd->add_option("--partition", ra.partition);
  run_cmd->add_option("--test", ra.test);
  run_cmd->add_option("--graph", ra.graph)->check(
      CLI::IsMember({"margulis", "erdos_renyi", "complete", "cycle"}));
  run_cmd->add_option("--graph-file", ra.graph_file, "edge-list file");
  run_cmd->add_option("--graph-nodes", ra.graph_nodes);
  run_cmd->add_option("--graph-side", ra.graph_side, "margulis side n (N = n^2)");
  run_cmd->add_option("--graph-p", ra.graph_p);
  run_cmd->add_option("--graph-seed", ra.graph_seed);
  run_cmd->add_option("--horizon", ra.horizon);
  run_cmd->add_option("--eval-every", ra.eval_every);
  run_cmd->add_option("--step-scale", ra.step_scale);
  run_cmd->add_option("--step-exponent", ra.step_exponent);
  run_cmd->add_option("--radius", ra.radius);
  run_cmd->add_option("--target", ra.target, "target test accuracy");
  run_cmd->add_option("--seed", ra.seed);
  run_cmd->add_flag("--exact-costs", ra.exact_costs, "record exact per-node costs");
  run_cmd->add_flag("--stop-at-target", ra.stop_at_target);
  run_cmd->add_flag("--pretty", ra.pretty, "human-readable output");
  run_cmd->add_flag("--gnuplot-script", ra.gnuplot, "also write a gnuplot script");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment cross-product");
  sweep->add_option("--spec", sa.spec, "experiment JSON")->required();
  sweep->add_option("--jobs", sa.jobs, "concurrent workers");
  sweep->add_option("--out", sa.output_dir, "override output_dir");
  sweep->add_flag("--pretty", sa.pretty, "human-readable output");
  sweep->add_flag("--gnuplot-script", sa.gnuplot, "also write a gnuplot script");

  RegretArgs rg;
  auto* regret = app.add_subcommand("regret", "Regret series from a run with exact costs");
  regret->add_option("--run-dir", rg.run_dir)->required();
  regret->add_option("--out", rg.out, "output CSV (default <run-dir>/regret.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*prepare) return cmd_prepare(prep);
    if (*run_cmd) return cmd_run(ra);
    if (*sweep) return cmd_sweep(sa);
    if (*regret) return cmd_regret(rg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
