#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "walklearn/data.hpp"
#include "walklearn/graph.hpp"
#include "walklearn/model.hpp"
#include "walklearn/oracle.hpp"
#include "walklearn/walkers.hpp"

namespace walklearn {

struct GraphSpec {
  GraphKind kind = GraphKind::margulis;
  std::size_t nodes = 100;  // N for erdos_renyi / complete / cycle
  std::size_t side = 10;    // n for margulis (N = n^2)
  double p = 0.1;
  std::uint64_t seed = 0;
  std::string path;  // edge-list file for custom graphs
};

Graph build_graph(const GraphSpec& spec);

struct DataSpec {
  /// Partition JSON and held-out split written by `prepare`.
  std::string partition_path;
  std::string test_path;
  /// Used instead of files when set.
  std::optional<SyntheticParams> synthetic;
};

struct WalkerConfig {
  WalkerKind kind = WalkerKind::exp3;
  Exp3Params exp3;
};

struct RunConfig {
  GraphSpec graph;
  DataSpec data;
  std::optional<LossKind> model;  // inferred from K when unset
  WalkerConfig walker;
  double step_exponent = 0.75;  // gamma_k = step_scale / k^step_exponent
  double step_scale = 1.0;
  double radius = 100.0;  // feasible ball radius R_W
  std::size_t horizon = 1000;
  std::uint64_t seed = 0;
  std::size_t eval_every = 10;
  bool exact_cost_metrics = false;
  bool eval_train_loss = true;
  double target_accuracy = 0.45;
  bool stop_at_target = false;
};

/// Throws ConfigError naming the offending field. `require_data` demands a
/// data source; runs handed inputs directly skip that check.
void validate(const RunConfig& cfg, bool require_data = true);

/// gamma_k = scale / k^exponent with exponent in (1/2, 1).
double step_size(std::size_t round, double exponent, double scale);

struct RoundRecord {
  std::size_t round = 0;
  NodeId previous = 0;
  NodeId node = 0;
  double gamma = 0.0;
  double selection_prob = 0.0;
  double cost_estimate = 0.0;
  std::optional<double> cost_exact;
  std::optional<double> loss;
  std::optional<double> accuracy;
  double cumulative_cost = 0.0;
  std::optional<double> cumulative_regret;
  bool projected = false;
  bool evaluated = false;
};

struct SgdStepResult {
  double cost_estimate = 0.0;  // ||grad||^2 / n
  double grad_sq_norm = 0.0;
  std::size_t point_index = 0;
  bool projected = false;
};

/// w <- Proj(w - gamma / p_sel * grad) on the point at `point_index`.
SgdStepResult sgd_step_at(const LossModel& m, ParamVector& w, const NodeDataset& ds,
                          std::size_t point_index, double p_sel, double gamma);

/// Same, with the point drawn uniformly from the node's dataset.
SgdStepResult sgd_step(const LossModel& m, ParamVector& w, const NodeDataset& ds, double p_sel,
                       double gamma, Rng& rng);

/// Probability the walker's current rule assigns to moving previous -> chosen.
double selection_probability(const Walker& walker, const Graph& g, NodeId previous, NodeId chosen);

struct HeterogeneityProbe {
  double mean_local_sq = 0.0;  // (1/N) sum_i ||grad F_i(w)||^2
  double global_sq = 0.0;      // ||grad F(w)||^2
};

HeterogeneityProbe heterogeneity_probe(const LossModel& m, const Partition& partition,
                                       std::span<const double> w);

/// Uniform draw from the L2 ball: Gaussian direction, radius R * U^(1/d).
ParamVector uniform_in_ball(std::size_t dim, double radius, Rng& rng);

struct RunInputs {
  Graph graph;
  Partition partition;
  std::vector<LabeledPoint> test;
};

RunInputs load_inputs(const RunConfig& cfg);

std::unique_ptr<Walker> make_walker(const WalkerConfig& cfg, const Graph& g,
                                    const Partition& partition, const LossModel& m,
                                    std::size_t horizon);

struct RunResult {
  ParamVector final_w;
  ParamVector averaged_w;
  std::vector<RoundRecord> trace;  // every executed round
  std::vector<CostProfile> profiles;
  std::vector<WalkStep> profiled_steps;  // aligned with profiles
  std::optional<std::size_t> rounds_to_target;
  std::size_t rounds_run = 0;
  std::size_t projections = 0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  /// Second eigenvalue modulus of the walker's final transition matrix
  /// (graphs up to 500 nodes).
  std::optional<double> spectral_diagnostic;
};

/// Called after every round with the round index and the updated iterate.
using IterateObserver = std::function<void(std::size_t, std::span<const double>)>;

RunResult run(const RunConfig& cfg, const RunInputs& inputs, const IterateObserver& observer = {});

/// Rows for evaluated rounds plus the final round, 10 significant digits.
void write_trace_csv(const RunResult& result, std::ostream& out);
void write_trace_csv(const RunResult& result, const std::filesystem::path& path);

/// Exact cost profiles: k,prev,node,g_0..g_{N-1} with 17 significant digits.
void write_cost_profiles(const RunResult& result, const std::filesystem::path& path);

struct ProfiledWalk {
  std::vector<WalkStep> steps;
  std::vector<CostProfile> profiles;
};

ProfiledWalk read_cost_profiles(const std::filesystem::path& path);

}  // namespace walklearn
