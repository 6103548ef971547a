#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "walklearn/engine.hpp"

namespace walklearn {

/// Where sweep partitions come from: an IDX pool split into train/test.
struct PoolSpec {
  std::string images;
  std::string labels;
  double test_fraction = 0.2;
  std::size_t nodes = 100;
};

struct ExperimentSpec {
  RunConfig base;
  std::vector<WalkerKind> walkers;
  std::vector<int> similarities;       // swept only together with a pool
  std::vector<double> connectivities;  // Erdos-Renyi p; empty keeps base.graph
  std::vector<std::uint64_t> seeds;
  std::optional<PoolSpec> pool;
  std::string output_dir;
  std::size_t jobs = 1;
};

/// Throws ConfigError naming the offending field.
void validate(const ExperimentSpec& spec);
ExperimentSpec experiment_from_json(const nlohmann::json& doc);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct SweepCell {
  WalkerKind walker = WalkerKind::exp3;
  std::optional<int> similarity;
  std::optional<double> connectivity;
  std::uint64_t seed = 0;
};

struct CellResult {
  SweepCell cell;
  std::optional<std::size_t> rounds_to_target;
  double final_accuracy = 0.0;
  std::size_t rounds_run = 0;
  std::string error;  // empty on success
};

/// Cross product in the order similarity, connectivity, seed, walker.
std::vector<SweepCell> expand(const ExperimentSpec& spec);

/// Config for one cell: seed, graph and walker overridden from the axes.
RunConfig cell_config(const ExperimentSpec& spec, const SweepCell& cell);

/// Runs every cell. Cells that share (similarity, connectivity, seed) share
/// one graph and partition; those groups run concurrently on `spec.jobs`
/// threads. `pool` must hold the IDX points when spec.pool is set.
std::vector<CellResult> run_sweep(const ExperimentSpec& spec, std::span<const LabeledPoint> pool);

struct AggregateRow {
  WalkerKind walker = WalkerKind::exp3;
  std::optional<int> similarity;
  std::optional<double> connectivity;
  std::optional<double> median_rounds;  // unset when the median run missed the target
  std::size_t reached = 0;
  std::size_t runs = 0;
};

/// Median rounds-to-target per (walker, similarity, connectivity); runs that
/// never reach the target count as +infinity.
std::vector<AggregateRow> aggregate(std::span<const CellResult> results);

void write_results_csv(std::span<const CellResult> results, const std::filesystem::path& path);
void write_aggregate_csv(std::span<const AggregateRow> rows, const std::filesystem::path& path);

/// Resolves a dataset path: as given when absolute or existing, otherwise
/// under $WALKLEARN_DATA_DIR when that is set.
std::filesystem::path resolve_data_path(const std::string& path);

}  // namespace walklearn
