#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace walklearn {

// Binary tasks store labels as {1, 0}; the loss maps them to {+1, -1}.
// Multiclass labels are 0..K-1.
struct LabeledPoint {
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

struct NodeDataset {
  std::uint32_t node_id = 0;
  std::vector<LabeledPoint> points;

  friend bool operator==(const NodeDataset&, const NodeDataset&) = default;
};

enum class DataSource { synthetic, idx_files };

std::string_view to_string(DataSource source);
DataSource data_source_from_string(std::string_view name);

struct PartitionMeta {
  DataSource source = DataSource::synthetic;
  int similarity_pct = 0;
  std::uint64_t seed = 0;
  std::size_t dim = 0;          // d, bias feature included
  std::size_t num_classes = 0;  // K
  std::size_t local_size = 0;   // n

  friend bool operator==(const PartitionMeta&, const PartitionMeta&) = default;
};

struct Partition {
  std::vector<NodeDataset> nodes;
  PartitionMeta meta;

  std::size_t num_nodes() const { return nodes.size(); }

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Checks the partition invariants (equal n, shared d, labels in range).
/// Throws InvalidParameter naming the first offending node.
void validate(const Partition& partition);

struct SyntheticParams {
  std::size_t num_nodes = 100;
  std::size_t local_size = 20;
  double sigma = 1.0;
  double mean_range = 5.0;  // node means drawn from [-R, R]^2
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Partition train;
  std::vector<LabeledPoint> test;
};

/// Two-feature Gaussian blobs, one per node, with a bias feature appended
/// (d = 3). Nodes [0, N/2) carry label +1, the rest -1. The held-out set
/// draws ceil(n/4) extra points per node from the same blobs.
SyntheticData gen_synthetic_gaussian(const SyntheticParams& params);

struct PoolSplit {
  std::vector<LabeledPoint> train;
  std::vector<LabeledPoint> test;
};

/// Seeded shuffle, then the first round(test_fraction * |pool|) points form
/// the held-out split.
PoolSplit split_pool(std::vector<LabeledPoint> pool, double test_fraction, std::uint64_t seed);

/// s% of each node's n points come i.i.d. from a shared sub-pool, the rest
/// from label-sorted, non-overlapping chunks. n = floor(|pool| / N).
Partition partition_by_similarity(std::span<const LabeledPoint> pool, std::size_t num_nodes,
                                  int similarity_pct, std::uint64_t seed);

/// Number of points node datasets draw from the shared sub-pool.
std::size_t shared_points_per_node(std::size_t local_size, int similarity_pct);

/// Reads IDX image/label files (MNIST layout). Pixels are scaled by 1/255
/// and a constant bias feature 1.0 is appended.
std::vector<LabeledPoint> load_idx(const std::filesystem::path& images_path,
                                   const std::filesystem::path& labels_path);

/// Partition JSON: header fields plus "nodes": [[[x..., label], ...], ...].
void save_partition(const Partition& partition, const std::filesystem::path& path);
Partition load_partition(const std::filesystem::path& path);

/// Held-out split JSON: {"d", "K", "points": [[x..., label], ...]}.
void save_points(std::span<const LabeledPoint> points, std::size_t num_classes,
                 const std::filesystem::path& path);
std::vector<LabeledPoint> load_points(const std::filesystem::path& path);

/// Per-label counts over a set of points.
std::vector<std::size_t> label_histogram(std::span<const LabeledPoint> points,
                                         std::size_t num_classes);

}  // namespace walklearn
