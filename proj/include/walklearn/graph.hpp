#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace walklearn {

using NodeId = std::uint32_t;

enum class GraphKind { margulis, erdos_renyi, complete, cycle, custom };

std::string_view to_string(GraphKind kind);
GraphKind graph_kind_from_string(std::string_view name);

// Undirected graph stored as sorted adjacency lists. Every node carries a
// self-loop, lists are duplicate-free, and the graph is connected. These are
// checked once in the constructor; a Graph is immutable afterwards.
class Graph {
 public:
  /// Builds from an undirected edge list. Self-loops are added for every
  /// node, duplicates and reversed pairs are collapsed. Throws
  /// InvalidParameter on out-of-range endpoints or a disconnected result.
  Graph(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges,
        GraphKind kind = GraphKind::custom, std::uint64_t seed = 0);

  std::size_t num_nodes() const { return adjacency_.size(); }
  GraphKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  /// Sorted neighbor ids of `node`, the node itself included.
  std::span<const NodeId> neighbors(NodeId node) const { return adjacency_[node]; }

  /// Number of neighbors other than the node itself.
  std::size_t degree(NodeId node) const { return adjacency_[node].size() - 1; }

  bool has_edge(NodeId a, NodeId b) const;

  /// Position of `node` inside neighbors(center), or npos.
  std::size_t neighbor_index(NodeId center, NodeId node) const;

  /// Undirected edges (a < b), self-loops omitted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.adjacency_ == b.adjacency_;
  }

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  GraphKind kind_;
  std::uint64_t seed_;
};

bool is_connected(std::size_t num_nodes, const std::vector<std::vector<NodeId>>& adjacency);

/// Margulis-Gabber-Galil expander on Z_n x Z_n, node (x, y) -> x*n + y.
Graph build_margulis(std::size_t n);

/// G(N, p) with a seeded stream. A disconnected sample is redrawn with seed+1,
/// seed+2, ... up to `max_attempts` draws before ConstructionError.
Graph build_erdos_renyi(std::size_t num_nodes, double p, std::uint64_t seed,
                        int max_attempts = 100);

Graph build_complete(std::size_t num_nodes);
Graph build_cycle(std::size_t num_nodes);

/// Row-major dense matrix, the representation used for transition matrices.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Second-largest eigenvalue modulus of a row-stochastic matrix supported on
/// the edges of `g`. Limited to N <= 2000 (dense eigensolve).
double spectral_diagnostic(const Graph& g, const DenseMatrix& transition);

/// Edge-list text format: first line N, then "i j" per edge; self-loops are
/// implicit.
void save_edge_list(const Graph& g, const std::filesystem::path& path);
Graph load_edge_list(const std::filesystem::path& path);

}  // namespace walklearn
