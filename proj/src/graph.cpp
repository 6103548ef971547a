#include "walklearn/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "walklearn/error.hpp"
#include "walklearn/rng.hpp"

namespace walklearn {

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::margulis: return "margulis";
    case GraphKind::erdos_renyi: return "erdos_renyi";
    case GraphKind::complete: return "complete";
    case GraphKind::cycle: return "cycle";
    case GraphKind::custom: return "custom";
  }
  return "custom";
}

GraphKind graph_kind_from_string(std::string_view name) {
  for (auto kind : {GraphKind::margulis, GraphKind::erdos_renyi, GraphKind::complete,
                    GraphKind::cycle, GraphKind::custom}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidParameter("unknown graph kind '" + std::string(name) + "'");
}

namespace {

std::vector<std::vector<NodeId>> make_adjacency(std::size_t num_nodes,
                                                std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::vector<NodeId>> adjacency(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) adjacency[i].push_back(static_cast<NodeId>(i));
  for (auto [a, b] : edges) {
    if (a >= num_nodes || b >= num_nodes) {
      throw InvalidParameter("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                             ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (a == b) continue;
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  for (auto& list : adjacency) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adjacency;
}

}  // namespace

bool is_connected(std::size_t num_nodes, const std::vector<std::vector<NodeId>>& adjacency) {
  if (num_nodes == 0) return false;
  std::vector<char> seen(num_nodes, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId u : adjacency[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == num_nodes;
}

Graph::Graph(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges,
             GraphKind kind, std::uint64_t seed)
    : adjacency_(make_adjacency(num_nodes, edges)), kind_(kind), seed_(seed) {
  if (num_nodes == 0) throw InvalidParameter("graph needs at least one node");
  if (!is_connected(num_nodes, adjacency_)) {
    throw InvalidParameter("graph with " + std::to_string(num_nodes) + " nodes is not connected");
  }
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  return neighbor_index(a, b) != npos;
}

std::size_t Graph::neighbor_index(NodeId center, NodeId node) const {
  const auto& list = adjacency_[center];
  auto it = std::lower_bound(list.begin(), list.end(), node);
  if (it == list.end() || *it != node) return npos;
  return static_cast<std::size_t>(it - list.begin());
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t a = 0; a < adjacency_.size(); ++a) {
    for (NodeId b : adjacency_[a]) {
      if (a < b) out.emplace_back(static_cast<NodeId>(a), b);
    }
  }
  return out;
}

Graph build_margulis(std::size_t n) {
  if (n < 2) throw InvalidParameter("margulis graph needs n >= 2, got " + std::to_string(n));
  const auto id = [n](std::size_t x, std::size_t y) {
    return static_cast<NodeId>((x % n) * n + (y % n));
  };
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(n * n * 4);
  // Forward generators only; the "-" offsets are the same edges seen from the
  // other endpoint.
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const NodeId self = id(x, y);
      edges.emplace_back(self, id(x + 2 * y, y));
      edges.emplace_back(self, id(x + 2 * y + 1, y));
      edges.emplace_back(self, id(x, y + 2 * x));
      edges.emplace_back(self, id(x, y + 2 * x + 1));
    }
  }
  return Graph(n * n, edges, GraphKind::margulis, 0);
}

Graph build_erdos_renyi(std::size_t num_nodes, double p, std::uint64_t seed, int max_attempts) {
  if (num_nodes < 2) {
    throw InvalidParameter("erdos_renyi needs N >= 2, got " + std::to_string(num_nodes));
  }
  if (!(p > 0.0 && p <= 1.0)) {
    throw InvalidParameter("erdos_renyi needs 0 < p <= 1, got " + std::to_string(p));
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::uint64_t attempt_seed = seed + static_cast<std::uint64_t>(attempt);
    Rng rng(attempt_seed);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < num_nodes; ++i) {
      for (std::size_t j = i + 1; j < num_nodes; ++j) {
        if (rng.uniform() < p) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
    auto adjacency = make_adjacency(num_nodes, edges);
    if (is_connected(num_nodes, adjacency)) {
      return Graph(num_nodes, edges, GraphKind::erdos_renyi, attempt_seed);
    }
  }
  std::ostringstream msg;
  msg << "erdos_renyi(N=" << num_nodes << ", p=" << p << ") stayed disconnected after "
      << max_attempts << " attempts";
  throw ConstructionError(msg.str());
}

Graph build_complete(std::size_t num_nodes) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t j = i + 1; j < num_nodes; ++j) {
      edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return Graph(num_nodes, edges, GraphKind::complete, 0);
}

Graph build_cycle(std::size_t num_nodes) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i + 1 < num_nodes; ++i) {
    edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(i + 1));
  }
  if (num_nodes > 2) edges.emplace_back(static_cast<NodeId>(num_nodes - 1), 0);
  return Graph(num_nodes, edges, GraphKind::cycle, 0);
}

double spectral_diagnostic(const Graph& g, const DenseMatrix& transition) {
  const std::size_t n = g.num_nodes();
  if (n > 2000) throw InvalidParameter("spectral_diagnostic is limited to N <= 2000");
  if (transition.rows != n || transition.cols != n) {
    throw InvalidParameter("transition matrix shape does not match graph");
  }
  Eigen::MatrixXd m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double v = transition(r, c);
      if (v < 0.0) throw InvalidParameter("negative transition entry in row " + std::to_string(r));
      if (v != 0.0 && !g.has_edge(static_cast<NodeId>(r), static_cast<NodeId>(c))) {
        throw InvalidParameter("transition mass off the graph at (" + std::to_string(r) + ", " +
                               std::to_string(c) + ")");
      }
      sum += v;
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidParameter("row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
  if (n == 1) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  std::vector<double> moduli;
  moduli.reserve(n);
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    moduli.push_back(std::abs(solver.eigenvalues()[i]));
  }
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  // The top modulus is the Perron eigenvalue 1; clamp round-off below zero.
  return std::max(0.0, moduli[1]);
}

void save_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << g.num_nodes() << '\n';
  for (auto [a, b] : g.edges()) out << a << ' ' << b << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

Graph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open edge list " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t num_nodes = 0;
  std::vector<std::pair<NodeId, NodeId>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    if (num_nodes == 0) {
      if (!(fields >> num_nodes) || num_nodes == 0) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected node count");
      }
      continue;
    }
    long long a = -1, b = -1;
    if (!(fields >> a >> b) || a < 0 || b < 0 || static_cast<std::size_t>(a) >= num_nodes ||
        static_cast<std::size_t>(b) >= num_nodes) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad edge '" + line + "'");
    }
    edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
  }
  if (num_nodes == 0) throw FormatError(path.string() + ": empty edge list");
  return Graph(num_nodes, edges, GraphKind::custom, 0);
}

}  // namespace walklearn
