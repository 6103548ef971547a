#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "walklearn/error.hpp"
#include "walklearn/graph.hpp"

using namespace walklearn;

namespace {

void check_invariants(const Graph& g) {
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto nbrs = g.neighbors(i);
    CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));
    CHECK(std::adjacent_find(nbrs.begin(), nbrs.end()) == nbrs.end());
    CHECK(g.has_edge(i, i));
    for (NodeId j : nbrs) CHECK(g.has_edge(j, i));
  }
  std::vector<std::vector<NodeId>> adj(g.num_nodes());
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    adj[i].assign(g.neighbors(i).begin(), g.neighbors(i).end());
  }
  CHECK(is_connected(g.num_nodes(), adj));
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("walklearn_test_graph_" + name);
}

}  // namespace

TEST_CASE("margulis n=2 neighbors by hand") {
  // Offsets for (0,0): x +- 0, x +- 1, y +- 0, y +- 1, all mod 2.
  const Graph g = build_margulis(2);
  REQUIRE(g.num_nodes() == 4);
  const auto nbrs = g.neighbors(0);
  const std::set<NodeId> got(nbrs.begin(), nbrs.end());
  CHECK(got.count(0) == 1);
  CHECK(got.count(1 * 2 + 0) == 1);  // (1, 0)
  CHECK(got.count(0 * 2 + 1) == 1);  // (0, 1)
  check_invariants(g);
}

TEST_CASE("margulis matches an independent generator enumeration") {
  for (std::size_t n : {3u, 5u, 10u}) {
    const Graph g = build_margulis(n);
    REQUIRE(g.num_nodes() == n * n);
    const auto m = static_cast<long>(n);
    const auto mod = [m](long v) { return ((v % m) + m) % m; };
    for (long x = 0; x < m; ++x) {
      for (long y = 0; y < m; ++y) {
        std::set<NodeId> expect{static_cast<NodeId>(x * m + y)};
        for (long s : {-1L, 1L}) {
          expect.insert(static_cast<NodeId>(mod(x + s * 2 * y) * m + y));
          expect.insert(static_cast<NodeId>(mod(x + s * (2 * y + 1)) * m + y));
          expect.insert(static_cast<NodeId>(x * m + mod(y + s * 2 * x)));
          expect.insert(static_cast<NodeId>(x * m + mod(y + s * (2 * x + 1))));
        }
        const auto nbrs = g.neighbors(static_cast<NodeId>(x * m + y));
        CHECK(std::set<NodeId>(nbrs.begin(), nbrs.end()) == expect);
        CHECK(nbrs.size() >= 1);
        CHECK(nbrs.size() <= 9);
      }
    }
    check_invariants(g);
  }
}

TEST_CASE("margulis rejects n < 2") {
  CHECK_THROWS_AS(build_margulis(1), InvalidParameter);
  CHECK_THROWS_AS(build_margulis(0), InvalidParameter);
}

TEST_CASE("erdos-renyi basics") {
  const Graph full = build_erdos_renyi(5, 1.0, 3);
  for (NodeId i = 0; i < 5; ++i) CHECK(full.neighbors(i).size() == 5);

  const Graph a = build_erdos_renyi(20, 0.3, 7);
  const Graph b = build_erdos_renyi(20, 0.3, 7);
  CHECK(a == b);
  check_invariants(a);

  const Graph sparse = build_erdos_renyi(100, 0.1, 1);
  check_invariants(sparse);
  CHECK(sparse.kind() == GraphKind::erdos_renyi);

  CHECK_THROWS_AS(build_erdos_renyi(1, 0.5, 0), InvalidParameter);
  CHECK_THROWS_AS(build_erdos_renyi(10, 0.0, 0), InvalidParameter);
  CHECK_THROWS_AS(build_erdos_renyi(10, 1.5, 0), InvalidParameter);
}

TEST_CASE("erdos-renyi exhausts retries on hopeless p") {
  try {
    build_erdos_renyi(200, 0.001, 0, 5);
    FAIL("expected ConstructionError");
  } catch (const ConstructionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("200") != std::string::npos);
    CHECK(msg.find("5") != std::string::npos);
  }
}

TEST_CASE("complete and cycle graphs") {
  const Graph k4 = build_complete(4);
  for (NodeId i = 0; i < 4; ++i) CHECK(k4.degree(i) == 3);
  const Graph c8 = build_cycle(8);
  for (NodeId i = 0; i < 8; ++i) {
    CHECK(c8.degree(i) == 2);
    CHECK(c8.has_edge(i, (i + 1) % 8));
  }
  CHECK(c8.neighbor_index(0, 4) == Graph::npos);
  check_invariants(c8);
}

TEST_CASE("constructor rejects bad input") {
  const std::vector<std::pair<NodeId, NodeId>> out_of_range{{0, 5}};
  CHECK_THROWS_AS(Graph(3, out_of_range), InvalidParameter);
  const std::vector<std::pair<NodeId, NodeId>> split{{0, 1}, {2, 3}};
  CHECK_THROWS_AS(Graph(4, split), InvalidParameter);
  const std::vector<std::pair<NodeId, NodeId>> dupes{{0, 1}, {1, 0}, {0, 1}, {1, 1}};
  const Graph g(2, dupes);
  CHECK(g.neighbors(0).size() == 2);
  CHECK(g.edges().size() == 1);
}

TEST_CASE("spectral diagnostic") {
  SUBCASE("complete graph with uniform rows") {
    const Graph g = build_complete(4);
    DenseMatrix p(4, 4);
    for (auto& v : p.values) v = 0.25;
    CHECK(spectral_diagnostic(g, p) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("two nodes, rank one") {
    const Graph g = build_complete(2);
    DenseMatrix p(2, 2);
    for (auto& v : p.values) v = 0.5;
    CHECK(spectral_diagnostic(g, p) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("lazy 8-cycle matches a dense eigensolve") {
    const Graph g = build_cycle(8);
    DenseMatrix p(8, 8);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(8, 8);
    for (NodeId i = 0; i < 8; ++i) {
      p(i, i) = 0.5;
      p(i, (i + 1) % 8) = 0.25;
      p(i, (i + 7) % 8) = 0.25;
      oracle(i, i) = 0.5;
      oracle(i, (i + 1) % 8) = 0.25;
      oracle(i, (i + 7) % 8) = 0.25;
    }
    // Symmetric, so the self-adjoint solver is an independent route.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle);
    std::vector<double> mods;
    for (int k = 0; k < 8; ++k) mods.push_back(std::abs(es.eigenvalues()(k)));
    std::sort(mods.rbegin(), mods.rend());
    // Closed form: 0.5 + 0.5 cos(2 pi / 8).
    const double expect = 0.5 + 0.5 * std::cos(2.0 * M_PI / 8.0);
    CHECK(mods[1] == doctest::Approx(expect).epsilon(1e-12));
    const double got = spectral_diagnostic(g, p);
    CHECK(got > 0.0);
    CHECK(got < 1.0);
    CHECK(got == doctest::Approx(mods[1]).epsilon(1e-9));
  }
  SUBCASE("invalid matrices") {
    const Graph g = build_cycle(8);
    DenseMatrix bad(8, 8);
    for (NodeId i = 0; i < 8; ++i) bad(i, i) = 0.9;
    CHECK_THROWS_AS(spectral_diagnostic(g, bad), InvalidParameter);
    DenseMatrix off(8, 8);
    for (NodeId i = 0; i < 8; ++i) off(i, (i + 4) % 8) = 1.0;
    CHECK_THROWS_AS(spectral_diagnostic(g, off), InvalidParameter);
  }
}

TEST_CASE("edge list round trip") {
  const auto path = temp_file("roundtrip.txt");
  const Graph g = build_erdos_renyi(30, 0.2, 11);
  save_edge_list(g, path);
  const Graph back = load_edge_list(path);
  CHECK(back == g);
  std::filesystem::remove(path);
}

TEST_CASE("edge list parse errors") {
  const auto path = temp_file("bad.txt");
  {
    std::ofstream out(path);
    out << "3\n0 1\n1 x\n";
  }
  CHECK_THROWS_AS(load_edge_list(path), FormatError);
  {
    std::ofstream out(path);
    out << "";
  }
  CHECK_THROWS_AS(load_edge_list(path), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("graph kind names") {
  for (auto kind : {GraphKind::margulis, GraphKind::erdos_renyi, GraphKind::complete,
                    GraphKind::cycle, GraphKind::custom}) {
    CHECK(graph_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(graph_kind_from_string("torus"), InvalidParameter);
}
