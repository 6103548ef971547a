#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "walklearn/error.hpp"
#include "walklearn/walkers.hpp"

using namespace walklearn;

namespace {

// Dense transition matrix of a walker's current rule.
Eigen::MatrixXd dense_rows(const Walker& w, const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto row = w.transition_row(g, i);
    const auto nbrs = g.neighbors(i);
    for (std::size_t k = 0; k < nbrs.size(); ++k) p(i, nbrs[k]) = row[k];
  }
  return p;
}

void check_row_invariants(const Walker& w, const Graph& g) {
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto row = w.transition_row(g, i);
    REQUIRE(row.size() == g.neighbors(i).size());
    double total = 0.0;
    for (double v : row) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
  }
}

std::vector<double> visit_frequencies(const Walker& w, const Graph& g, std::size_t steps,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> visits(g.num_nodes(), 0.0);
  NodeId current = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    current = w.step(g, current, w.transition_row(g, current), rng);
    visits[current] += 1.0;
  }
  for (auto& v : visits) v /= static_cast<double>(steps);
  return visits;
}

StepFeedback feedback(const Graph& g, const Exp3State& s, NodeId prev, NodeId chosen, double cost,
                      std::vector<double>& row_storage) {
  row_storage = exp3_transition(s, prev, g);
  return StepFeedback{prev, chosen, cost, cost, row_storage};
}

}  // namespace

TEST_CASE("exp3 transition rows") {
  const Graph g = build_complete(4);
  Exp3State s(4, 100);
  const auto row = exp3_transition(s, 0, g);
  for (double v : row) CHECK(v == doctest::Approx(0.25));

  const Graph path(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}});
  Exp3State q(3, 100);
  q.log_q = {std::log(2.0), 0.0, 0.0};
  const auto r = exp3_transition(q, 1, path);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(0.5));
  CHECK(r[1] == doctest::Approx(0.25));
  CHECK(r[2] == doctest::Approx(0.25));

  // Node 2 is not adjacent to node 0: zero mass in the dense matrix.
  Exp3Walker w(3, 100);
  CHECK(dense_rows(w, path)(0, 2) == 0.0);
  CHECK_THROWS_AS(selection_probability(path, 0, 2, exp3_transition(q, 0, path)), std::logic_error);
}

TEST_CASE("exp3 rows survive heavy decay") {
  const Graph g = build_complete(3);
  Exp3State s(3, 100);
  s.log_q = {-1e6, -1e6 - 1.0, -2e6};
  const auto row = exp3_transition(s, 0, g);
  CHECK(row[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(row[2] == 0.0);
  CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("exploration parameter") {
  const double ln_t = std::log(1000.0);
  // A ln T = 16 reproduces the T = e example: sqrt(16) + 16/3.
  CHECK(exploration_param(16.0 / ln_t, 1000, 1) == doctest::Approx(4.0 + 16.0 / 3.0));
  const double full_const = std::sqrt(4096.0 * ln_t) + 4096.0 / 3.0 * ln_t;
  CHECK(full_const == doctest::Approx(168.3 + 9431.5).epsilon(1e-4));
  CHECK(exploration_param(4096.0, 1000, 1) == doctest::Approx(full_const));
  for (std::size_t k = 1; k < 2000; k += 37) {
    CHECK(exploration_param(40.0, 1000, 2 * k) < exploration_param(40.0, 1000, k));
    CHECK(exploration_param(40.0, 1000, k + 1) < exploration_param(40.0, 1000, k));
  }
  CHECK_THROWS_AS(exploration_param(4.0, 1, 1), InvalidParameter);
  CHECK_THROWS_AS(exploration_param(4.0, 10, 0), InvalidParameter);
}

TEST_CASE("exploration constant selection") {
  CHECK(Exp3State(10, 100).exploration_const == 40.0);
  Exp3Params full;
  full.full_exploration_const = true;
  CHECK(Exp3State(10, 100, full).exploration_const == 4096.0);
  Exp3Params fixed;
  fixed.exploration_const = 3.0;
  CHECK(Exp3State(10, 100, fixed).exploration_const == 3.0);
}

TEST_CASE("learning rate") {
  CHECK(learning_rate(10, 1000) == doctest::Approx(std::sqrt(2.302585093 / 10000.0)));
  CHECK(learning_rate(10, 1000) == doctest::Approx(0.015174).epsilon(1e-4));
  for (std::size_t t = 2; t < 5000; t += 101) CHECK(learning_rate(7, t + 1) < learning_rate(7, t));
  CHECK_THROWS_AS(learning_rate(1, 10), InvalidParameter);
  CHECK_THROWS_AS(learning_rate(10, 1), InvalidParameter);
}

TEST_CASE("exp3 weight update") {
  CHECK(exp3_log_decrement(0.1, 1.0, 0.25, 0.75) == doctest::Approx(0.1));
  CHECK(std::exp(-exp3_log_decrement(0.1, 1.0, 0.25, 0.75)) == doctest::Approx(0.9048).epsilon(1e-4));

  const Graph g = build_complete(4);
  SUBCASE("zero cost leaves q unchanged") {
    Exp3State s(4, 100);
    std::vector<double> row;
    exp3_update(s, g, feedback(g, s, 0, 2, 0.0, row));
    for (double v : s.log_q) CHECK(v == 0.0);
    CHECK(s.round == 1);
  }
  SUBCASE("only the chosen node decays, availability takes the row") {
    Exp3Params p;
    p.eta = 0.5;
    Exp3State s(4, 100, p);
    std::vector<double> row;
    const auto fb = feedback(g, s, 1, 3, 2.0, row);
    exp3_update(s, g, fb);
    CHECK(s.log_q[0] == 0.0);
    CHECK(s.log_q[1] == 0.0);
    CHECK(s.log_q[2] == 0.0);
    // First cost sets the scale, so the normalized cost is 1.
    const double lambda = exploration_param(16.0, 100, 1);
    CHECK(s.log_q[3] == doctest::Approx(-0.5 / (0.25 + lambda)));
    for (NodeId i = 0; i < 4; ++i) CHECK(s.pbar_sum[i] == doctest::Approx(0.25));
  }
  SUBCASE("fixed cost bound clips at one") {
    Exp3Params p;
    p.eta = 1.0;
    p.cost_bound = 0.5;
    Exp3State s(4, 100, p);
    std::vector<double> row;
    exp3_update(s, g, feedback(g, s, 0, 0, 3.0, row));
    const double lambda = exploration_param(16.0, 100, 1);
    CHECK(s.log_q[0] == doctest::Approx(-1.0 / (0.25 + lambda)));
  }
  SUBCASE("negative cost") {
    Exp3State s(4, 100);
    std::vector<double> row;
    CHECK_THROWS_AS(exp3_update(s, g, feedback(g, s, 0, 0, -1.0, row)), InvalidParameter);
  }
}

TEST_CASE("exp3 symmetric nodes keep equal weights") {
  const Graph g = build_complete(3);
  Exp3Params p;
  p.eta = 0.3;
  // Mirrored choice sequences give mirrored weights.
  Exp3State a(3, 1000, p);
  Exp3State b(3, 1000, p);
  std::vector<double> row;
  for (int t = 0; t < 50; ++t) {
    const NodeId first = t % 3 == 0 ? 1 : 2;
    exp3_update(a, g, feedback(g, a, 0, first, 0.7, row));
    exp3_update(b, g, feedback(g, b, 0, 3 - first, 0.7, row));
  }
  CHECK(a.log_q[1] == b.log_q[2]);
  CHECK(a.log_q[2] == b.log_q[1]);
  CHECK(a.log_q[0] == b.log_q[0]);
  CHECK(a.log_q[1] < 0.0);
}

TEST_CASE("exp3 ordering is invariant to cost scaling") {
  const Graph g = build_complete(5);
  Exp3Params p;
  p.eta = 0.2;
  Exp3State a(5, 1000, p);
  Exp3State b(5, 1000, p);
  Rng rng(3);
  std::vector<double> row;
  for (int t = 0; t < 300; ++t) {
    const auto prev = static_cast<NodeId>(rng.below(5));
    const auto chosen = static_cast<NodeId>(rng.below(5));
    const double cost = (1.0 + chosen) * rng.uniform();
    exp3_update(a, g, feedback(g, a, prev, chosen, cost, row));
    exp3_update(b, g, feedback(g, b, prev, chosen, 7.0 * cost, row));
  }
  std::vector<std::size_t> oa(5), ob(5);
  std::iota(oa.begin(), oa.end(), 0);
  std::iota(ob.begin(), ob.end(), 0);
  std::sort(oa.begin(), oa.end(), [&](auto x, auto y) { return a.log_q[x] < a.log_q[y]; });
  std::sort(ob.begin(), ob.end(), [&](auto x, auto y) { return b.log_q[x] < b.log_q[y]; });
  CHECK(oa == ob);
}

TEST_CASE("exp3 availability estimate stays in [0, 1]") {
  const Graph g = build_erdos_renyi(12, 0.3, 4);
  for (bool neighbor_only : {false, true}) {
    Exp3Params p;
    p.eta = 0.5;
    p.neighbor_only_availability = neighbor_only;
    Exp3Walker w(12, 500, p);
    Rng rng(8);
    NodeId current = 0;
    for (int t = 0; t < 500; ++t) {
      const auto row = w.transition_row(g, current);
      const NodeId next = w.step(g, current, row, rng);
      w.observe(g, StepFeedback{current, next, rng.uniform(), 0.0, row});
      current = next;
      for (NodeId i = 0; i < 12; ++i) {
        CHECK(w.state().availability(i) >= 0.0);
        CHECK(w.state().availability(i) <= 1.0 + 1e-12);
        CHECK(std::isfinite(w.state().log_q[i]));
      }
    }
    check_row_invariants(w, g);
  }
}

TEST_CASE("mh acceptance") {
  // Node 0 has degree 4; node 1 gets 7 more leaves for degree 8.
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  for (NodeId j = 5; j < 12; ++j) edges.emplace_back(1, j);
  const Graph g(12, edges);
  REQUIRE(g.degree(0) == 4);
  REQUIRE(g.degree(1) == 8);
  CHECK(mh_uniform_acceptance(g, 0, 1) == doctest::Approx(0.5));
  CHECK(mh_uniform_acceptance(g, 1, 0) == 1.0);
  CHECK(mh_uniform_acceptance(g, 0, 2) == 1.0);

  const Graph k4 = build_complete(4);
  const std::vector<double> l{1.0, 2.0, 1.0, 1.0};
  CHECK(mh_weighted_acceptance(k4, l, 0, 1) == 1.0);
  CHECK(mh_weighted_acceptance(k4, l, 1, 0) == doctest::Approx(0.5));
  CHECK(mh_weighted_acceptance(k4, l, 0, 2) == mh_uniform_acceptance(k4, 0, 2));

  CHECK_THROWS_AS(WeightedMhWalker({1.0, 0.0, 1.0, 1.0}), InvalidParameter);
  Rng rng(1);
  CHECK_THROWS_AS(mh_weighted_step(k4, 0, std::vector<double>{1.0, -1.0, 1.0, 1.0}, rng),
                  InvalidParameter);
}

TEST_CASE("mh rows match the dense chain at N = 6") {
  const Graph g = build_erdos_renyi(6, 0.5, 2);
  UniformMhWalker w;
  const auto p = dense_rows(w, g);
  for (NodeId i = 0; i < 6; ++i) {
    double moving = 0.0;
    for (NodeId j : g.neighbors(i)) {
      if (j == i) continue;
      const double expect = std::min(1.0, static_cast<double>(g.degree(i)) / g.degree(j)) /
                            static_cast<double>(g.degree(i));
      CHECK(p(i, j) == doctest::Approx(expect));
      CHECK(selection_probability(g, i, j, w.transition_row(g, i)) == doctest::Approx(expect));
      moving += expect;
    }
    CHECK(p(i, i) == doctest::Approx(1.0 - moving));
  }
}

TEST_CASE("mh chains have the designed stationary law") {
  const Graph g = build_erdos_renyi(20, 0.3, 5);
  UniformMhWalker uniform;
  const auto p = dense_rows(uniform, g);
  const Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(20, 1.0 / 20.0);
  CHECK((pi * p - pi).cwiseAbs().maxCoeff() < 1e-12);
  // Irreducible and aperiodic: some power is strictly positive.
  Eigen::MatrixXd power = p;
  for (int k = 0; k < 40; ++k) power = power * p;
  CHECK(power.minCoeff() > 0.0);

  Rng rng(9);
  std::vector<double> l(20);
  for (auto& v : l) v = 0.5 + rng.uniform();
  WeightedMhWalker weighted(l);
  const double total = std::accumulate(l.begin(), l.end(), 0.0);
  Eigen::RowVectorXd target(20);
  for (int i = 0; i < 20; ++i) target(i) = l[static_cast<std::size_t>(i)] / total;
  CHECK((target * dense_rows(weighted, g) - target).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mh empirical visits") {
  const Graph g = build_erdos_renyi(20, 0.3, 5);
  const auto freq = visit_frequencies(UniformMhWalker{}, g, 200000, 11);
  for (double f : freq) CHECK(std::abs(f - 0.05) <= 0.02);

  const Graph g10 = build_erdos_renyi(10, 0.5, 6);
  Rng rng(12);
  std::vector<double> l(10);
  for (auto& v : l) v = 0.2 + rng.uniform();
  const double total = std::accumulate(l.begin(), l.end(), 0.0);
  const auto wfreq = visit_frequencies(WeightedMhWalker(l), g10, 500000, 13);
  for (std::size_t i = 0; i < 10; ++i) {
    const double target = l[i] / total;
    CHECK(std::abs(wfreq[i] - target) / target <= 0.02);
  }
}

TEST_CASE("mh draw order is proposal then acceptance") {
  const Graph g = build_erdos_renyi(15, 0.3, 3);
  Rng a(21), b(21);
  NodeId current = 4;
  for (int t = 0; t < 1000; ++t) {
    const NodeId got = mh_uniform_step(g, current, a);
    const auto nbrs = g.neighbors(current);
    std::vector<NodeId> others;
    for (NodeId j : nbrs) {
      if (j != current) others.push_back(j);
    }
    const NodeId proposal = others[b.below(others.size())];
    const NodeId expect = b.uniform() < mh_uniform_acceptance(g, current, proposal) ? proposal : current;
    REQUIRE(got == expect);
    current = got;
  }
}

TEST_CASE("isolated node stays put") {
  const Graph single(1, std::vector<std::pair<NodeId, NodeId>>{});
  Rng rng(1);
  CHECK(mh_uniform_step(single, 0, rng) == 0);
  UniformMhWalker w;
  CHECK(w.transition_row(single, 0) == std::vector<double>{1.0});
}

TEST_CASE("exploitation walker") {
  const Graph g = build_complete(3);
  ExploitationWalker w(3);
  for (double v : w.transition_row(g, 0)) CHECK(v == doctest::Approx(1.0 / 3.0));

  const Graph path(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}});
  ExploitationState s(3);
  s.grad_sq_sum = {3.0, 0.0, 2.0};
  s.visit_count = {1, 0, 2};
  s.max_observed = 3.0;
  s.any_observed = true;
  // Node 1 is unvisited: optimistic value = max observed = 3.
  const auto row = exploitation_row(s, 0, path);
  CHECK(row[0] == doctest::Approx(0.5));
  CHECK(row[1] == doctest::Approx(0.5));

  ExploitationState t(2);
  t.grad_sq_sum = {3.0, 1.0};
  t.visit_count = {1, 1};
  t.any_observed = true;
  const auto r2 = exploitation_row(t, 0, build_complete(2));
  CHECK(r2[0] == doctest::Approx(0.75));
  CHECK(r2[1] == doctest::Approx(0.25));

  ExploitationState zero(2);
  zero.visit_count = {1, 1};
  zero.any_observed = true;
  CHECK(exploitation_row(zero, 0, build_complete(2)) == std::vector<double>{0.5, 0.5});

  const Graph er = build_erdos_renyi(10, 0.4, 1);
  ExploitationWalker w10(10);
  Rng rng(2);
  NodeId current = 0;
  for (int t2 = 0; t2 < 200; ++t2) {
    const auto rr = w10.transition_row(er, current);
    const NodeId next = exploitation_step(w10.state(), current, er, rng);
    CHECK(er.has_edge(current, next));
    w10.observe(er, StepFeedback{current, next, 0.0, rng.uniform() * 4.0, rr});
    current = next;
  }
  for (NodeId i = 0; i < 10; ++i) {
    const auto rr = w10.transition_row(er, i);
    CHECK(std::abs(std::accumulate(rr.begin(), rr.end(), 0.0) - 1.0) <= 1e-12);
  }
}

TEST_CASE("every walker produces valid rows") {
  const Graph g = build_margulis(5);
  std::vector<double> l(25, 1.0);
  for (std::size_t i = 0; i < 25; ++i) l[i] = 1.0 + static_cast<double>(i % 7);
  check_row_invariants(UniformMhWalker{}, g);
  check_row_invariants(WeightedMhWalker(l), g);
  check_row_invariants(ExploitationWalker(25), g);
  check_row_invariants(Exp3Walker(25, 100), g);
}

TEST_CASE("sample index follows the row") {
  const std::vector<double> row{0.1, 0.0, 0.6, 0.3};
  Rng rng(5);
  std::vector<double> counts(4, 0.0);
  for (int t = 0; t < 100000; ++t) counts[sample_index(row, rng)] += 1.0;
  CHECK(counts[1] == 0.0);
  CHECK(counts[0] / 1e5 == doctest::Approx(0.1).epsilon(0.05));
  CHECK(counts[2] / 1e5 == doctest::Approx(0.6).epsilon(0.02));
}

TEST_CASE("walker names") {
  for (auto k : {WalkerKind::uniform, WalkerKind::weighted, WalkerKind::exploit, WalkerKind::exp3}) {
    CHECK(walker_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(walker_kind_from_string("greedy"), InvalidParameter);
}
