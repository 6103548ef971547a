#include "walklearn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "walklearn/error.hpp"

namespace walklearn {

double exact_node_cost(const LossModel& m, std::span<const double> w, const NodeDataset& ds) {
  if (ds.points.empty()) return 0.0;
  std::vector<double> g(m.param_size());
  double total = 0.0;
  for (const auto& pt : ds.points) {
    point_grad(m, w, pt, g);
    total += squared_norm(g);
  }
  const auto n = static_cast<double>(ds.points.size());
  return total / (n * n);
}

CostProfile cost_profile(const LossModel& m, std::span<const double> w, const Partition& partition,
                         std::size_t round) {
  CostProfile out{round, {}};
  out.costs.reserve(partition.nodes.size());
  for (const auto& node : partition.nodes) out.costs.push_back(exact_node_cost(m, w, node));
  return out;
}

std::vector<double> optimal_sampling(std::span<const double> costs) {
  if (costs.empty()) throw InvalidParameter("optimal_sampling needs at least one node");
  std::vector<double> p(costs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!(costs[i] >= 0.0)) {
      throw InvalidParameter("negative cost " + std::to_string(costs[i]) + " at node " +
                             std::to_string(i));
    }
    p[i] = std::sqrt(costs[i]);
    total += p[i];
  }
  if (total == 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

double sampling_objective(std::span<const double> costs, std::span<const double> probs) {
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (costs[i] == 0.0) continue;
    if (probs[i] <= 0.0) return std::numeric_limits<double>::infinity();
    total += costs[i] / probs[i];
  }
  return total;
}

double oracle_cumulative_cost(std::span<const CostProfile> profiles,
                              std::span<const std::size_t> required_rounds) {
  if (!required_rounds.empty()) {
    std::vector<std::size_t> have;
    have.reserve(profiles.size());
    for (const auto& p : profiles) have.push_back(p.round);
    std::sort(have.begin(), have.end());
    std::string missing;
    for (std::size_t r : required_rounds) {
      if (!std::binary_search(have.begin(), have.end(), r)) {
        missing += (missing.empty() ? "" : ", ") + std::to_string(r);
      }
    }
    if (!missing.empty()) throw Error("missing cost profiles for rounds " + missing);
  }
  double total = 0.0;
  for (const auto& profile : profiles) {
    const auto p = optimal_sampling(profile.costs);
    for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * profile.costs[i];
  }
  return total;
}

double uniform_cumulative_cost(std::span<const CostProfile> profiles) {
  double total = 0.0;
  for (const auto& profile : profiles) {
    total += std::accumulate(profile.costs.begin(), profile.costs.end(), 0.0) /
             static_cast<double>(profile.costs.size());
  }
  return total;
}

std::string_view to_string(RegretMode mode) {
  return mode == RegretMode::per_round_available_min ? "per_round_available_min"
                                                     : "best_fixed_node";
}

RegretMode regret_mode_from_string(std::string_view name) {
  if (name == "per_round_available_min") return RegretMode::per_round_available_min;
  if (name == "best_fixed_node") return RegretMode::best_fixed_node;
  throw InvalidParameter("unsupported regret mode '" + std::string(name) + "'");
}

namespace {

double available_min(const Graph& g, NodeId previous, const std::vector<double>& costs) {
  double best = std::numeric_limits<double>::infinity();
  for (NodeId j : g.neighbors(previous)) best = std::min(best, costs[j]);
  return best;
}

void check_alignment(std::span<const WalkStep> steps, std::span<const CostProfile> profiles,
                     const Graph& g) {
  if (steps.size() != profiles.size()) {
    throw Error("regret needs one cost profile per step: " + std::to_string(steps.size()) +
                " steps, " + std::to_string(profiles.size()) + " profiles");
  }
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (profiles[t].costs.size() != g.num_nodes()) {
      throw Error("cost profile for round " + std::to_string(profiles[t].round) +
                  " does not cover every node");
    }
    if (!g.has_edge(steps[t].previous, steps[t].chosen)) {
      throw Error("round " + std::to_string(steps[t].round) + " moved along a non-edge");
    }
  }
}

}  // namespace

NodeId best_fixed_node(const Graph& g, std::span<const WalkStep> steps,
                       std::span<const CostProfile> profiles) {
  check_alignment(steps, profiles, g);
  std::vector<double> totals(g.num_nodes(), 0.0);
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto& costs = profiles[t].costs;
    const double fallback = available_min(g, steps[t].previous, costs);
    // g_i where available, the fallback elsewhere.
    for (auto& v : totals) v += fallback;
    for (NodeId j : g.neighbors(steps[t].previous)) totals[j] += costs[j] - fallback;
  }
  return static_cast<NodeId>(std::min_element(totals.begin(), totals.end()) - totals.begin());
}

std::vector<double> sleeping_regret(const Graph& g, std::span<const WalkStep> steps,
                                    std::span<const CostProfile> profiles, RegretMode mode) {
  check_alignment(steps, profiles, g);
  std::vector<double> out;
  out.reserve(steps.size());
  const NodeId fixed = mode == RegretMode::best_fixed_node && !steps.empty()
                           ? best_fixed_node(g, steps, profiles)
                           : NodeId{0};
  double regret = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto& costs = profiles[t].costs;
    double benchmark = available_min(g, steps[t].previous, costs);
    if (mode == RegretMode::best_fixed_node && g.has_edge(steps[t].previous, fixed)) {
      benchmark = costs[fixed];
    }
    regret += costs[steps[t].chosen] - benchmark;
    out.push_back(regret);
  }
  return out;
}

StationaryBanditResult simulate_stationary_costs(Walker& walker, const Graph& g,
                                                 std::span<const CostDistribution> costs,
                                                 std::size_t horizon, std::uint64_t seed) {
  if (costs.size() != g.num_nodes()) {
    throw InvalidParameter("one cost distribution per node required");
  }
  Rng rng(seed);
  StationaryBanditResult out;
  out.regret.reserve(horizon);
  out.visits.assign(g.num_nodes(), 0);
  std::vector<double> means(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) means[i] = costs[i].mean;

  auto current = static_cast<NodeId>(rng.below(g.num_nodes()));
  double regret = 0.0;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const auto row = walker.transition_row(g, current);
    const NodeId next = walker.step(g, current, row, rng);
    const auto& law = costs[next];
    const double draw =
        std::max(0.0, law.mean + law.spread * (2.0 * rng.uniform() - 1.0));
    walker.observe(g, StepFeedback{current, next, draw, draw, row});
    out.cumulative_cost += draw;
    regret += means[next] - available_min(g, current, means);
    out.regret.push_back(regret);
    ++out.visits[next];
    current = next;
  }
  return out;
}

}  // namespace walklearn
