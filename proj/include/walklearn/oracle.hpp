#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "walklearn/data.hpp"
#include "walklearn/graph.hpp"
#include "walklearn/model.hpp"
#include "walklearn/walkers.hpp"

namespace walklearn {

/// Exact per-node costs g_i at one round's model.
struct CostProfile {
  std::size_t round = 0;
  std::vector<double> costs;
};

/// g = sum_j ||grad loss(w; xi_j)||^2 / n^2 over the node's points.
double exact_node_cost(const LossModel& m, std::span<const double> w, const NodeDataset& ds);

CostProfile cost_profile(const LossModel& m, std::span<const double> w, const Partition& partition,
                         std::size_t round);

/// p_i = sqrt(g_i) / sum_j sqrt(g_j). Zero-cost nodes get 0 unless every
/// cost is zero, in which case the result is uniform.
std::vector<double> optimal_sampling(std::span<const double> costs);

/// sum_i g_i / p_i, the second-moment bound minimized by optimal_sampling.
/// Terms with g_i = 0 contribute 0; g_i > 0 with p_i = 0 gives +inf.
double sampling_objective(std::span<const double> costs, std::span<const double> probs);

/// C* = sum over profiles of sum_i p*_k(i) g_i^(k). When `required_rounds`
/// is non-empty every listed round must have a profile, otherwise Error
/// names the missing ones.
double oracle_cumulative_cost(std::span<const CostProfile> profiles,
                              std::span<const std::size_t> required_rounds = {});

/// Expected cost of uniform node sampling, sum_k mean_i g_i^(k).
double uniform_cumulative_cost(std::span<const CostProfile> profiles);

enum class RegretMode { per_round_available_min, best_fixed_node };

std::string_view to_string(RegretMode mode);
RegretMode regret_mode_from_string(std::string_view name);

/// One evaluated round of a walk: the availability set is
/// g.neighbors(previous) and `chosen` is the node that was visited.
struct WalkStep {
  std::size_t round = 0;
  NodeId previous = 0;
  NodeId chosen = 0;
};

/// Cumulative regret R(k) over the steps, using the matching profile (same
/// position) for exact costs.
///  - per_round_available_min: benchmark is min over the availability set.
///  - best_fixed_node: benchmark plays the single node i* whenever it is
///    available and the available minimum otherwise; i* minimizes the total
///    benchmark cost.
std::vector<double> sleeping_regret(const Graph& g, std::span<const WalkStep> steps,
                                    std::span<const CostProfile> profiles, RegretMode mode);

/// Node used as i* by best_fixed_node mode.
NodeId best_fixed_node(const Graph& g, std::span<const WalkStep> steps,
                       std::span<const CostProfile> profiles);

/// Per-node stationary cost law for bandit simulations: uniform on
/// [mean - spread, mean + spread], clipped at zero.
struct CostDistribution {
  double mean = 0.0;
  double spread = 0.0;
};

struct StationaryBanditResult {
  std::vector<double> regret;  // R(k) against the available-min of the means
  double cumulative_cost = 0.0;
  std::vector<std::size_t> visits;
};

/// Drives a walker for `horizon` rounds against fixed cost laws. Each round
/// draws the chosen node's cost and feeds it back as the cost estimate.
StationaryBanditResult simulate_stationary_costs(Walker& walker, const Graph& g,
                                                 std::span<const CostDistribution> costs,
                                                 std::size_t horizon, std::uint64_t seed);

}  // namespace walklearn
