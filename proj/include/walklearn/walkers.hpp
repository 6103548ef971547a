#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "walklearn/graph.hpp"
#include "walklearn/rng.hpp"

namespace walklearn {

enum class WalkerKind { uniform, weighted, exploit, exp3 };

std::string_view to_string(WalkerKind kind);
WalkerKind walker_kind_from_string(std::string_view name);

/// What the engine reports back after the chosen node computed its update.
/// `row` is the transition row that produced the choice, aligned with
/// g.neighbors(previous).
struct StepFeedback {
  NodeId previous = 0;
  NodeId chosen = 0;
  double cost_estimate = 0.0;  // (1/n) * ||sampled gradient||^2
  double grad_sq_norm = 0.0;   // ||sampled gradient||^2
  std::span<const double> row;
};

class Walker {
 public:
  virtual ~Walker() = default;

  virtual WalkerKind kind() const = 0;

  /// Probability of moving from `current` to each of g.neighbors(current).
  virtual std::vector<double> transition_row(const Graph& g, NodeId current) const = 0;

  /// Draws the next node. The default samples `row` by inverse CDF with one
  /// uniform draw; MH walkers draw a proposal and then an acceptance.
  virtual NodeId step(const Graph& g, NodeId current, std::span<const double> row,
                      Rng& rng) const;

  virtual void observe(const Graph&, const StepFeedback&) {}
};

/// The probability `row` assigns to `chosen`; throws std::logic_error when
/// chosen is not a neighbor of previous.
double selection_probability(const Graph& g, NodeId previous, NodeId chosen,
                             std::span<const double> row);

// ---------------------------------------------------------------------------
// Metropolis-Hastings baselines. Degrees exclude the self-loop; proposals are
// uniform over the other neighbors and a rejection keeps the walk in place.

/// a_u(i, j) = min(1, deg(i) / deg(j)).
double mh_uniform_acceptance(const Graph& g, NodeId from, NodeId to);

/// a_w(i, j) = min(1, (L_j / L_i) * deg(i) / deg(j)).
double mh_weighted_acceptance(const Graph& g, std::span<const double> importance, NodeId from,
                              NodeId to);

class UniformMhWalker : public Walker {
 public:
  WalkerKind kind() const override { return WalkerKind::uniform; }
  std::vector<double> transition_row(const Graph& g, NodeId current) const override;
  NodeId step(const Graph& g, NodeId current, std::span<const double> row,
              Rng& rng) const override;
};

class WeightedMhWalker : public Walker {
 public:
  /// `importance` holds L_i > 0 for every node.
  explicit WeightedMhWalker(std::vector<double> importance);

  WalkerKind kind() const override { return WalkerKind::weighted; }
  std::vector<double> transition_row(const Graph& g, NodeId current) const override;
  NodeId step(const Graph& g, NodeId current, std::span<const double> row,
              Rng& rng) const override;

  std::span<const double> importance() const { return importance_; }

 private:
  std::vector<double> importance_;
};

NodeId mh_uniform_step(const Graph& g, NodeId current, Rng& rng);
NodeId mh_weighted_step(const Graph& g, NodeId current, std::span<const double> importance,
                        Rng& rng);

// ---------------------------------------------------------------------------
// Pure exploitation: move proportionally to each neighbor's running mean of
// observed squared gradient norms.

struct ExploitationState {
  std::vector<double> grad_sq_sum;
  std::vector<std::size_t> visit_count;
  double max_observed = 0.0;
  bool any_observed = false;

  explicit ExploitationState(std::size_t num_nodes)
      : grad_sq_sum(num_nodes, 0.0), visit_count(num_nodes, 0) {}

  /// Running mean for visited nodes, optimistic value otherwise.
  double importance(NodeId node) const;
};

class ExploitationWalker : public Walker {
 public:
  explicit ExploitationWalker(std::size_t num_nodes) : state_(num_nodes) {}

  WalkerKind kind() const override { return WalkerKind::exploit; }
  std::vector<double> transition_row(const Graph& g, NodeId current) const override;
  void observe(const Graph& g, const StepFeedback& fb) override;

  const ExploitationState& state() const { return state_; }

 private:
  ExploitationState state_;
};

/// Transition row over g.neighbors(current); uniform if every importance is 0.
std::vector<double> exploitation_row(const ExploitationState& state, NodeId current,
                                     const Graph& g);
NodeId exploitation_step(const ExploitationState& state, NodeId current, const Graph& g,
                         Rng& rng);

// ---------------------------------------------------------------------------
// Sleeping-bandit walker with EXP3-style multiplicative control weights.

struct Exp3Params {
  /// Exploration constant A in lambda. Defaults to 4N.
  std::optional<double> exploration_const;
  /// Use A = 2^(N+2) instead of the default.
  bool full_exploration_const = false;
  /// Overrides eta = sqrt(ln N / (N T)).
  std::optional<double> eta;
  /// Fixed cost normalizer; otherwise the running max of observed costs.
  std::optional<double> cost_bound;
  /// Average availability only over rounds where the node was a neighbor.
  bool neighbor_only_availability = false;
};

struct Exp3State {
  std::vector<double> log_q;
  std::vector<double> pbar_sum;
  std::vector<std::size_t> available_rounds;
  std::size_t round = 0;  // k: number of completed updates
  double eta = 0.0;
  double exploration_const = 0.0;
  std::size_t horizon = 0;
  double cost_scale = 0.0;
  std::optional<double> cost_bound;
  bool neighbor_only_availability = false;

  Exp3State(std::size_t num_nodes, std::size_t horizon, const Exp3Params& params = {});

  /// Empirical availability estimate after `round` updates.
  double availability(NodeId node) const;
};

/// eta = sqrt(ln N / (N T)); needs N >= 2 and T >= 2.
double learning_rate(std::size_t num_nodes, std::size_t horizon);

/// lambda(k) = sqrt(A ln T / k) + A ln T / (3k); needs k >= 1 and T >= 2.
double exploration_param(double exploration_const, std::size_t horizon, std::size_t round);

/// P(i) proportional to q(i) over g.neighbors(current), via max-subtracted
/// log weights.
std::vector<double> exp3_transition(const Exp3State& state, NodeId current, const Graph& g);

/// Amount subtracted from log q of the chosen node.
double exp3_log_decrement(double eta, double normalized_cost, double availability, double lambda);

/// Folds one round of feedback into the state: availability sums take the
/// whole row, k advances, and only the chosen node's weight decays.
void exp3_update(Exp3State& state, const Graph& g, const StepFeedback& fb);

class Exp3Walker : public Walker {
 public:
  Exp3Walker(std::size_t num_nodes, std::size_t horizon, const Exp3Params& params = {})
      : state_(num_nodes, horizon, params) {}

  WalkerKind kind() const override { return WalkerKind::exp3; }
  std::vector<double> transition_row(const Graph& g, NodeId current) const override {
    return exp3_transition(state_, current, g);
  }
  void observe(const Graph& g, const StepFeedback& fb) override { exp3_update(state_, g, fb); }

  const Exp3State& state() const { return state_; }

 private:
  Exp3State state_;
};

/// Draws an index from a probability row with one uniform.
std::size_t sample_index(std::span<const double> row, Rng& rng);

}  // namespace walklearn
