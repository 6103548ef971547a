#include "walklearn/walkers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "walklearn/error.hpp"

namespace walklearn {

std::string_view to_string(WalkerKind kind) {
  switch (kind) {
    case WalkerKind::uniform: return "uniform";
    case WalkerKind::weighted: return "weighted";
    case WalkerKind::exploit: return "exploit";
    case WalkerKind::exp3: return "exp3";
  }
  return "uniform";
}

WalkerKind walker_kind_from_string(std::string_view name) {
  for (auto kind : {WalkerKind::uniform, WalkerKind::weighted, WalkerKind::exploit,
                    WalkerKind::exp3}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidParameter("unknown walker '" + std::string(name) +
                         "' (expected exp3, uniform, weighted or exploit)");
}

std::size_t sample_index(std::span<const double> row, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] <= 0.0) continue;
    acc += row[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // u landed in the round-off gap at the top of the CDF.
  return last_positive;
}

NodeId Walker::step(const Graph& g, NodeId current, std::span<const double> row, Rng& rng) const {
  return g.neighbors(current)[sample_index(row, rng)];
}

double selection_probability(const Graph& g, NodeId previous, NodeId chosen,
                             std::span<const double> row) {
  const std::size_t idx = g.neighbor_index(previous, chosen);
  if (idx == Graph::npos || idx >= row.size()) {
    throw std::logic_error("node " + std::to_string(chosen) + " is not a neighbor of " +
                           std::to_string(previous));
  }
  return row[idx];
}

// ---------------------------------------------------------------------------

double mh_uniform_acceptance(const Graph& g, NodeId from, NodeId to) {
  const auto di = static_cast<double>(g.degree(from));
  const auto dj = static_cast<double>(g.degree(to));
  return std::min(1.0, di / dj);
}

double mh_weighted_acceptance(const Graph& g, std::span<const double> importance, NodeId from,
                              NodeId to) {
  const auto di = static_cast<double>(g.degree(from));
  const auto dj = static_cast<double>(g.degree(to));
  return std::min(1.0, (importance[to] / importance[from]) * (di / dj));
}

namespace {

template <typename Acceptance>
std::vector<double> mh_row(const Graph& g, NodeId current, Acceptance accept) {
  const auto nbrs = g.neighbors(current);
  std::vector<double> row(nbrs.size(), 0.0);
  const std::size_t deg = g.degree(current);
  double moving = 0.0;
  std::size_t self_idx = 0;
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    if (nbrs[k] == current) {
      self_idx = k;
      continue;
    }
    row[k] = accept(nbrs[k]) / static_cast<double>(deg);
    moving += row[k];
  }
  row[self_idx] = std::max(0.0, 1.0 - moving);
  return row;
}

template <typename Acceptance>
NodeId mh_draw(const Graph& g, NodeId current, Rng& rng, Acceptance accept) {
  const std::size_t deg = g.degree(current);
  if (deg == 0) return current;
  // Proposal over the neighbor list with the self entry skipped.
  const auto nbrs = g.neighbors(current);
  auto k = static_cast<std::size_t>(rng.below(deg));
  if (nbrs[k] >= current) ++k;  // self sits at the first id >= current
  const NodeId proposal = nbrs[k];
  return rng.uniform() < accept(proposal) ? proposal : current;
}

}  // namespace

std::vector<double> UniformMhWalker::transition_row(const Graph& g, NodeId current) const {
  return mh_row(g, current, [&](NodeId j) { return mh_uniform_acceptance(g, current, j); });
}

NodeId UniformMhWalker::step(const Graph& g, NodeId current, std::span<const double>,
                             Rng& rng) const {
  return mh_uniform_step(g, current, rng);
}

NodeId mh_uniform_step(const Graph& g, NodeId current, Rng& rng) {
  return mh_draw(g, current, rng, [&](NodeId j) { return mh_uniform_acceptance(g, current, j); });
}

WeightedMhWalker::WeightedMhWalker(std::vector<double> importance)
    : importance_(std::move(importance)) {
  for (std::size_t i = 0; i < importance_.size(); ++i) {
    if (!(importance_[i] > 0.0)) {
      throw InvalidParameter("weighted walker needs L_i > 0, node " + std::to_string(i) +
                             " has " + std::to_string(importance_[i]));
    }
  }
}

std::vector<double> WeightedMhWalker::transition_row(const Graph& g, NodeId current) const {
  return mh_row(g, current,
                [&](NodeId j) { return mh_weighted_acceptance(g, importance_, current, j); });
}

NodeId WeightedMhWalker::step(const Graph& g, NodeId current, std::span<const double>,
                              Rng& rng) const {
  return mh_weighted_step(g, current, importance_, rng);
}

NodeId mh_weighted_step(const Graph& g, NodeId current, std::span<const double> importance,
                        Rng& rng) {
  if (importance.size() != g.num_nodes()) {
    throw InvalidParameter("importance vector length does not match the graph");
  }
  for (double v : importance) {
    if (!(v > 0.0)) throw InvalidParameter("weighted walker needs L_i > 0");
  }
  return mh_draw(g, current, rng,
                 [&](NodeId j) { return mh_weighted_acceptance(g, importance, current, j); });
}

// ---------------------------------------------------------------------------

double ExploitationState::importance(NodeId node) const {
  if (visit_count[node] > 0) return grad_sq_sum[node] / static_cast<double>(visit_count[node]);
  return any_observed ? max_observed : 1.0;
}

std::vector<double> exploitation_row(const ExploitationState& state, NodeId current,
                                     const Graph& g) {
  const auto nbrs = g.neighbors(current);
  std::vector<double> row(nbrs.size());
  double total = 0.0;
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    row[k] = state.importance(nbrs[k]);
    total += row[k];
  }
  if (total <= 0.0) {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
    return row;
  }
  for (auto& v : row) v /= total;
  return row;
}

std::vector<double> ExploitationWalker::transition_row(const Graph& g, NodeId current) const {
  return exploitation_row(state_, current, g);
}

void ExploitationWalker::observe(const Graph&, const StepFeedback& fb) {
  state_.grad_sq_sum[fb.chosen] += fb.grad_sq_norm;
  state_.visit_count[fb.chosen] += 1;
  state_.max_observed = std::max(state_.max_observed, fb.grad_sq_norm);
  state_.any_observed = true;
}

NodeId exploitation_step(const ExploitationState& state, NodeId current, const Graph& g,
                         Rng& rng) {
  return g.neighbors(current)[sample_index(exploitation_row(state, current, g), rng)];
}

// ---------------------------------------------------------------------------

double learning_rate(std::size_t num_nodes, std::size_t horizon) {
  if (num_nodes < 2 || horizon < 2) {
    throw InvalidParameter("learning_rate needs N >= 2 and T >= 2");
  }
  const auto n = static_cast<double>(num_nodes);
  return std::sqrt(std::log(n) / (n * static_cast<double>(horizon)));
}

double exploration_param(double exploration_const, std::size_t horizon, std::size_t round) {
  if (horizon < 2) throw InvalidParameter("exploration parameter needs T >= 2");
  if (round < 1) throw InvalidParameter("exploration parameter needs k >= 1");
  const double a_log_t = exploration_const * std::log(static_cast<double>(horizon));
  const auto k = static_cast<double>(round);
  return std::sqrt(a_log_t / k) + a_log_t / (3.0 * k);
}

Exp3State::Exp3State(std::size_t num_nodes, std::size_t horizon_, const Exp3Params& params)
    : log_q(num_nodes, 0.0),
      pbar_sum(num_nodes, 0.0),
      available_rounds(num_nodes, 0),
      horizon(horizon_),
      cost_bound(params.cost_bound),
      neighbor_only_availability(params.neighbor_only_availability) {
  if (horizon < 2) throw InvalidParameter("exp3 walker needs horizon T >= 2");
  const auto n = static_cast<double>(num_nodes);
  if (params.exploration_const) {
    exploration_const = *params.exploration_const;
  } else if (params.full_exploration_const) {
    exploration_const = std::ldexp(1.0, static_cast<int>(num_nodes) + 2);
  } else {
    exploration_const = 4.0 * n;
  }
  if (!(exploration_const > 0.0)) throw InvalidParameter("exploration constant must be positive");
  eta = params.eta ? *params.eta : learning_rate(std::max<std::size_t>(num_nodes, 2), horizon);
  if (!(eta > 0.0)) throw InvalidParameter("eta must be positive");
  if (cost_bound && !(*cost_bound > 0.0)) throw InvalidParameter("cost bound must be positive");
}

double Exp3State::availability(NodeId node) const {
  const std::size_t denom = neighbor_only_availability ? available_rounds[node] : round;
  return denom == 0 ? 0.0 : pbar_sum[node] / static_cast<double>(denom);
}

std::vector<double> exp3_transition(const Exp3State& state, NodeId current, const Graph& g) {
  const auto nbrs = g.neighbors(current);
  std::vector<double> row(nbrs.size());
  double max_log = -INFINITY;
  for (NodeId j : nbrs) max_log = std::max(max_log, state.log_q[j]);
  double total = 0.0;
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    row[k] = std::exp(state.log_q[nbrs[k]] - max_log);
    total += row[k];
  }
  for (auto& v : row) v /= total;
  return row;
}

double exp3_log_decrement(double eta, double normalized_cost, double availability, double lambda) {
  return eta * normalized_cost / (availability + lambda);
}

void exp3_update(Exp3State& state, const Graph& g, const StepFeedback& fb) {
  if (!(fb.cost_estimate >= 0.0)) {
    throw InvalidParameter("exp3 feedback needs a nonnegative cost, got " +
                           std::to_string(fb.cost_estimate));
  }
  const auto nbrs = g.neighbors(fb.previous);
  if (fb.row.size() != nbrs.size()) throw std::logic_error("feedback row does not match neighbors");
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    state.pbar_sum[nbrs[k]] += fb.row[k];
    state.available_rounds[nbrs[k]] += 1;
  }
  state.round += 1;

  double normalized;
  if (state.cost_bound) {
    normalized = std::min(1.0, fb.cost_estimate / *state.cost_bound);
  } else {
    state.cost_scale = std::max(state.cost_scale, fb.cost_estimate);
    normalized = state.cost_scale > 0.0 ? fb.cost_estimate / state.cost_scale : 0.0;
  }
  const double lambda = exploration_param(state.exploration_const, state.horizon, state.round);
  state.log_q[fb.chosen] -=
      exp3_log_decrement(state.eta, normalized, state.availability(fb.chosen), lambda);
}

}  // namespace walklearn
