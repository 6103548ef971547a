#include "walklearn/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "walklearn/error.hpp"

namespace walklearn {

Graph build_graph(const GraphSpec& spec) {
  switch (spec.kind) {
    case GraphKind::margulis: return build_margulis(spec.side);
    case GraphKind::erdos_renyi: return build_erdos_renyi(spec.nodes, spec.p, spec.seed);
    case GraphKind::complete: return build_complete(spec.nodes);
    case GraphKind::cycle: return build_cycle(spec.nodes);
    case GraphKind::custom: return load_edge_list(spec.path);
  }
  throw ConfigError("graph.kind: unsupported");
}

void validate(const RunConfig& cfg, bool require_data) {
  if (!(cfg.step_exponent > 0.5 && cfg.step_exponent < 1.0)) {
    throw ConfigError("step_exponent: must lie in (0.5, 1), got " +
                      std::to_string(cfg.step_exponent));
  }
  if (!(cfg.step_scale > 0.0)) throw ConfigError("step_scale: must be positive");
  if (!(cfg.radius > 0.0)) throw ConfigError("radius: must be positive");
  if (cfg.horizon < 2) throw ConfigError("horizon: must be at least 2");
  if (cfg.eval_every < 1) throw ConfigError("eval_every: must be at least 1");
  if (!(cfg.target_accuracy >= 0.0 && cfg.target_accuracy <= 1.0)) {
    throw ConfigError("target_accuracy: must lie in [0, 1]");
  }
  if (cfg.graph.kind == GraphKind::custom && cfg.graph.path.empty()) {
    throw ConfigError("graph.path: required for custom graphs");
  }
  if (require_data && !cfg.data.synthetic &&
      (cfg.data.partition_path.empty() || cfg.data.test_path.empty())) {
    throw ConfigError("data: needs partition and test paths or a synthetic block");
  }
  const auto& e = cfg.walker.exp3;
  if (e.exploration_const && !(*e.exploration_const > 0.0)) {
    throw ConfigError("walker.exploration_const: must be positive");
  }
  if (e.eta && !(*e.eta > 0.0)) throw ConfigError("walker.eta: must be positive");
  if (e.cost_bound && !(*e.cost_bound > 0.0)) throw ConfigError("walker.cost_bound: must be positive");
}

double step_size(std::size_t round, double exponent, double scale) {
  if (!(exponent > 0.5 && exponent < 1.0)) {
    throw ConfigError("step_exponent: must lie in (0.5, 1), got " + std::to_string(exponent));
  }
  if (round < 1) throw InvalidParameter("step_size needs k >= 1");
  return scale / std::pow(static_cast<double>(round), exponent);
}

SgdStepResult sgd_step_at(const LossModel& m, ParamVector& w, const NodeDataset& ds,
                          std::size_t point_index, double p_sel, double gamma) {
  if (!(p_sel > 0.0 && p_sel <= 1.0)) {
    throw InvalidParameter("selection probability must lie in (0, 1], got " +
                           std::to_string(p_sel));
  }
  if (point_index >= ds.points.size()) throw InvalidParameter("point index out of range");
  const auto& pt = ds.points[point_index];
  std::vector<double> grad(m.param_size());
  point_grad(m, w.values, pt, grad);

  SgdStepResult out;
  out.point_index = point_index;
  out.grad_sq_norm = squared_norm(grad);
  out.cost_estimate = out.grad_sq_norm / static_cast<double>(ds.points.size());

  // ||grad|| <= ||x|| for the logistic loss, sqrt(2) ||x|| for softmax.
  const double bound_factor = m.kind == LossKind::binary_logistic ? 1.0 : 2.0;
  const double bound = bound_factor * squared_norm(pt.features);
  if (out.grad_sq_norm > bound * (1.0 + 1e-12) + 1e-300) {
    throw std::logic_error("sampled gradient exceeds the bounded-gradient envelope");
  }

  const double scale = gamma / p_sel;
  for (std::size_t k = 0; k < grad.size(); ++k) w.values[k] -= scale * grad[k];
  out.projected = project_in_place(w.values, w.radius);
  return out;
}

SgdStepResult sgd_step(const LossModel& m, ParamVector& w, const NodeDataset& ds, double p_sel,
                       double gamma, Rng& rng) {
  if (ds.points.empty()) throw InvalidParameter("sgd_step on an empty dataset");
  const auto idx = static_cast<std::size_t>(rng.below(ds.points.size()));
  return sgd_step_at(m, w, ds, idx, p_sel, gamma);
}

double selection_probability(const Walker& walker, const Graph& g, NodeId previous,
                             NodeId chosen) {
  return selection_probability(g, previous, chosen, walker.transition_row(g, previous));
}

HeterogeneityProbe heterogeneity_probe(const LossModel& m, const Partition& partition,
                                       std::span<const double> w) {
  HeterogeneityProbe out;
  std::vector<double> sum(m.param_size(), 0.0);
  for (const auto& node : partition.nodes) {
    const auto g = node_grad(m, w, node);
    out.mean_local_sq += squared_norm(g);
    for (std::size_t k = 0; k < g.size(); ++k) sum[k] += g[k];
  }
  const auto n = static_cast<double>(partition.nodes.size());
  out.mean_local_sq /= n;
  for (auto& v : sum) v /= n;
  out.global_sq = squared_norm(sum);
  return out;
}

ParamVector uniform_in_ball(std::size_t dim, double radius, Rng& rng) {
  ParamVector w{std::vector<double>(dim), radius};
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (auto& v : w.values) {
      v = rng.normal();
      norm_sq += v * v;
    }
  } while (norm_sq == 0.0);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
  const double scale = r / std::sqrt(norm_sq);
  for (auto& v : w.values) v *= scale;
  return w;
}

RunInputs load_inputs(const RunConfig& cfg) {
  validate(cfg);
  Graph graph = build_graph(cfg.graph);
  Partition partition;
  std::vector<LabeledPoint> test;
  if (cfg.data.synthetic) {
    auto data = gen_synthetic_gaussian(*cfg.data.synthetic);
    partition = std::move(data.train);
    test = std::move(data.test);
  } else {
    partition = load_partition(cfg.data.partition_path);
    test = load_points(cfg.data.test_path);
  }
  if (partition.num_nodes() != graph.num_nodes()) {
    throw ConfigError("graph: has " + std::to_string(graph.num_nodes()) +
                      " nodes but the partition has " + std::to_string(partition.num_nodes()));
  }
  return RunInputs{std::move(graph), std::move(partition), std::move(test)};
}

std::unique_ptr<Walker> make_walker(const WalkerConfig& cfg, const Graph& g,
                                    const Partition& partition, const LossModel& m,
                                    std::size_t horizon) {
  switch (cfg.kind) {
    case WalkerKind::uniform: return std::make_unique<UniformMhWalker>();
    case WalkerKind::weighted: {
      std::vector<double> lipschitz;
      lipschitz.reserve(partition.nodes.size());
      for (const auto& node : partition.nodes) lipschitz.push_back(lipschitz_constant(m, node));
      return std::make_unique<WeightedMhWalker>(std::move(lipschitz));
    }
    case WalkerKind::exploit: return std::make_unique<ExploitationWalker>(g.num_nodes());
    case WalkerKind::exp3: return std::make_unique<Exp3Walker>(g.num_nodes(), horizon, cfg.exp3);
  }
  throw ConfigError("walker.kind: unsupported");
}

namespace {

constexpr std::size_t kExactCostBudget = 100000;  // N * n per evaluation

double available_min(const Graph& g, NodeId previous, const std::vector<double>& costs) {
  double best = std::numeric_limits<double>::infinity();
  for (NodeId j : g.neighbors(previous)) best = std::min(best, costs[j]);
  return best;
}

}  // namespace

RunResult run(const RunConfig& cfg, const RunInputs& inputs, const IterateObserver& observer) {
  validate(cfg, false);
  const Graph& g = inputs.graph;
  const Partition& partition = inputs.partition;
  if (partition.num_nodes() != g.num_nodes()) {
    throw ConfigError("graph: node count does not match the partition");
  }
  validate(partition);
  if (inputs.test.empty()) throw ConfigError("data: held-out split is empty");

  const LossKind kind = cfg.model.value_or(partition.meta.num_classes > 2
                                               ? LossKind::multiclass_logistic
                                               : LossKind::binary_logistic);
  const LossModel model = model_for(partition.meta, kind);
  if (cfg.exact_cost_metrics &&
      partition.num_nodes() * partition.meta.local_size > kExactCostBudget) {
    throw ConfigError("exact_cost_metrics: N * n = " +
                      std::to_string(partition.num_nodes() * partition.meta.local_size) +
                      " exceeds the per-evaluation budget of " + std::to_string(kExactCostBudget));
  }

  auto walker = make_walker(cfg.walker, g, partition, model, cfg.horizon);
  Rng rng(cfg.seed);

  RunResult result;
  ParamVector w = uniform_in_ball(model.param_size(), cfg.radius, rng);
  auto current = static_cast<NodeId>(rng.below(g.num_nodes()));
  std::vector<double> average(w.values.size(), 0.0);
  double gamma_total = 0.0;
  double cumulative_cost = 0.0;
  double cumulative_regret = 0.0;
  result.trace.reserve(cfg.horizon);

  for (std::size_t k = 1; k <= cfg.horizon; ++k) {
    const auto row = walker->transition_row(g, current);
    const NodeId next = walker->step(g, current, row, rng);
    const double p_sel = selection_probability(g, current, next, row);
    const double gamma = step_size(k, cfg.step_exponent, cfg.step_scale);
    const bool eval_round = k % cfg.eval_every == 0 || k == cfg.horizon;

    RoundRecord rec;
    rec.round = k;
    rec.previous = current;
    rec.node = next;
    rec.gamma = gamma;
    rec.selection_prob = p_sel;

    if (cfg.exact_cost_metrics && eval_round) {
      auto profile = cost_profile(model, w.values, partition, k);
      rec.cost_exact = profile.costs[next];
      cumulative_regret += profile.costs[next] - available_min(g, current, profile.costs);
      rec.cumulative_regret = cumulative_regret;
      result.profiles.push_back(std::move(profile));
      result.profiled_steps.push_back(WalkStep{k, current, next});
    }

    const auto step = sgd_step(model, w, partition.nodes[next], p_sel, gamma, rng);
    walker->observe(g, StepFeedback{current, next, step.cost_estimate, step.grad_sq_norm, row});

    cumulative_cost += step.cost_estimate;
    rec.cost_estimate = step.cost_estimate;
    rec.cumulative_cost = cumulative_cost;
    rec.projected = step.projected;
    result.projections += step.projected ? 1 : 0;

    // Incremental form of sum_k gamma_k w_k / sum_k gamma_k.
    gamma_total += gamma;
    const double mix = gamma / gamma_total;
    for (std::size_t i = 0; i < average.size(); ++i) average[i] += mix * (w.values[i] - average[i]);
    if (observer) observer(k, w.values);

    bool reached = false;
    if (eval_round) {
      rec.evaluated = true;
      const auto eval = evaluate(model, w.values, inputs.test);
      rec.accuracy = eval.accuracy;
      if (cfg.eval_train_loss) rec.loss = training_loss(model, w.values, partition);
      result.final_accuracy = eval.accuracy;
      result.final_loss = rec.loss.value_or(eval.loss);
      if (!result.rounds_to_target && eval.accuracy >= cfg.target_accuracy) {
        result.rounds_to_target = k;
        reached = true;
      }
    }
    result.trace.push_back(rec);
    result.rounds_run = k;
    current = next;
    if (reached && cfg.stop_at_target) break;
  }

  if (g.num_nodes() <= 500) {
    DenseMatrix transition(g.num_nodes(), g.num_nodes());
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
      const auto row = walker->transition_row(g, i);
      const auto nbrs = g.neighbors(i);
      for (std::size_t k = 0; k < nbrs.size(); ++k) transition(i, nbrs[k]) = row[k];
    }
    result.spectral_diagnostic = spectral_diagnostic(g, transition);
  }

  result.final_w = w;
  result.averaged_w = ParamVector{std::move(average), cfg.radius};
  return result;
}

namespace {

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v, 10) : std::string();
}

}  // namespace

void write_trace_csv(const RunResult& result, std::ostream& out) {
  out << "k,node,gamma,cost_est,cost_exact,loss,accuracy,cum_cost,cum_regret,projected\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& r = result.trace[i];
    const bool last = i + 1 == result.trace.size();
    if (!r.evaluated && !last) continue;
    out << r.round << ',' << r.node << ',' << format_number(r.gamma, 10) << ','
        << format_number(r.cost_estimate, 10) << ',' << format_optional(r.cost_exact) << ','
        << format_optional(r.loss) << ',' << format_optional(r.accuracy) << ','
        << format_number(r.cumulative_cost, 10) << ',' << format_optional(r.cumulative_regret)
        << ',' << (r.projected ? 1 : 0) << '\n';
  }
}

void write_trace_csv(const RunResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_trace_csv(result, out);
  if (!out) throw Error("write failed for " + path.string());
}

void write_cost_profiles(const RunResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::size_t nodes = result.profiles.empty() ? 0 : result.profiles.front().costs.size();
  out << "k,prev,node";
  for (std::size_t i = 0; i < nodes; ++i) out << ",g_" << i;
  out << '\n';
  for (std::size_t t = 0; t < result.profiles.size(); ++t) {
    const auto& step = result.profiled_steps[t];
    out << step.round << ',' << step.previous << ',' << step.chosen;
    for (double c : result.profiles[t].costs) out << ',' << format_number(c, 17);
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

ProfiledWalk read_cost_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open cost profiles " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,prev,node", 0) != 0) {
    throw FormatError(path.string() + ":1: expected header 'k,prev,node,g_0,...'");
  }
  const auto nodes = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 2;
  ProfiledWalk out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != nodes + 3) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(nodes + 3) + " fields");
    }
    try {
      WalkStep step{std::stoull(cells[0]), static_cast<NodeId>(std::stoul(cells[1])),
                    static_cast<NodeId>(std::stoul(cells[2]))};
      CostProfile profile{step.round, {}};
      profile.costs.reserve(nodes);
      for (std::size_t i = 0; i < nodes; ++i) profile.costs.push_back(std::stod(cells[3 + i]));
      out.steps.push_back(step);
      out.profiles.push_back(std::move(profile));
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": unparsable number");
    }
  }
  return out;
}

}  // namespace walklearn
