#include "walklearn/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "walklearn/config.hpp"
#include "walklearn/error.hpp"

namespace walklearn {

using nlohmann::json;

void validate(const ExperimentSpec& spec) {
  validate(spec.base, !spec.pool);
  if (spec.walkers.empty()) throw ConfigError("walkers: must not be empty");
  if (spec.seeds.empty()) throw ConfigError("seeds: must not be empty");
  if (spec.output_dir.empty()) throw ConfigError("output_dir: required");
  if (spec.jobs < 1) throw ConfigError("jobs: must be at least 1");
  if (!spec.similarities.empty() && !spec.pool) {
    throw ConfigError("similarities: sweeping similarity needs a pool block");
  }
  if (spec.pool && spec.similarities.empty()) {
    throw ConfigError("similarities: a pool block needs at least one similarity level");
  }
  for (int s : spec.similarities) {
    if (s < 0 || s > 100) throw ConfigError("similarities: values must lie in 0..100");
  }
  for (double p : spec.connectivities) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("connectivities: values must lie in (0, 1]");
  }
  if (spec.pool && !(spec.pool->test_fraction > 0.0 && spec.pool->test_fraction < 1.0)) {
    throw ConfigError("pool.test_fraction: must lie in (0, 1)");
  }
}

ExperimentSpec experiment_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment: expected an object");
  for (const auto& [key, _] : doc.items()) {
    static const char* allowed[] = {"base",  "walkers", "similarities", "connectivities",
                                    "seeds", "pool",    "output_dir",   "jobs"};
    if (std::find_if(std::begin(allowed), std::end(allowed),
                     [&](const char* a) { return key == a; }) == std::end(allowed)) {
      throw ConfigError(key + ": unknown field");
    }
  }
  ExperimentSpec spec;
  // A pool block supplies the data, so the base config may omit it.
  spec.base = run_config_from_json(doc.value("base", json::object()), !doc.contains("pool"));
  try {
    for (const auto& w : doc.value("walkers", json::array())) {
      spec.walkers.push_back(walker_kind_from_string(w.get<std::string>()));
    }
    spec.similarities = doc.value("similarities", std::vector<int>{});
    spec.connectivities = doc.value("connectivities", std::vector<double>{});
    spec.seeds = doc.value("seeds", std::vector<std::uint64_t>{});
    spec.output_dir = doc.value("output_dir", std::string{});
    spec.jobs = doc.value("jobs", std::size_t{1});
    if (doc.contains("pool")) {
      const auto& p = doc.at("pool");
      PoolSpec pool;
      pool.images = p.at("images").get<std::string>();
      pool.labels = p.at("labels").get<std::string>();
      pool.test_fraction = p.value("test_fraction", pool.test_fraction);
      pool.nodes = p.value("nodes", pool.nodes);
      spec.pool = pool;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("walkers: ") + e.what());
  }
  validate(spec);
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("experiment: cannot open " + path.string());
  try {
    return experiment_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("experiment: " + path.string() + ": " + e.what());
  }
}

std::vector<SweepCell> expand(const ExperimentSpec& spec) {
  std::vector<std::optional<int>> sims;
  for (int s : spec.similarities) sims.emplace_back(s);
  if (sims.empty()) sims.emplace_back();
  std::vector<std::optional<double>> conns;
  for (double p : spec.connectivities) conns.emplace_back(p);
  if (conns.empty()) conns.emplace_back();

  std::vector<SweepCell> cells;
  for (const auto& s : sims) {
    for (const auto& c : conns) {
      for (auto seed : spec.seeds) {
        for (auto walker : spec.walkers) cells.push_back(SweepCell{walker, s, c, seed});
      }
    }
  }
  return cells;
}

RunConfig cell_config(const ExperimentSpec& spec, const SweepCell& cell) {
  RunConfig cfg = spec.base;
  cfg.seed = cell.seed;
  cfg.walker.kind = cell.walker;
  if (cell.connectivity) {
    cfg.graph.kind = GraphKind::erdos_renyi;
    cfg.graph.p = *cell.connectivity;
    if (spec.pool) cfg.graph.nodes = spec.pool->nodes;
    cfg.graph.seed = cell.seed;
  }
  return cfg;
}

namespace {

RunInputs cell_inputs(const ExperimentSpec& spec, const SweepCell& cell,
                      std::span<const LabeledPoint> pool) {
  const RunConfig cfg = cell_config(spec, cell);
  if (!spec.pool) return load_inputs(cfg);
  if (pool.empty()) throw ConfigError("pool: no points loaded");
  auto split = split_pool(std::vector<LabeledPoint>(pool.begin(), pool.end()),
                          spec.pool->test_fraction, cell.seed);
  Partition partition =
      partition_by_similarity(split.train, spec.pool->nodes, cell.similarity.value_or(0), cell.seed);
  Graph graph = build_graph(cfg.graph);
  if (graph.num_nodes() != partition.num_nodes()) {
    throw ConfigError("graph: has " + std::to_string(graph.num_nodes()) +
                      " nodes but pool.nodes is " + std::to_string(partition.num_nodes()));
  }
  return RunInputs{std::move(graph), std::move(partition), std::move(split.test)};
}

}  // namespace

std::vector<CellResult> run_sweep(const ExperimentSpec& spec, std::span<const LabeledPoint> pool) {
  validate(spec);
  const auto cells = expand(spec);
  std::vector<CellResult> results(cells.size());

  // Group cells sharing data so each graph/partition is built once.
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::tuple<int, double, std::uint64_t>, std::size_t> group_of;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto key = std::make_tuple(cells[i].similarity.value_or(-1),
                                     cells[i].connectivity.value_or(-1.0), cells[i].seed);
    auto [it, inserted] = group_of.try_emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  std::atomic<std::size_t> next_group{0};
  const auto worker = [&] {
    for (std::size_t gi = next_group++; gi < groups.size(); gi = next_group++) {
      const auto& members = groups[gi];
      std::optional<RunInputs> inputs;
      std::string setup_error;
      try {
        inputs.emplace(cell_inputs(spec, cells[members.front()], pool));
      } catch (const std::exception& e) {
        setup_error = e.what();
      }
      for (std::size_t idx : members) {
        CellResult& out = results[idx];
        out.cell = cells[idx];
        if (!inputs) {
          out.error = setup_error;
          continue;
        }
        try {
          const auto result = run(cell_config(spec, cells[idx]), *inputs);
          out.rounds_to_target = result.rounds_to_target;
          out.final_accuracy = result.final_accuracy;
          out.rounds_run = result.rounds_run;
        } catch (const std::exception& e) {
          out.error = e.what();
        }
      }
    }
  };
  const std::size_t threads = std::min(spec.jobs, groups.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool_threads;
    for (std::size_t t = 0; t < threads; ++t) pool_threads.emplace_back(worker);
  }
  return results;
}

std::vector<AggregateRow> aggregate(std::span<const CellResult> results) {
  std::vector<AggregateRow> rows;
  std::vector<std::vector<double>> samples;
  for (const auto& r : results) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& row) {
      return row.walker == r.cell.walker && row.similarity == r.cell.similarity &&
             row.connectivity == r.cell.connectivity;
    });
    if (it == rows.end()) {
      rows.push_back(AggregateRow{r.cell.walker, r.cell.similarity, r.cell.connectivity, {}, 0, 0});
      samples.emplace_back();
      it = rows.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - rows.begin());
    it->runs += 1;
    if (!r.error.empty()) continue;
    if (r.rounds_to_target) {
      it->reached += 1;
      samples[idx].push_back(static_cast<double>(*r.rounds_to_target));
    } else {
      samples[idx].push_back(std::numeric_limits<double>::infinity());
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& s = samples[i];
    if (s.empty()) continue;
    std::sort(s.begin(), s.end());
    const std::size_t mid = s.size() / 2;
    const double median = s.size() % 2 == 1 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
    if (std::isfinite(median)) rows[i].median_rounds = median;
  }
  return rows;
}

namespace {

template <typename T>
std::string cell_value(const std::optional<T>& v) {
  if (!v) return "";
  char buf[32];
  if constexpr (std::is_integral_v<T>) {
    std::snprintf(buf, sizeof buf, "%d", static_cast<int>(*v));
  } else {
    std::snprintf(buf, sizeof buf, "%.10g", static_cast<double>(*v));
  }
  return buf;
}

}  // namespace

void write_results_csv(std::span<const CellResult> results, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "walker,similarity,connectivity,seed,rounds_to_target,final_accuracy,rounds_run,status\n";
  for (const auto& r : results) {
    char acc[32];
    std::snprintf(acc, sizeof acc, "%.10g", r.final_accuracy);
    out << to_string(r.cell.walker) << ',' << cell_value(r.cell.similarity) << ','
        << cell_value(r.cell.connectivity) << ',' << r.cell.seed << ','
        << (r.rounds_to_target ? std::to_string(*r.rounds_to_target) : "") << ','
        << (r.error.empty() ? acc : "") << ',' << r.rounds_run << ','
        << (r.error.empty() ? "ok" : "error") << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

void write_aggregate_csv(std::span<const AggregateRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "walker,similarity,connectivity,median_rounds_to_target,reached,runs\n";
  for (const auto& r : rows) {
    out << to_string(r.walker) << ',' << cell_value(r.similarity) << ','
        << cell_value(r.connectivity) << ',' << cell_value(r.median_rounds) << ',' << r.reached
        << ',' << r.runs << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

std::filesystem::path resolve_data_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || std::filesystem::exists(p)) return p;
  if (const char* root = std::getenv("WALKLEARN_DATA_DIR"); root && *root) {
    return std::filesystem::path(root) / p;
  }
  return p;
}

}  // namespace walklearn
