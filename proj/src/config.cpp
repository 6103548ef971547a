#include "walklearn/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string>

#include "walklearn/error.hpp"

namespace walklearn {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& prefix) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "config: expected an object"
                                                         : prefix + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* name : allowed) known = known || key == name;
    if (!known) throw ConfigError((prefix.empty() ? key : prefix + "." + key) + ": unknown field");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& prefix) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError((prefix.empty() ? std::string(key) : prefix + "." + key) +
                      ": wrong type");
  }
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& out,
                   const std::string& prefix) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, key, value, prefix);
  out = value;
}

template <typename Enum, typename Parse>
void read_enum(const json& obj, const char* key, Enum& out, const std::string& field, Parse parse) {
  if (!obj.contains(key)) return;
  try {
    out = parse(obj.at(key).get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace

RunConfig run_config_from_json(const json& doc, bool require_data) {
  reject_unknown(doc,
                 {"graph", "data", "model", "walker", "step_exponent", "step_scale", "radius",
                  "horizon", "seed", "eval_every", "exact_cost_metrics", "eval_train_loss",
                  "target_accuracy", "stop_at_target"},
                 "");
  RunConfig cfg;
  if (doc.contains("graph")) {
    const auto& g = doc.at("graph");
    reject_unknown(g, {"kind", "nodes", "side", "p", "seed", "path"}, "graph");
    read_enum(g, "kind", cfg.graph.kind, "graph.kind", graph_kind_from_string);
    read(g, "nodes", cfg.graph.nodes, "graph");
    read(g, "side", cfg.graph.side, "graph");
    read(g, "p", cfg.graph.p, "graph");
    read(g, "seed", cfg.graph.seed, "graph");
    read(g, "path", cfg.graph.path, "graph");
  }
  if (doc.contains("data")) {
    const auto& d = doc.at("data");
    reject_unknown(d, {"partition", "test", "synthetic"}, "data");
    read(d, "partition", cfg.data.partition_path, "data");
    read(d, "test", cfg.data.test_path, "data");
    if (d.contains("synthetic") && !d.at("synthetic").is_null()) {
      const auto& s = d.at("synthetic");
      reject_unknown(s, {"nodes", "local_n", "sigma", "mean_range", "seed"}, "data.synthetic");
      SyntheticParams p;
      read(s, "nodes", p.num_nodes, "data.synthetic");
      read(s, "local_n", p.local_size, "data.synthetic");
      read(s, "sigma", p.sigma, "data.synthetic");
      read(s, "mean_range", p.mean_range, "data.synthetic");
      read(s, "seed", p.seed, "data.synthetic");
      cfg.data.synthetic = p;
    }
  }
  if (doc.contains("model") && !doc.at("model").is_null()) {
    LossKind kind{};
    read_enum(doc, "model", kind, "model", loss_kind_from_string);
    cfg.model = kind;
  }
  if (doc.contains("walker")) {
    const auto& w = doc.at("walker");
    reject_unknown(w,
                   {"kind", "exploration_const", "full_exploration_const", "eta", "cost_bound",
                    "neighbor_only_availability"},
                   "walker");
    read_enum(w, "kind", cfg.walker.kind, "walker.kind", walker_kind_from_string);
    read_optional(w, "exploration_const", cfg.walker.exp3.exploration_const, "walker");
    read(w, "full_exploration_const", cfg.walker.exp3.full_exploration_const, "walker");
    read_optional(w, "eta", cfg.walker.exp3.eta, "walker");
    read_optional(w, "cost_bound", cfg.walker.exp3.cost_bound, "walker");
    read(w, "neighbor_only_availability", cfg.walker.exp3.neighbor_only_availability, "walker");
  }
  read(doc, "step_exponent", cfg.step_exponent, "");
  read(doc, "step_scale", cfg.step_scale, "");
  read(doc, "radius", cfg.radius, "");
  read(doc, "horizon", cfg.horizon, "");
  read(doc, "seed", cfg.seed, "");
  read(doc, "eval_every", cfg.eval_every, "");
  read(doc, "exact_cost_metrics", cfg.exact_cost_metrics, "");
  read(doc, "eval_train_loss", cfg.eval_train_loss, "");
  read(doc, "target_accuracy", cfg.target_accuracy, "");
  read(doc, "stop_at_target", cfg.stop_at_target, "");
  validate(cfg, require_data);
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json doc;
  doc["graph"] = {{"kind", to_string(cfg.graph.kind)},
                  {"nodes", cfg.graph.nodes},
                  {"side", cfg.graph.side},
                  {"p", cfg.graph.p},
                  {"seed", cfg.graph.seed},
                  {"path", cfg.graph.path}};
  json data = {{"partition", cfg.data.partition_path}, {"test", cfg.data.test_path}};
  if (cfg.data.synthetic) {
    const auto& s = *cfg.data.synthetic;
    data["synthetic"] = {{"nodes", s.num_nodes},
                         {"local_n", s.local_size},
                         {"sigma", s.sigma},
                         {"mean_range", s.mean_range},
                         {"seed", s.seed}};
  }
  doc["data"] = std::move(data);
  doc["model"] = cfg.model ? json(to_string(*cfg.model)) : json(nullptr);
  const auto& e = cfg.walker.exp3;
  doc["walker"] = {{"kind", to_string(cfg.walker.kind)},
                   {"exploration_const", e.exploration_const ? json(*e.exploration_const) : json()},
                   {"full_exploration_const", e.full_exploration_const},
                   {"eta", e.eta ? json(*e.eta) : json()},
                   {"cost_bound", e.cost_bound ? json(*e.cost_bound) : json()},
                   {"neighbor_only_availability", e.neighbor_only_availability}};
  doc["step_exponent"] = cfg.step_exponent;
  doc["step_scale"] = cfg.step_scale;
  doc["radius"] = cfg.radius;
  doc["horizon"] = cfg.horizon;
  doc["seed"] = cfg.seed;
  doc["eval_every"] = cfg.eval_every;
  doc["exact_cost_metrics"] = cfg.exact_cost_metrics;
  doc["eval_train_loss"] = cfg.eval_train_loss;
  doc["target_accuracy"] = cfg.target_accuracy;
  doc["stop_at_target"] = cfg.stop_at_target;
  return doc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return run_config_from_json(doc);
}

}  // namespace walklearn
