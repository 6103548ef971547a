#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "walklearn/error.hpp"
#include "walklearn/sweep.hpp"

using namespace walklearn;
using nlohmann::json;

namespace {

json synthetic_spec() {
  return json::parse(R"({
    "base": {"graph": {"kind": "erdos_renyi", "nodes": 16, "p": 0.5},
             "data": {"synthetic": {"nodes": 16, "local_n": 10, "seed": 1}},
             "horizon": 200, "radius": 5, "step_scale": 0.1, "eval_every": 20,
             "target_accuracy": 0.6},
    "walkers": ["exp3", "uniform"],
    "connectivities": [0.3, 0.8],
    "seeds": [1, 2, 3],
    "output_dir": "unused"})");
}

}  // namespace

TEST_CASE("spec parsing and validation") {
  const auto spec = experiment_from_json(synthetic_spec());
  CHECK(spec.walkers.size() == 2);
  CHECK(spec.seeds.size() == 3);
  CHECK(spec.jobs == 1);

  auto doc = synthetic_spec();
  doc["seeds"] = json::array();
  CHECK_THROWS_AS(experiment_from_json(doc), ConfigError);

  doc = synthetic_spec();
  doc["similarities"] = {0, 10};
  CHECK_THROWS_AS(experiment_from_json(doc), ConfigError);

  doc = synthetic_spec();
  doc["walkers"] = {"greedy"};
  CHECK_THROWS_AS(experiment_from_json(doc), ConfigError);

  doc = synthetic_spec();
  doc["extra"] = 1;
  CHECK_THROWS_AS(experiment_from_json(doc), ConfigError);

  doc = synthetic_spec();
  doc["connectivities"] = {0.0};
  CHECK_THROWS_AS(experiment_from_json(doc), ConfigError);

  // A pool supplies data, so the base may omit it.
  doc = synthetic_spec();
  doc["base"].erase("data");
  doc["pool"] = {{"images", "i"}, {"labels", "l"}};
  doc["similarities"] = {0, 100};
  CHECK_NOTHROW(experiment_from_json(doc));
}

TEST_CASE("expansion order") {
  auto doc = synthetic_spec();
  const auto spec = experiment_from_json(doc);
  const auto cells = expand(spec);
  REQUIRE(cells.size() == 12);
  CHECK(cells[0].walker == WalkerKind::exp3);
  CHECK(cells[1].walker == WalkerKind::uniform);
  CHECK(cells[0].seed == 1);
  CHECK(cells[2].seed == 2);
  CHECK(*cells[0].connectivity == 0.3);
  CHECK(*cells[6].connectivity == 0.8);

  const auto cfg = cell_config(spec, cells[7]);
  CHECK(cfg.graph.kind == GraphKind::erdos_renyi);
  CHECK(cfg.graph.p == 0.8);
  CHECK(cfg.seed == cells[7].seed);
  CHECK(cfg.walker.kind == WalkerKind::uniform);
}

TEST_CASE("aggregate medians count misses as infinite") {
  std::vector<CellResult> r(4);
  for (auto& c : r) c.cell.walker = WalkerKind::exp3;
  r[0].rounds_to_target = 10;
  r[1].rounds_to_target = 30;
  r[2].rounds_to_target = 20;
  const auto rows = aggregate(std::span<const CellResult>(r).subspan(0, 3));
  REQUIRE(rows.size() == 1);
  CHECK(*rows[0].median_rounds == 20.0);
  CHECK(rows[0].reached == 3);
  // Four runs, one miss: median of {10, 20, 30, inf} = 25.
  const auto four = aggregate(r);
  CHECK(*four[0].median_rounds == 25.0);
  CHECK(four[0].reached == 3);
  CHECK(four[0].runs == 4);
  r[0].rounds_to_target.reset();
  r[1].rounds_to_target.reset();
  CHECK_FALSE(aggregate(r)[0].median_rounds.has_value());
}

TEST_CASE("sweep results do not depend on the worker count") {
  auto spec = experiment_from_json(synthetic_spec());
  const auto serial = run_sweep(spec, {});
  spec.jobs = 3;
  const auto parallel = run_sweep(spec, {});
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].error.empty());
    CHECK(serial[i].rounds_to_target == parallel[i].rounds_to_target);
    CHECK(serial[i].final_accuracy == parallel[i].final_accuracy);
    CHECK(serial[i].cell.seed == parallel[i].cell.seed);
  }
}

TEST_CASE("per-cell failures are recorded") {
  auto doc = synthetic_spec();
  doc["connectivities"] = {0.001};
  auto spec = experiment_from_json(doc);
  spec.seeds = {1};
  const auto results = run_sweep(spec, {});
  REQUIRE(results.size() == 2);
  for (const auto& r : results) CHECK_FALSE(r.error.empty());
}

TEST_CASE("data path resolution") {
  CHECK(resolve_data_path("/abs/file") == std::filesystem::path("/abs/file"));
  setenv("WALKLEARN_DATA_DIR", "/data/root", 1);
  CHECK(resolve_data_path("mnist/x") == std::filesystem::path("/data/root/mnist/x"));
  unsetenv("WALKLEARN_DATA_DIR");
  CHECK(resolve_data_path("mnist/x") == std::filesystem::path("mnist/x"));
}
