#include "walklearn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <numeric>

#include "walklearn/error.hpp"
#include "walklearn/rng.hpp"

namespace walklearn {

using nlohmann::json;

std::string_view to_string(DataSource source) {
  return source == DataSource::synthetic ? "synthetic" : "idx_files";
}

DataSource data_source_from_string(std::string_view name) {
  if (name == "synthetic") return DataSource::synthetic;
  if (name == "idx_files" || name == "idx") return DataSource::idx_files;
  throw InvalidParameter("unknown data source '" + std::string(name) + "'");
}

void validate(const Partition& partition) {
  if (partition.nodes.empty()) throw InvalidParameter("partition has no nodes");
  const auto& meta = partition.meta;
  for (std::size_t i = 0; i < partition.nodes.size(); ++i) {
    const auto& node = partition.nodes[i];
    if (node.points.empty() || node.points.size() != meta.local_size) {
      throw InvalidParameter("node " + std::to_string(i) + " holds " +
                             std::to_string(node.points.size()) + " points, expected " +
                             std::to_string(meta.local_size));
    }
    for (const auto& pt : node.points) {
      if (pt.features.size() != meta.dim) {
        throw InvalidParameter("node " + std::to_string(i) + " has a point of dimension " +
                               std::to_string(pt.features.size()) + ", expected " +
                               std::to_string(meta.dim));
      }
      if (pt.label < 0 || static_cast<std::size_t>(pt.label) >= meta.num_classes) {
        throw InvalidParameter("node " + std::to_string(i) + " has label " +
                               std::to_string(pt.label) + " outside [0, " +
                               std::to_string(meta.num_classes) + ")");
      }
    }
  }
}

SyntheticData gen_synthetic_gaussian(const SyntheticParams& params) {
  if (params.num_nodes == 0 || params.num_nodes % 2 != 0) {
    throw InvalidParameter("synthetic data needs an even, positive node count, got " +
                           std::to_string(params.num_nodes));
  }
  if (params.local_size == 0) throw InvalidParameter("synthetic data needs n >= 1");
  if (!(params.sigma >= 0.0)) throw InvalidParameter("sigma must be nonnegative");

  Rng rng(params.seed);
  SyntheticData out;
  out.train.meta = {DataSource::synthetic, 0, params.seed, 3, 2, params.local_size};
  const std::size_t test_per_node = (params.local_size + 3) / 4;
  const auto draw = [&](double mx, double my, int label) {
    const double x = mx + params.sigma * rng.normal();
    const double y = my + params.sigma * rng.normal();
    return LabeledPoint{{x, y, 1.0}, label};
  };
  for (std::size_t i = 0; i < params.num_nodes; ++i) {
    const double mx = params.mean_range * (2.0 * rng.uniform() - 1.0);
    const double my = params.mean_range * (2.0 * rng.uniform() - 1.0);
    const int label = i < params.num_nodes / 2 ? 1 : 0;
    NodeDataset node{static_cast<std::uint32_t>(i), {}};
    node.points.reserve(params.local_size);
    for (std::size_t j = 0; j < params.local_size; ++j) node.points.push_back(draw(mx, my, label));
    for (std::size_t j = 0; j < test_per_node; ++j) out.test.push_back(draw(mx, my, label));
    out.train.nodes.push_back(std::move(node));
  }
  return out;
}

PoolSplit split_pool(std::vector<LabeledPoint> pool, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw InvalidParameter("test fraction must lie in [0, 1)");
  }
  Rng rng(seed);
  shuffle(pool, rng);
  const auto test_size =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(pool.size())));
  PoolSplit split;
  split.test.assign(std::make_move_iterator(pool.begin()),
                    std::make_move_iterator(pool.begin() + static_cast<std::ptrdiff_t>(test_size)));
  split.train.assign(std::make_move_iterator(pool.begin() + static_cast<std::ptrdiff_t>(test_size)),
                     std::make_move_iterator(pool.end()));
  return split;
}

std::size_t shared_points_per_node(std::size_t local_size, int similarity_pct) {
  return (static_cast<std::size_t>(similarity_pct) * local_size + 99) / 100;
}

Partition partition_by_similarity(std::span<const LabeledPoint> pool, std::size_t num_nodes,
                                  int similarity_pct, std::uint64_t seed) {
  if (similarity_pct < 0 || similarity_pct > 100) {
    throw InvalidParameter("similarity must be within 0..100, got " + std::to_string(similarity_pct));
  }
  if (num_nodes == 0) throw InvalidParameter("partition needs at least one node");
  if (pool.size() < num_nodes) {
    throw InvalidParameter("pool of " + std::to_string(pool.size()) + " points is too small for " +
                           std::to_string(num_nodes) + " nodes (need at least " +
                           std::to_string(num_nodes) + ")");
  }
  const std::size_t n = pool.size() / num_nodes;
  const std::size_t dim = pool.front().features.size();
  int max_label = 0;
  for (const auto& pt : pool) {
    if (pt.features.size() != dim) throw InvalidParameter("pool mixes feature dimensions");
    if (pt.label < 0) throw InvalidParameter("negative label in pool");
    max_label = std::max(max_label, pt.label);
  }

  Rng rng(seed);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);

  const auto s = static_cast<std::size_t>(similarity_pct);
  const std::size_t shared_size = (s * num_nodes * n + 99) / 100;
  const std::size_t per_node_shared = shared_points_per_node(n, similarity_pct);
  const std::vector<std::size_t> shared(order.begin(),
                                        order.begin() + static_cast<std::ptrdiff_t>(shared_size));
  std::vector<std::size_t> sorted(order.begin() + static_cast<std::ptrdiff_t>(shared_size),
                                  order.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::size_t a, std::size_t b) { return pool[a].label < pool[b].label; });

  Partition out;
  out.meta = {DataSource::idx_files, similarity_pct, seed, dim,
              static_cast<std::size_t>(max_label) + 1, n};
  const std::size_t chunk = n - per_node_shared;
  std::vector<std::size_t> scratch;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    NodeDataset node{static_cast<std::uint32_t>(i), {}};
    node.points.reserve(n);
    // Partial Fisher-Yates: distinct shared points within a node, nodes draw
    // independently of each other.
    scratch = shared;
    for (std::size_t j = 0; j < per_node_shared; ++j) {
      const auto pick = j + static_cast<std::size_t>(rng.below(scratch.size() - j));
      std::swap(scratch[j], scratch[pick]);
      node.points.push_back(pool[scratch[j]]);
    }
    for (std::size_t j = 0; j < chunk; ++j) node.points.push_back(pool[sorted[i * chunk + j]]);
    out.nodes.push_back(std::move(node));
  }
  return out;
}

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw FormatError(path.string() + ": truncated header at offset " + std::to_string(offset));
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

std::vector<LabeledPoint> load_idx(const std::filesystem::path& images_path,
                                   const std::filesystem::path& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);

  const std::uint32_t image_magic = read_be32(images, 0, images_path);
  if (image_magic != 0x00000803) {
    throw FormatError(images_path.string() + ": expected image magic 0x00000803 at offset 0");
  }
  const std::uint32_t label_magic = read_be32(labels, 0, labels_path);
  if (label_magic != 0x00000801) {
    throw FormatError(labels_path.string() + ": expected label magic 0x00000801 at offset 0");
  }
  const std::size_t count = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t label_count = read_be32(labels, 4, labels_path);
  if (count != label_count) {
    throw FormatError("image count " + std::to_string(count) + " != label count " +
                      std::to_string(label_count) + " (offset 4)");
  }
  const std::size_t pixels = rows * cols;
  constexpr std::size_t image_header = 16;
  constexpr std::size_t label_header = 8;
  if (images.size() < image_header + count * pixels) {
    throw FormatError(images_path.string() + ": truncated at offset " +
                      std::to_string(images.size()) + ", expected " +
                      std::to_string(image_header + count * pixels) + " bytes");
  }
  if (labels.size() < label_header + count) {
    throw FormatError(labels_path.string() + ": truncated at offset " +
                      std::to_string(labels.size()) + ", expected " +
                      std::to_string(label_header + count) + " bytes");
  }

  std::vector<LabeledPoint> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto& pt = out[i];
    pt.features.resize(pixels + 1);
    const unsigned char* src = images.data() + image_header + i * pixels;
    for (std::size_t p = 0; p < pixels; ++p) pt.features[p] = src[p] / 255.0;
    pt.features[pixels] = 1.0;
    pt.label = labels[label_header + i];
  }
  return out;
}

std::vector<std::size_t> label_histogram(std::span<const LabeledPoint> points,
                                         std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (const auto& pt : points) {
    if (pt.label >= 0 && static_cast<std::size_t>(pt.label) < num_classes) ++counts[pt.label];
  }
  return counts;
}

namespace {

json point_to_json(const LabeledPoint& pt) {
  json row = json::array();
  for (double v : pt.features) row.push_back(v);
  row.push_back(pt.label);
  return row;
}

LabeledPoint point_from_json(const json& row, std::size_t dim, const std::string& where) {
  if (!row.is_array() || row.size() != dim + 1) {
    throw FormatError(where + ": expected " + std::to_string(dim + 1) + " numbers");
  }
  LabeledPoint pt;
  pt.features.reserve(dim);
  for (std::size_t k = 0; k < dim; ++k) pt.features.push_back(row[k].get<double>());
  pt.label = static_cast<int>(row[dim].get<double>());
  return pt;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what() + " (byte " + std::to_string(e.byte) + ")");
  }
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void save_partition(const Partition& partition, const std::filesystem::path& path) {
  const auto& meta = partition.meta;
  json doc;
  doc["N"] = partition.nodes.size();
  doc["n"] = meta.local_size;
  doc["d"] = meta.dim;
  doc["K"] = meta.num_classes;
  doc["similarity_pct"] = meta.similarity_pct;
  doc["seed"] = meta.seed;
  doc["source"] = to_string(meta.source);
  json nodes = json::array();
  for (const auto& node : partition.nodes) {
    json rows = json::array();
    for (const auto& pt : node.points) rows.push_back(point_to_json(pt));
    nodes.push_back(std::move(rows));
  }
  doc["nodes"] = std::move(nodes);
  write_json(doc, path);
}

Partition load_partition(const std::filesystem::path& path) {
  const json doc = read_json(path);
  const std::string where = path.string();
  Partition out;
  try {
    const auto num_nodes = doc.at("N").get<std::size_t>();
    out.meta.local_size = doc.at("n").get<std::size_t>();
    out.meta.dim = doc.at("d").get<std::size_t>();
    out.meta.num_classes = doc.at("K").get<std::size_t>();
    out.meta.similarity_pct = doc.at("similarity_pct").get<int>();
    out.meta.seed = doc.at("seed").get<std::uint64_t>();
    out.meta.source = data_source_from_string(doc.at("source").get<std::string>());
    const auto& nodes = doc.at("nodes");
    if (!nodes.is_array() || nodes.size() != num_nodes) {
      throw FormatError(where + ": header says N=" + std::to_string(num_nodes) + " but file has " +
                        std::to_string(nodes.is_array() ? nodes.size() : 0) + " nodes");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      NodeDataset node{static_cast<std::uint32_t>(i), {}};
      for (std::size_t j = 0; j < nodes[i].size(); ++j) {
        node.points.push_back(point_from_json(
            nodes[i][j], out.meta.dim,
            where + ": node " + std::to_string(i) + " point " + std::to_string(j)));
      }
      out.nodes.push_back(std::move(node));
    }
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  } catch (const InvalidParameter& e) {
    throw FormatError(where + ": " + e.what());
  }
  try {
    validate(out);
  } catch (const InvalidParameter& e) {
    throw FormatError(where + ": " + e.what());
  }
  return out;
}

void save_points(std::span<const LabeledPoint> points, std::size_t num_classes,
                 const std::filesystem::path& path) {
  json doc;
  doc["d"] = points.empty() ? 0 : points.front().features.size();
  doc["K"] = num_classes;
  json rows = json::array();
  for (const auto& pt : points) rows.push_back(point_to_json(pt));
  doc["points"] = std::move(rows);
  write_json(doc, path);
}

std::vector<LabeledPoint> load_points(const std::filesystem::path& path) {
  const json doc = read_json(path);
  std::vector<LabeledPoint> out;
  try {
    const auto dim = doc.at("d").get<std::size_t>();
    const auto& rows = doc.at("points");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      out.push_back(point_from_json(rows[j], dim, path.string() + ": point " + std::to_string(j)));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace walklearn
