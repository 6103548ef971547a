#include "walklearn/model.hpp"

#include <algorithm>
#include <cmath>

#include "walklearn/error.hpp"

namespace walklearn {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::binary_logistic ? "binary_logistic" : "multiclass_logistic";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "binary_logistic" || name == "binary") return LossKind::binary_logistic;
  if (name == "multiclass_logistic" || name == "multiclass") return LossKind::multiclass_logistic;
  throw InvalidParameter("unknown model kind '" + std::string(name) + "'");
}

double ParamVector::norm() const { return std::sqrt(squared_norm(values)); }

LossModel model_for(const PartitionMeta& meta, LossKind kind) {
  if (kind == LossKind::binary_logistic && meta.num_classes > 2) {
    throw InvalidParameter("binary model on a partition with " +
                           std::to_string(meta.num_classes) + " classes");
  }
  return {kind, meta.dim, std::max<std::size_t>(meta.num_classes, 2)};
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double signed_label(const LabeledPoint& pt) { return pt.label == 1 ? 1.0 : -1.0; }

void check_dims(const LossModel& m, std::span<const double> w, const LabeledPoint& pt) {
  if (pt.features.size() != m.dim || w.size() != m.param_size()) {
    throw InvalidParameter("dimension mismatch: model d=" + std::to_string(m.dim) + " params=" +
                           std::to_string(m.param_size()) + ", got point d=" +
                           std::to_string(pt.features.size()) + " params=" +
                           std::to_string(w.size()));
  }
  if (m.kind == LossKind::multiclass_logistic &&
      (pt.label < 0 || static_cast<std::size_t>(pt.label) >= m.num_classes)) {
    throw InvalidParameter("label " + std::to_string(pt.label) + " outside model classes");
  }
}

// Softmax probabilities written into `probs`; returns log-sum-exp of logits.
double softmax(const LossModel& m, std::span<const double> w, std::span<const double> x,
               std::vector<double>& probs) {
  probs.resize(m.num_classes);
  double max_logit = -INFINITY;
  for (std::size_t c = 0; c < m.num_classes; ++c) {
    probs[c] = dot(w.subspan(c * m.dim, m.dim), x);
    max_logit = std::max(max_logit, probs[c]);
  }
  double total = 0.0;
  for (auto& p : probs) {
    p = std::exp(p - max_logit);
    total += p;
  }
  for (auto& p : probs) p /= total;
  return max_logit + std::log(total);
}

}  // namespace

double point_loss(const LossModel& m, std::span<const double> w, const LabeledPoint& pt) {
  check_dims(m, w, pt);
  if (m.kind == LossKind::binary_logistic) {
    return softplus(-signed_label(pt) * dot(w, pt.features));
  }
  std::vector<double> probs;
  const double lse = softmax(m, w, pt.features, probs);
  return lse - dot(w.subspan(static_cast<std::size_t>(pt.label) * m.dim, m.dim), pt.features);
}

double point_grad(const LossModel& m, std::span<const double> w, const LabeledPoint& pt,
                  std::span<double> out) {
  check_dims(m, w, pt);
  if (out.size() != m.param_size()) throw InvalidParameter("gradient buffer has the wrong size");
  const auto& x = pt.features;
  if (m.kind == LossKind::binary_logistic) {
    const double y = signed_label(pt);
    const double margin = y * dot(w, x);
    const double scale = -y * sigmoid(-margin);
    for (std::size_t k = 0; k < m.dim; ++k) out[k] = scale * x[k];
    return softplus(-margin);
  }
  std::vector<double> probs;
  const double lse = softmax(m, w, x, probs);
  const auto y = static_cast<std::size_t>(pt.label);
  const double true_logit = dot(w.subspan(y * m.dim, m.dim), x);
  for (std::size_t c = 0; c < m.num_classes; ++c) {
    const double coeff = probs[c] - (c == y ? 1.0 : 0.0);
    double* row = out.data() + c * m.dim;
    for (std::size_t k = 0; k < m.dim; ++k) row[k] = coeff * x[k];
  }
  return lse - true_logit;
}

std::vector<double> point_grad(const LossModel& m, std::span<const double> w,
                               const LabeledPoint& pt) {
  std::vector<double> out(m.param_size());
  point_grad(m, w, pt, out);
  return out;
}

std::vector<double> node_grad(const LossModel& m, std::span<const double> w,
                              const NodeDataset& ds) {
  if (ds.points.empty()) {
    throw InvalidParameter("node " + std::to_string(ds.node_id) + " has an empty dataset");
  }
  std::vector<double> sum(m.param_size(), 0.0);
  std::vector<double> g(m.param_size());
  for (const auto& pt : ds.points) {
    point_grad(m, w, pt, g);
    for (std::size_t k = 0; k < g.size(); ++k) sum[k] += g[k];
  }
  const double inv = 1.0 / static_cast<double>(ds.points.size());
  for (auto& v : sum) v *= inv;
  return sum;
}

std::vector<double> global_grad(const LossModel& m, std::span<const double> w,
                                const Partition& partition) {
  std::vector<double> sum(m.param_size(), 0.0);
  for (const auto& node : partition.nodes) {
    const auto g = node_grad(m, w, node);
    for (std::size_t k = 0; k < g.size(); ++k) sum[k] += g[k];
  }
  const double inv = 1.0 / static_cast<double>(partition.nodes.size());
  for (auto& v : sum) v *= inv;
  return sum;
}

bool project_in_place(std::span<double> w, double radius) {
  const double norm = std::sqrt(squared_norm(w));
  // Slack absorbs the rounding of a previous projection, keeping it idempotent.
  if (norm <= radius * (1.0 + 1e-12)) return false;
  const double scale = radius / norm;
  for (auto& v : w) v *= scale;
  return true;
}

ParamVector project(ParamVector w) {
  project_in_place(w.values, w.radius);
  return w;
}

Evaluation evaluate(const LossModel& m, std::span<const double> w,
                    std::span<const LabeledPoint> points) {
  if (points.empty()) throw InvalidParameter("evaluate needs a non-empty point set");
  Evaluation out;
  std::size_t correct = 0;
  std::vector<double> probs;
  for (const auto& pt : points) {
    check_dims(m, w, pt);
    if (m.kind == LossKind::binary_logistic) {
      const double z = dot(w, pt.features);
      out.loss += softplus(-signed_label(pt) * z);
      correct += static_cast<std::size_t>((z >= 0.0 ? 1 : 0) == (pt.label == 1 ? 1 : 0));
    } else {
      const double lse = softmax(m, w, pt.features, probs);
      const auto y = static_cast<std::size_t>(pt.label);
      out.loss += lse - dot(w.subspan(y * m.dim, m.dim), pt.features);
      const auto best = static_cast<std::size_t>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
      correct += static_cast<std::size_t>(best == y);
    }
  }
  const auto count = static_cast<double>(points.size());
  out.loss /= count;
  out.accuracy = static_cast<double>(correct) / count;
  return out;
}

double training_loss(const LossModel& m, std::span<const double> w, const Partition& partition) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& node : partition.nodes) {
    total += evaluate(m, w, node.points).loss * static_cast<double>(node.points.size());
    count += node.points.size();
  }
  return total / static_cast<double>(count);
}

double lipschitz_constant(const LossModel& m, const NodeDataset& ds) {
  if (ds.points.empty()) throw InvalidParameter("lipschitz_constant needs a non-empty dataset");
  double sum = 0.0;
  for (const auto& pt : ds.points) sum += squared_norm(pt.features);
  const double n = static_cast<double>(ds.points.size());
  switch (m.kind) {
    case LossKind::binary_logistic: return sum / (4.0 * n);
    case LossKind::multiclass_logistic: return sum / (2.0 * n);
  }
  throw InvalidParameter("unsupported model kind for lipschitz_constant");
}

}  // namespace walklearn
