#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "walklearn/data.hpp"

namespace walklearn {

enum class LossKind { binary_logistic, multiclass_logistic };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// Model parameters inside the feasible L2 ball of radius `radius`.
/// Multiclass weights are row-major, one row of `dim` entries per class.
struct ParamVector {
  std::vector<double> values;
  double radius = 100.0;

  double norm() const;
};

struct LossModel {
  LossKind kind = LossKind::multiclass_logistic;
  std::size_t dim = 0;
  std::size_t num_classes = 2;

  std::size_t param_size() const {
    return kind == LossKind::binary_logistic ? dim : dim * num_classes;
  }
};

/// Loss model matching a partition: binary for K == 2 unless forced.
LossModel model_for(const PartitionMeta& meta, LossKind kind);

double point_loss(const LossModel& m, std::span<const double> w, const LabeledPoint& pt);

/// Gradient of the per-point loss written into `out` (size param_size()).
/// Returns the point loss, which comes for free.
double point_grad(const LossModel& m, std::span<const double> w, const LabeledPoint& pt,
                  std::span<double> out);
std::vector<double> point_grad(const LossModel& m, std::span<const double> w,
                               const LabeledPoint& pt);

/// Mean of the per-point gradients, i.e. the local gradient of F_i.
std::vector<double> node_grad(const LossModel& m, std::span<const double> w,
                              const NodeDataset& ds);

/// Mean of node gradients over all nodes (the global gradient).
std::vector<double> global_grad(const LossModel& m, std::span<const double> w,
                                const Partition& partition);

/// Euclidean projection onto the ball. Returns true when w was outside.
bool project_in_place(std::span<double> w, double radius);
ParamVector project(ParamVector w);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean loss and accuracy. Binary predictions use sign(<w,x>) with
/// sign(0) = +1; multiclass argmax breaks ties toward the lower class.
Evaluation evaluate(const LossModel& m, std::span<const double> w,
                    std::span<const LabeledPoint> points);

/// Mean loss over every point of every node.
double training_loss(const LossModel& m, std::span<const double> w, const Partition& partition);

/// Smoothness constant of the node's mean loss: sum ||x||^2 / (4n) for the
/// binary loss and / (2n) for softmax.
double lipschitz_constant(const LossModel& m, const NodeDataset& ds);

double squared_norm(std::span<const double> v);

}  // namespace walklearn
