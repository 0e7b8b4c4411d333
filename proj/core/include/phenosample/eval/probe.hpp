#pragma once

#include <cstdint>
#include <vector>

#include "phenosample/eval/data.hpp"

namespace phenosample::eval {

struct ProbeConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 1000;
  std::size_t patience = 20;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Standardise features with train statistics before the affine layer.
  bool standardize = true;

  void validate() const;
};

/// logits = x * weights + bias, weights is d x C.
struct AffineMap {
  Matrix weights;
  std::vector<double> bias;

  Matrix logits(const Matrix& x) const;
};

/// Mean task loss over the rows of `logits`. When `grad` is non-null it
/// receives dLoss/dlogits.
///   cross_entropy           -sum_c y log softmax(z)_c
///   multilabel_soft_margin  mean_c [y softplus(-z) + (1-y) softplus(z)]
///   presence_weighted_bce   mean_c [w y softplus(-z) + (1-y) softplus(z)]
///   mse                     mean_c (z - y)^2
///   kl                      sum_c y (log y - log softmax(z)_c), 0 log 0 = 0
double task_loss(const Matrix& logits, const Matrix& targets, const TaskSpec& task, Matrix* grad = nullptr);

struct AffineGradient {
  double loss = 0.0;
  Matrix weights;
  std::vector<double> bias;
};

/// Loss of `map` on (x, y) and its gradient with respect to weights and bias.
AffineGradient loss_and_gradient(const AffineMap& map, const Matrix& x, const Matrix& y, const TaskSpec& task);

/// Task outputs from logits: softmax for classification and distribution,
/// sigmoid for multilabel, identity for regression.
Matrix outputs_from_logits(const Matrix& logits, const TaskSpec& task);

struct LinearProbe {
  AffineMap map;
  std::vector<double> mean;   // per feature, empty when not standardising
  std::vector<double> scale;  // per feature
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<double> train_loss_history;  // per epoch, full-train loss
  std::vector<double> val_loss_history;

  Matrix transform(const Matrix& x) const;
  Matrix logits(const Matrix& x) const { return map.logits(transform(x)); }
  Matrix predict(const Matrix& x, const TaskSpec& task) const { return outputs_from_logits(logits(x), task); }
};

/// Zero-initialised affine layer trained with mini-batch AdamW (weight decay
/// on weights only). Stops after max_epochs or once the validation loss has
/// not improved for `patience` epochs, and returns the best-validation
/// snapshot. With an empty validation set the train loss is monitored.
/// Throws NumericError naming the epoch if the loss becomes non-finite.
LinearProbe train_linear_probe(const Matrix& train_x, const Matrix& train_y, const Matrix& val_x,
                               const Matrix& val_y, const TaskSpec& task, const ProbeConfig& cfg,
                               std::uint64_t seed);

}  // namespace phenosample::eval
