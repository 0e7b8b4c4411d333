#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace phenosample::eval {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  /// Rows `index[0], index[1], ...` in that order.
  Matrix take_rows(std::span<const std::size_t> index) const;

  bool operator==(const Matrix&) const = default;
};

enum class TaskKind { classification, multilabel, regression, distribution };
enum class LossKind { cross_entropy, multilabel_soft_margin, presence_weighted_bce, mse, kl };
enum class Metric { accuracy, macro_f1, micro_f1, macro_auroc, micro_auroc, macro_map, micro_map, r2, mae, rmse };

std::string_view task_kind_name(TaskKind k);
TaskKind parse_task_kind(std::string_view s);
std::string_view loss_name(LossKind k);
LossKind parse_loss(std::string_view s);
std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view s);

/// Metrics that make sense for a task kind, in reporting order.
std::vector<Metric> applicable_metrics(TaskKind kind);

struct TaskSpec {
  TaskKind kind = TaskKind::classification;
  /// Classes, labels, regression targets or distribution bins.
  std::size_t outputs = 2;
  LossKind loss = LossKind::cross_entropy;
  /// Presence up-weighting for presence_weighted_bce.
  double pos_weight = 12.0;
  /// Requested metrics; the first one drives k selection. Empty means
  /// applicable_metrics(kind).
  std::vector<Metric> metrics;

  /// Throws ConfigError when the loss does not fit the kind, outputs == 0,
  /// pos_weight <= 0 or a requested metric is not applicable.
  void validate() const;
  Metric primary_metric() const;
  std::vector<Metric> reported_metrics() const;

  /// Default loss per kind: cross-entropy, multilabel soft margin, MSE, KL.
  static TaskSpec defaults(TaskKind kind, std::size_t outputs);
};

/// n x d embeddings with per-row ids.
struct EmbeddingTable {
  std::vector<std::int64_t> ids;
  Matrix values;

  std::size_t size() const { return values.rows; }
  std::size_t dim() const { return values.cols; }

  /// Throws ValidationError on non-finite entries or a shape mismatch.
  void validate() const;
};

/// `.csv`: one row per sample, "id,v1,...,vd" (an optional header line is
/// skipped). Anything else: JSON header {"n", "d", optional "ids"} with a
/// sibling `.bin` of row-major little-endian float32.
EmbeddingTable read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

/// One-hot encodes class indices.
Matrix one_hot(std::span<const int> classes, std::size_t num_classes);

/// Labels JSON-lines {"id": ..., "y": ...}, returned aligned to `ids`.
/// classification: integer class; multilabel: array of 0/1; regression:
/// number or array; distribution: array of non-negative proportions.
Matrix read_labels(const std::filesystem::path& path, const TaskSpec& task, std::span<const std::int64_t> ids);

/// Validates label rows against the task (one-hot rows, 0/1 entries,
/// distributions summing to 1 within 1e-6, finite targets).
void validate_labels(const Matrix& labels, const TaskSpec& task);

}  // namespace phenosample::eval
