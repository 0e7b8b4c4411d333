#pragma once

#include <span>
#include <vector>

#include "phenosample/eval/data.hpp"

namespace phenosample::eval {

struct KnnConfig {
  std::size_t k = 20;
  double temperature = 0.07;
  std::vector<std::size_t> k_grid{1, 3, 5, 10, 20, 50, 100};

  void validate() const;
};

/// Rows scaled to unit L2 norm. Throws Error on a zero or non-finite row.
Matrix normalize_rows(const Matrix& m);

/// Neighbour of a query: train row and cosine similarity.
struct Neighbor {
  std::size_t index = 0;
  double similarity = 0.0;
};

/// Reference set for cosine k-NN. Embeddings are normalised once at
/// construction.
class KnnIndex {
 public:
  KnnIndex(const Matrix& embeddings, Matrix labels);

  std::size_t size() const { return unit_.rows; }

  /// k most similar train rows, by similarity descending then index ascending.
  std::vector<Neighbor> neighbors(std::span<const double> unit_query, std::size_t k) const;

  /// Scores per query row. Neighbour weights are exp(similarity / temperature).
  /// classification: normalised per-class weight sums; multilabel: weighted
  /// mean of the binary label vectors; regression: weighted mean of targets;
  /// distribution: weighted mean renormalised to sum 1.
  Matrix predict(const Matrix& queries, std::size_t k, double temperature, const TaskSpec& task) const;

 private:
  Matrix unit_;
  Matrix labels_;
};

Matrix knn_predict(const Matrix& train, const Matrix& train_labels, const Matrix& queries, const KnnConfig& cfg,
                   const TaskSpec& task);

/// k from `grid` maximising the task's primary metric on the validation set;
/// ties go to the smallest k. Grid entries larger than the train set are
/// skipped. Throws Error on an empty (effective) grid.
std::size_t grid_search_k(const Matrix& train, const Matrix& train_labels, const Matrix& val, const Matrix& val_labels,
                          std::span<const std::size_t> grid, double temperature, const TaskSpec& task);

}  // namespace phenosample::eval
