#include <algorithm>
#include <cmath>
#include <limits>

#include "phenosample/error.hpp"
#include "phenosample/eval/knn.hpp"
#include "phenosample/eval/metrics.hpp"

namespace phenosample::eval {
namespace {

void normalize_into(std::span<const double> in, std::span<double> out, std::size_t row) {
  double sq = 0.0;
  for (const double v : in) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error("embedding row " + std::to_string(row) + " has zero or non-finite norm");
  }
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = in[j] / norm;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

bool higher_is_better(Metric m) { return m != Metric::mae && m != Metric::rmse; }

}  // namespace

void KnnConfig::validate() const {
  if (k == 0) throw ConfigError("knn.k must be positive");
  if (!(temperature > 0.0)) throw ConfigError("knn.temperature must be positive");
  for (const auto g : k_grid) {
    if (g == 0) throw ConfigError("knn.k_grid entries must be positive");
  }
}

Matrix normalize_rows(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) normalize_into(m.row(i), out.row(i), i);
  return out;
}

KnnIndex::KnnIndex(const Matrix& embeddings, Matrix labels) : unit_(normalize_rows(embeddings)), labels_(std::move(labels)) {
  if (unit_.rows == 0) throw Error("k-NN reference set is empty");
  if (labels_.rows != unit_.rows) throw Error("k-NN labels and embeddings differ in length");
}

std::vector<Neighbor> KnnIndex::neighbors(std::span<const double> unit_query, std::size_t k) const {
  if (k == 0 || k > unit_.rows) {
    throw Error("k-NN: k = " + std::to_string(k) + " but the reference set has " + std::to_string(unit_.rows) +
                " rows");
  }
  std::vector<Neighbor> all(unit_.rows);
  for (std::size_t i = 0; i < unit_.rows; ++i) all[i] = {i, dot(unit_query, unit_.row(i))};
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.similarity > b.similarity || (a.similarity == b.similarity && a.index < b.index);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
  all.resize(k);
  return all;
}

Matrix KnnIndex::predict(const Matrix& queries, std::size_t k, double temperature, const TaskSpec& task) const {
  if (!(temperature > 0.0)) throw ConfigError("knn temperature must be positive");
  if (queries.cols != unit_.cols) throw Error("k-NN: query dimension does not match the reference set");
  Matrix out(queries.rows, labels_.cols);
  std::vector<double> q(queries.cols);
  for (std::size_t r = 0; r < queries.rows; ++r) {
    normalize_into(queries.row(r), q, r);
    const auto nn = neighbors(q, k);
    auto acc = out.row(r);
    std::vector<double> w(nn.size());
    double total = 0.0;
    for (std::size_t i = 0; i < nn.size(); ++i) total += (w[i] = std::exp(nn[i].similarity / temperature));
    for (std::size_t i = 0; i < nn.size(); ++i) {
      const double share = w[i] / total;
      const auto y = labels_.row(nn[i].index);
      for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += share * y[c];
    }
    if (task.kind == TaskKind::distribution) {
      double s = 0.0;
      for (const double v : acc) s += v;
      if (s > 0.0)
        for (double& v : acc) v /= s;
    }
  }
  return out;
}

Matrix knn_predict(const Matrix& train, const Matrix& train_labels, const Matrix& queries, const KnnConfig& cfg,
                   const TaskSpec& task) {
  cfg.validate();
  const KnnIndex index(train, train_labels);
  return index.predict(queries, cfg.k, cfg.temperature, task);
}

std::size_t grid_search_k(const Matrix& train, const Matrix& train_labels, const Matrix& val, const Matrix& val_labels,
                          std::span<const std::size_t> grid, double temperature, const TaskSpec& task) {
  std::vector<std::size_t> ks;
  for (const auto k : grid)
    if (k >= 1 && k <= train.rows) ks.push_back(k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty()) throw Error("grid_search_k: no grid value fits a reference set of " + std::to_string(train.rows));
  if (ks.size() == 1 || val.rows == 0) return ks.front();

  const KnnIndex index(train, train_labels);
  const Metric primary = task.primary_metric();
  const double sign = higher_is_better(primary) ? 1.0 : -1.0;
  std::size_t best_k = ks.front();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto k : ks) {
    const auto scores = compute_metrics(index.predict(val, k, temperature, task), val_labels, task);
    const auto it = scores.values.find(primary);
    const double value = it == scores.values.end() ? -std::numeric_limits<double>::infinity() : sign * it->second;
    if (value > best) {
      best = value;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace phenosample::eval
