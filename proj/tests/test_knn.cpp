#include <gtest/gtest.h>

#include <cmath>

#include "phenosample/error.hpp"
#include "phenosample/eval/knn.hpp"
#include "phenosample/eval/metrics.hpp"
#include "phenosample/rng.hpp"
#include "support/oracles.hpp"

namespace ps = phenosample;
namespace ev = phenosample::eval;

namespace {

ev::Matrix random_matrix(ps::Pcg64& rng, std::size_t r, std::size_t c) {
  ev::Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform() * 2.0 - 1.0;
  return m;
}

ev::Matrix random_labels(ps::Pcg64& rng, std::size_t n, const ev::TaskSpec& task) {
  ev::Matrix y(n, task.outputs);
  for (std::size_t i = 0; i < n; ++i) {
    switch (task.kind) {
      case ev::TaskKind::classification: y(i, rng.bounded(task.outputs)) = 1.0; break;
      case ev::TaskKind::multilabel:
        for (std::size_t c = 0; c < task.outputs; ++c) y(i, c) = rng.uniform() < 0.4 ? 1.0 : 0.0;
        break;
      case ev::TaskKind::regression:
        for (std::size_t c = 0; c < task.outputs; ++c) y(i, c) = rng.uniform() * 10.0;
        break;
      case ev::TaskKind::distribution: {
        double s = 0.0;
        for (std::size_t c = 0; c < task.outputs; ++c) s += (y(i, c) = rng.uniform());
        for (std::size_t c = 0; c < task.outputs; ++c) y(i, c) /= s;
        break;
      }
    }
  }
  return y;
}

}  // namespace

TEST(Knn, MatchesAllPairsOracle) {
  ps::Pcg64 rng(17);
  const ev::TaskKind kinds[] = {ev::TaskKind::classification, ev::TaskKind::multilabel, ev::TaskKind::regression,
                                ev::TaskKind::distribution};
  for (int t = 0; t < 100; ++t) {
    const auto task = ev::TaskSpec::defaults(kinds[t % 4], 2 + rng.bounded(4));
    const std::size_t n = 2 + rng.bounded(49), q = 1 + rng.bounded(10), d = 1 + rng.bounded(8);
    const auto train = random_matrix(rng, n, d);
    const auto labels = random_labels(rng, n, task);
    const auto queries = random_matrix(rng, q, d);
    const std::size_t k = 1 + rng.bounded(n);
    const ev::KnnConfig cfg{k, 0.07, {}};
    EXPECT_EQ(ev::knn_predict(train, labels, queries, cfg, task),
              oracle::knn_all_pairs(train, labels, queries, k, 0.07, task.kind == ev::TaskKind::distribution))
        << "instance " << t;
  }
}

TEST(Knn, KOneReturnsExactMatchLabel) {
  ps::Pcg64 rng(2);
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, 3);
  const auto train = random_matrix(rng, 20, 5);
  const auto labels = random_labels(rng, 20, task);
  const auto pred = ev::knn_predict(train, labels, train, {1, 0.07, {}}, task);
  EXPECT_EQ(pred, labels);
}

TEST(Knn, KOneRegressionIsExact) {
  ps::Pcg64 rng(3);
  const auto train = random_matrix(rng, 40, 6);
  ev::Matrix y(40, 2);
  for (double& v : y.data) v = rng.uniform() * 100.0 - 50.0;
  EXPECT_EQ(ev::knn_predict(train, y, train, {1, 0.07, {}}, ev::TaskSpec::defaults(ev::TaskKind::regression, 2)), y);
}

TEST(Knn, EqualSimilarityRegressionAverages) {
  ev::Matrix train(2, 2);
  train.data = {1.0, 0.0, 1.0, 0.0};
  ev::Matrix y(2, 1);
  y.data = {1.0, 3.0};
  ev::Matrix q(1, 2);
  q.data = {2.0, 0.0};
  const auto p = ev::knn_predict(train, y, q, {2, 0.07, {}}, ev::TaskSpec::defaults(ev::TaskKind::regression, 1));
  EXPECT_DOUBLE_EQ(p(0, 0), 2.0);
}

TEST(Knn, TemperatureWeightingByHand) {
  // Unit vectors at 0°, 60°, 90° from the query give similarities 1, 0.5, 0.
  ev::Matrix train(3, 2);
  train.data = {1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0, 0.0, 1.0};
  ev::Matrix y(3, 1);
  y.data = {1.0, 2.0, 4.0};
  ev::Matrix q(1, 2);
  q.data = {1.0, 0.0};
  const double w0 = std::exp(1.0 / 0.07), w1 = std::exp(0.5 / 0.07), w2 = std::exp(0.0);
  const double want = (w0 * 1.0 + w1 * 2.0 + w2 * 4.0) / (w0 + w1 + w2);
  const auto p = ev::knn_predict(train, y, q, {3, 0.07, {}}, ev::TaskSpec::defaults(ev::TaskKind::regression, 1));
  EXPECT_NEAR(p(0, 0), want, 1e-12);
  EXPECT_NEAR(p(0, 0), 1.0 + 7.9e-4, 1e-4);
}

TEST(Knn, RescalingRowsChangesNothing) {
  ps::Pcg64 rng(4);
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::multilabel, 3);
  auto train = random_matrix(rng, 30, 4);
  const auto labels = random_labels(rng, 30, task);
  auto queries = random_matrix(rng, 5, 4);
  const auto base = ev::knn_predict(train, labels, queries, {5, 0.07, {}}, task);
  for (std::size_t i = 0; i < train.rows; ++i)
    for (double& v : train.row(i)) v *= 0.5 + static_cast<double>(i);
  for (std::size_t i = 0; i < queries.rows; ++i)
    for (double& v : queries.row(i)) v *= 3.0;
  const auto scaled = ev::knn_predict(train, labels, queries, {5, 0.07, {}}, task);
  for (std::size_t i = 0; i < base.data.size(); ++i) EXPECT_NEAR(base.data[i], scaled.data[i], 1e-9);
}

TEST(Knn, Errors) {
  ev::Matrix train(2, 2);
  train.data = {1.0, 0.0, 0.0, 0.0};
  ev::Matrix y(2, 1);
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::regression, 1);
  EXPECT_THROW(ev::knn_predict(train, y, train, {1, 0.07, {}}, task), ps::Error);
  train.data = {1.0, 0.0, 0.0, 1.0};
  EXPECT_THROW(ev::knn_predict(train, y, train, {3, 0.07, {}}, task), ps::Error);
  EXPECT_THROW(ev::knn_predict(train, y, train, {1, 0.0, {}}, task), ps::ConfigError);
}

TEST(GridSearchK, SingleElementAndTies) {
  ps::Pcg64 rng(6);
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, 2);
  const auto x = random_matrix(rng, 20, 3);
  const auto y = random_labels(rng, 20, task);
  const std::vector<std::size_t> single{7};
  EXPECT_EQ(ev::grid_search_k(x, y, x, y, single, 0.07, task), 7u);

  // Every point identical with the same label: all k tie.
  ev::Matrix same(10, 2, 1.0);
  ev::Matrix cls(10, 2);
  for (std::size_t i = 0; i < 10; ++i) cls(i, 0) = 1.0;
  const std::vector<std::size_t> grid{5, 3, 1, 9};
  EXPECT_EQ(ev::grid_search_k(same, cls, same, cls, grid, 0.07, task), 1u);
}

TEST(GridSearchK, SeparableBlobsPickSmallestK) {
  ps::Pcg64 rng(8);
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, 2);
  const auto blobs = [&](std::size_t n) {
    std::pair<ev::Matrix, ev::Matrix> out{ev::Matrix(n, 2), ev::Matrix(n, 2)};
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = i % 2;
      out.first(i, 0) = (c ? 1.0 : -1.0) + 0.1 * (rng.uniform() - 0.5);
      out.first(i, 1) = 0.1 * (rng.uniform() - 0.5);
      out.second(i, c) = 1.0;
    }
    return out;
  };
  const auto [tx, ty] = blobs(60);
  const auto [vx, vy] = blobs(20);
  const std::vector<std::size_t> grid{20, 5, 3, 10};
  EXPECT_EQ(ev::grid_search_k(tx, ty, vx, vy, grid, 0.07, task), 3u);
  const auto pred = ev::knn_predict(tx, ty, vx, {20, 0.07, {}}, task);
  EXPECT_DOUBLE_EQ(ev::compute_metrics(pred, vy, task).values.at(ev::Metric::accuracy), 1.0);
}
