#include <gtest/gtest.h>

#include <cmath>

#include "phenosample/error.hpp"
#include "phenosample/eval/metrics.hpp"
#include "phenosample/eval/probe.hpp"
#include "phenosample/rng.hpp"
#include "support/oracles.hpp"

namespace ps = phenosample;
namespace ev = phenosample::eval;

namespace {

ev::TaskSpec task_for(ev::LossKind loss, std::size_t outputs) {
  ev::TaskKind kind = ev::TaskKind::classification;
  if (loss == ev::LossKind::multilabel_soft_margin || loss == ev::LossKind::presence_weighted_bce)
    kind = ev::TaskKind::multilabel;
  if (loss == ev::LossKind::mse) kind = ev::TaskKind::regression;
  if (loss == ev::LossKind::kl) kind = ev::TaskKind::distribution;
  auto t = ev::TaskSpec::defaults(kind, outputs);
  t.loss = loss;
  return t;
}

ev::Matrix targets(ps::Pcg64& rng, std::size_t n, const ev::TaskSpec& task) {
  ev::Matrix y(n, task.outputs);
  for (std::size_t i = 0; i < n; ++i) {
    if (task.kind == ev::TaskKind::classification) {
      y(i, rng.bounded(task.outputs)) = 1.0;
    } else if (task.kind == ev::TaskKind::multilabel) {
      for (std::size_t c = 0; c < task.outputs; ++c) y(i, c) = rng.uniform() < 0.5;
    } else if (task.kind == ev::TaskKind::regression) {
      for (std::size_t c = 0; c < task.outputs; ++c) y(i, c) = rng.uniform() * 4.0 - 2.0;
    } else {
      // Column 0 stays empty to exercise 0 log 0.
      double s = 0.0;
      for (std::size_t c = 1; c < task.outputs; ++c) s += (y(i, c) = rng.uniform() + 0.1);
      for (std::size_t c = 1; c < task.outputs; ++c) y(i, c) /= s;
    }
  }
  return y;
}

double rel_error(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(ProbeLoss, GradientsMatchCentralDifferences) {
  ps::Pcg64 rng(21);
  const ev::LossKind losses[] = {ev::LossKind::cross_entropy, ev::LossKind::multilabel_soft_margin,
                                 ev::LossKind::presence_weighted_bce, ev::LossKind::mse, ev::LossKind::kl};
  for (const auto loss : losses) {
    for (int t = 0; t < 20; ++t) {
      const auto task = task_for(loss, 4);
      ev::Matrix x(5, 4);
      for (double& v : x.data) v = rng.uniform() * 2.0 - 1.0;
      const auto y = targets(rng, 5, task);
      ev::AffineMap map{ev::Matrix(4, 4), std::vector<double>(4)};
      for (double& v : map.weights.data) v = rng.uniform() - 0.5;
      for (double& v : map.bias) v = rng.uniform() - 0.5;

      const auto g = ev::loss_and_gradient(map, x, y, task);
      std::vector<double> params(map.weights.data);
      params.insert(params.end(), map.bias.begin(), map.bias.end());
      const auto f = [&](const std::vector<double>& p) {
        ev::AffineMap m{ev::Matrix(4, 4), std::vector<double>(p.begin() + 16, p.end())};
        m.weights.data.assign(p.begin(), p.begin() + 16);
        return ev::task_loss(m.logits(x), y, task);
      };
      const auto numeric = oracle::central_difference(f, params, 1e-5);
      EXPECT_NEAR(g.loss, f(params), 1e-12);
      for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_LT(rel_error(g.weights.data[i], numeric[i]), 1e-4) << ev::loss_name(loss) << " w" << i;
      }
      for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_LT(rel_error(g.bias[i], numeric[16 + i]), 1e-4) << ev::loss_name(loss) << " b" << i;
      }
    }
  }
}

TEST(ProbeLoss, ZeroLogitsCrossEntropyIsLogC) {
  for (const std::size_t c : {2u, 3u, 10u}) {
    const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, c);
    ev::Matrix y(4, c);
    for (std::size_t i = 0; i < 4; ++i) y(i, i % c) = 1.0;
    EXPECT_NEAR(ev::task_loss(ev::Matrix(4, c), y, task), std::log(static_cast<double>(c)), 1e-12);
  }
}

TEST(ProbeLoss, PresenceWeightingScalesPositives) {
  auto plain = task_for(ev::LossKind::multilabel_soft_margin, 1);
  auto weighted = task_for(ev::LossKind::presence_weighted_bce, 1);
  ev::Matrix z(1, 1), pos(1, 1, 1.0);
  EXPECT_NEAR(ev::task_loss(z, pos, weighted), 12.0 * ev::task_loss(z, pos, plain), 1e-12);
  ev::Matrix neg(1, 1, 0.0);
  EXPECT_NEAR(ev::task_loss(z, neg, weighted), ev::task_loss(z, neg, plain), 1e-12);
}

TEST(LinearProbe, SeparableDataReachesFullTrainAccuracy) {
  ps::Pcg64 rng(10);
  const std::size_t n = 400;
  ev::Matrix x(n, 6), y(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % 2;
    for (std::size_t j = 0; j < 6; ++j) x(i, j) = rng.uniform() * 2.0 - 1.0;
    x(i, 0) = (c ? 0.5 : -0.5) + 0.4 * (rng.uniform() - 0.5);
    y(i, c) = 1.0;
  }
  ev::ProbeConfig cfg;
  cfg.max_epochs = 200;
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, 2);
  const auto probe = ev::train_linear_probe(x, y, ev::Matrix(0, 6), ev::Matrix(0, 2), task, cfg, 1);
  EXPECT_LE(probe.epochs_run, 200u);
  const auto acc = ev::compute_metrics(probe.predict(x, task), y, task).values.at(ev::Metric::accuracy);
  EXPECT_GE(acc, 0.99);
  ASSERT_GE(probe.train_loss_history.size(), 1u);
  EXPECT_LT(probe.train_loss_history.front(), std::log(2.0));
}

TEST(LinearProbe, EarlyStoppingReturnsBestSnapshot) {
  ps::Pcg64 rng(12);
  const std::size_t n = 60;
  ev::Matrix x(n, 20), y(n, 2), vx(n, 20), vy(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 20; ++j) {
      x(i, j) = rng.uniform();
      vx(i, j) = rng.uniform();
    }
    y(i, rng.bounded(2)) = 1.0;
    vy(i, rng.bounded(2)) = 1.0;
  }
  ev::ProbeConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.patience = 5;
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, 2);
  const auto probe = ev::train_linear_probe(x, y, vx, vy, task, cfg, 3);
  EXPECT_LT(probe.epochs_run, cfg.max_epochs);
  EXPECT_EQ(probe.epochs_run, probe.best_epoch + cfg.patience);
  EXPECT_NEAR(ev::task_loss(probe.logits(vx), vy, task), probe.best_val_loss, 1e-9);
  const auto again = ev::train_linear_probe(x, y, vx, vy, task, cfg, 3);
  EXPECT_EQ(again.map.weights, probe.map.weights);
}

TEST(LinearProbe, DivergenceIsReported) {
  ev::Matrix x(4, 1), y(4, 1);
  x.data = {1e200, -1e200, 1e200, -1e200};
  y.data = {1e200, 1e200, -1e200, 0};
  ev::ProbeConfig cfg;
  cfg.standardize = false;
  cfg.learning_rate = 1e10;
  EXPECT_THROW(
      ev::train_linear_probe(x, y, x, y, ev::TaskSpec::defaults(ev::TaskKind::regression, 1), cfg, 0),
      ps::NumericError);
}

TEST(ProbeConfig, Validation) {
  ev::ProbeConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ps::ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ps::ConfigError);
}
