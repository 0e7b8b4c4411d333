#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "phenosample/error.hpp"
#include "phenosample/eval/probe.hpp"
#include "phenosample/rng.hpp"

namespace phenosample::eval {
namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Row-wise log-softmax.
void log_softmax(std::span<const double> z, std::span<double> out) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (const double v : z) s += std::exp(v - m);
  const double lse = m + std::log(s);
  for (std::size_t c = 0; c < z.size(); ++c) out[c] = z[c] - lse;
}

struct Adam {
  std::vector<double> m, v;
  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, const ProbeConfig& cfg, std::size_t t,
            double decay) {
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= cfg.learning_rate * decay * params[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      params[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
    }
  }
};

}  // namespace

void ProbeConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("probe.learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("probe.batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("probe.max_epochs must be positive");
  if (patience == 0) throw ConfigError("probe.patience must be positive");
  if (weight_decay < 0.0) throw ConfigError("probe.weight_decay must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("probe betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("probe.epsilon must be positive");
}

Matrix AffineMap::logits(const Matrix& x) const {
  if (x.cols != weights.rows) throw Error("linear probe: input has " + std::to_string(x.cols) + " features, model " +
                                          std::to_string(weights.rows));
  Matrix out(x.rows, weights.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto o = out.row(i);
    std::copy(bias.begin(), bias.end(), o.begin());
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double a = xi[j];
      if (a == 0.0) continue;
      const auto w = weights.row(j);
      for (std::size_t c = 0; c < o.size(); ++c) o[c] += a * w[c];
    }
  }
  return out;
}

double task_loss(const Matrix& logits, const Matrix& targets, const TaskSpec& task, Matrix* grad) {
  if (logits.rows != targets.rows || logits.cols != targets.cols) throw Error("task_loss: shape mismatch");
  const std::size_t n = logits.rows, C = logits.cols;
  if (n == 0) return 0.0;
  if (grad != nullptr) *grad = Matrix(n, C);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_nc = inv_n / static_cast<double>(C);
  double total = 0.0;
  std::vector<double> logp(C);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = logits.row(i);
    const auto y = targets.row(i);
    switch (task.loss) {
      case LossKind::cross_entropy:
      case LossKind::kl: {
        log_softmax(z, logp);
        double ysum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          ysum += y[c];
          if (y[c] == 0.0) continue;
          total += task.loss == LossKind::kl ? y[c] * (std::log(y[c]) - logp[c]) : -y[c] * logp[c];
        }
        if (grad != nullptr) {
          for (std::size_t c = 0; c < C; ++c) (*grad)(i, c) = (std::exp(logp[c]) * ysum - y[c]) * inv_n;
        }
        break;
      }
      case LossKind::multilabel_soft_margin:
      case LossKind::presence_weighted_bce: {
        const double pw = task.loss == LossKind::presence_weighted_bce ? task.pos_weight : 1.0;
        double row = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          row += pw * y[c] * softplus(-z[c]) + (1.0 - y[c]) * softplus(z[c]);
          if (grad != nullptr) {
            const double s = sigmoid(z[c]);
            (*grad)(i, c) = (-pw * y[c] * (1.0 - s) + (1.0 - y[c]) * s) * inv_nc;
          }
        }
        total += row / static_cast<double>(C);
        break;
      }
      case LossKind::mse: {
        double row = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          const double r = z[c] - y[c];
          row += r * r;
          if (grad != nullptr) (*grad)(i, c) = 2.0 * r * inv_nc;
        }
        total += row / static_cast<double>(C);
        break;
      }
    }
  }
  return total * inv_n;
}

AffineGradient loss_and_gradient(const AffineMap& map, const Matrix& x, const Matrix& y, const TaskSpec& task) {
  Matrix g;
  AffineGradient out;
  out.loss = task_loss(map.logits(x), y, task, &g);
  out.weights = Matrix(map.weights.rows, map.weights.cols);
  out.bias.assign(map.bias.size(), 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto gi = g.row(i);
    const auto xi = x.row(i);
    for (std::size_t c = 0; c < gi.size(); ++c) out.bias[c] += gi[c];
    for (std::size_t j = 0; j < x.cols; ++j) {
      if (xi[j] == 0.0) continue;
      auto w = out.weights.row(j);
      for (std::size_t c = 0; c < gi.size(); ++c) w[c] += xi[j] * gi[c];
    }
  }
  return out;
}

Matrix outputs_from_logits(const Matrix& logits, const TaskSpec& task) {
  Matrix out = logits;
  for (std::size_t i = 0; i < out.rows; ++i) {
    auto r = out.row(i);
    switch (task.kind) {
      case TaskKind::classification:
      case TaskKind::distribution:
        if (task.loss == LossKind::mse) break;
        log_softmax(logits.row(i), r);
        for (double& v : r) v = std::exp(v);
        break;
      case TaskKind::multilabel:
        for (double& v : r) v = sigmoid(v);
        break;
      case TaskKind::regression: break;
    }
  }
  return out;
}

Matrix LinearProbe::transform(const Matrix& x) const {
  if (mean.empty()) return x;
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows; ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - mean[j]) / scale[j];
  }
  return out;
}

LinearProbe train_linear_probe(const Matrix& train_x, const Matrix& train_y, const Matrix& val_x,
                               const Matrix& val_y, const TaskSpec& task, const ProbeConfig& cfg,
                               std::uint64_t seed) {
  cfg.validate();
  task.validate();
  if (train_x.rows == 0) throw Error("linear probe: empty training set");
  if (train_x.rows != train_y.rows || val_x.rows != val_y.rows) throw Error("linear probe: rows of x and y differ");
  if (train_y.cols != task.outputs || (val_x.rows > 0 && val_x.cols != train_x.cols)) {
    throw Error("linear probe: incompatible dimensions");
  }
  const std::size_t d = train_x.cols, C = task.outputs, n = train_x.rows;

  LinearProbe probe;
  if (cfg.standardize) {
    probe.mean.assign(d, 0.0);
    probe.scale.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) probe.mean[j] += train_x(i, j);
    for (double& m : probe.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double r = train_x(i, j) - probe.mean[j];
        probe.scale[j] += r * r;
      }
    for (double& s : probe.scale) {
      s = std::sqrt(s / static_cast<double>(n));
      if (!(s > 1e-12)) s = 1.0;
    }
  }
  const Matrix xt = probe.transform(train_x);
  const Matrix xv = probe.transform(val_x);
  const bool monitor_val = val_x.rows > 0;

  AffineMap map{Matrix(d, C), std::vector<double>(C, 0.0)};
  Adam adam_w(d * C), adam_b(C);
  Pcg64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  AffineMap best = map;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng.bounded(i))]);
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const auto g = loss_and_gradient(map, xt.take_rows(idx), train_y.take_rows(idx), task);
      if (!std::isfinite(g.loss)) {
        throw NumericError("linear probe diverged: non-finite loss at epoch " + std::to_string(epoch));
      }
      ++step;
      adam_w.step(map.weights.data, g.weights.data, cfg, step, cfg.weight_decay);
      adam_b.step(map.bias, g.bias, cfg, step, 0.0);
    }
    const double train_loss = task_loss(map.logits(xt), train_y, task);
    const double monitored = monitor_val ? task_loss(map.logits(xv), val_y, task) : train_loss;
    if (!std::isfinite(train_loss) || !std::isfinite(monitored)) {
      throw NumericError("linear probe diverged: non-finite loss at epoch " + std::to_string(epoch));
    }
    probe.train_loss_history.push_back(train_loss);
    if (monitor_val) probe.val_loss_history.push_back(monitored);
    probe.epochs_run = epoch;
    if (monitored < best_loss) {
      best_loss = monitored;
      best = map;
      probe.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  probe.map = std::move(best);
  probe.best_val_loss = best_loss;
  return probe;
}

}  // namespace phenosample::eval
