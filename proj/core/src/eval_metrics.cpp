#include <algorithm>
#include <cmath>
#include <numeric>

#include "phenosample/error.hpp"
#include "phenosample/eval/metrics.hpp"

namespace phenosample::eval {
namespace {

struct Counts {
  double tp = 0, fp = 0, fn = 0;
};

std::optional<double> f1(const Counts& c) {
  const double denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return std::nullopt;
  return 2 * c.tp / denom;
}

std::size_t argmax(std::span<const double> r) {
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

std::vector<double> column(const Matrix& m, std::size_t c) {
  std::vector<double> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i] = m(i, c);
  return out;
}

void add_mean(MetricValues& out, Metric metric, const std::vector<std::optional<double>>& per_label) {
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& v : per_label) {
    if (v) {
      sum += *v;
      ++defined;
    }
  }
  out.skipped[metric] = per_label.size() - defined;
  if (defined > 0) out.values[metric] = sum / static_cast<double>(defined);
}

void add_optional(MetricValues& out, Metric metric, const std::optional<double>& v) {
  if (v) {
    out.values[metric] = *v;
    out.skipped[metric] = 0;
  } else {
    out.skipped[metric] = 1;
  }
}

void label_metrics(const Matrix& scores, const Matrix& truth, const Matrix& decided, MetricValues& out) {
  const std::size_t n = scores.rows, C = scores.cols;
  std::vector<Counts> per(C);
  Counts pooled;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool all = true;
    for (std::size_t c = 0; c < C; ++c) {
      const bool p = decided(i, c) > 0.5;
      const bool t = truth(i, c) > 0.5;
      if (p && t) ++per[c].tp;
      if (p && !t) ++per[c].fp;
      if (!p && t) ++per[c].fn;
      all = all && (p == t);
    }
    if (all) ++exact;
  }
  for (const auto& c : per) {
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
  }

  std::vector<std::optional<double>> f1s, aucs, aps;
  for (std::size_t c = 0; c < C; ++c) {
    f1s.push_back(f1(per[c]));
    const auto s = column(scores, c);
    const auto y = column(truth, c);
    aucs.push_back(auroc(s, y));
    aps.push_back(average_precision(s, y));
  }
  if (n > 0) {
    out.values[Metric::accuracy] = static_cast<double>(exact) / static_cast<double>(n);
    out.skipped[Metric::accuracy] = 0;
  }
  add_mean(out, Metric::macro_f1, f1s);
  add_optional(out, Metric::micro_f1, f1(pooled));
  add_mean(out, Metric::macro_auroc, aucs);
  add_mean(out, Metric::macro_map, aps);
  add_optional(out, Metric::micro_auroc, auroc(scores.data, truth.data));
  add_optional(out, Metric::micro_map, average_precision(scores.data, truth.data));
}

}  // namespace

std::optional<double> average_precision(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw Error("average_precision: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double hits = 0.0, sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] > 0.5) {
      hits += 1.0;
      sum += hits / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0.0) return std::nullopt;
  return sum / hits;
}

std::optional<double> auroc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw Error("auroc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] > 0.5) {
        pos += 1.0;
        rank_sum += mid_rank;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) return std::nullopt;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

std::optional<double> r2_score(std::span<const double> truth, std::span<const double> prediction) {
  if (truth.size() != prediction.size()) throw Error("r2_score: length mismatch");
  if (truth.empty()) return std::nullopt;
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - prediction[i]) * (truth[i] - prediction[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

MetricValues compute_metrics(const Matrix& predictions, const Matrix& labels, const TaskSpec& task) {
  if (predictions.rows != labels.rows || predictions.cols != labels.cols) {
    throw Error("compute_metrics: predictions and labels differ in shape");
  }
  MetricValues out;
  const std::size_t n = labels.rows, C = labels.cols;
  switch (task.kind) {
    case TaskKind::classification: {
      Matrix decided(n, C);
      for (std::size_t i = 0; i < n; ++i) decided(i, argmax(predictions.row(i))) = 1.0;
      label_metrics(predictions, labels, decided, out);
      break;
    }
    case TaskKind::multilabel: {
      Matrix decided(n, C);
      for (std::size_t k = 0; k < predictions.data.size(); ++k) decided.data[k] = predictions.data[k] >= 0.5 ? 1.0 : 0.0;
      label_metrics(predictions, labels, decided, out);
      break;
    }
    case TaskKind::regression:
    case TaskKind::distribution: {
      std::vector<std::optional<double>> r2s;
      for (std::size_t c = 0; c < C; ++c) r2s.push_back(r2_score(column(labels, c), column(predictions, c)));
      add_mean(out, Metric::r2, r2s);
      if (n > 0) {
        double abs_sum = 0.0, sq_sum = 0.0;
        for (std::size_t k = 0; k < labels.data.size(); ++k) {
          const double r = predictions.data[k] - labels.data[k];
          abs_sum += std::abs(r);
          sq_sum += r * r;
        }
        const auto count = static_cast<double>(labels.data.size());
        out.values[Metric::mae] = abs_sum / count;
        out.values[Metric::rmse] = std::sqrt(sq_sum / count);
        out.skipped[Metric::mae] = 0;
        out.skipped[Metric::rmse] = 0;
      }
      break;
    }
  }
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double eps) {
  if (p.size() != q.size()) throw Error("kl_divergence: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw Error("kl_divergence: negative entry at " + std::to_string(i));
    if (p[i] == 0.0) continue;
    total += p[i] * std::log(p[i] / std::max(q[i], eps));
  }
  return total;
}

std::size_t BinnedDistribution::bin_of(double value) const {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

BinnedDistribution biomassters_bins(std::span<const std::vector<double>> images, std::size_t quantile_bins,
                                    std::size_t merge_leading) {
  if (images.empty()) throw Error("biomassters_bins: empty dataset");
  if (quantile_bins < 2 || merge_leading < 1 || merge_leading > quantile_bins) {
    throw ConfigError("biomassters_bins: need quantile_bins >= 2 and 1 <= merge_leading <= quantile_bins");
  }
  std::vector<double> pixels;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].empty()) throw Error("biomassters_bins: image " + std::to_string(i) + " has no pixels");
    for (const double v : images[i]) {
      if (!std::isfinite(v)) throw Error("biomassters_bins: non-finite pixel in image " + std::to_string(i));
    }
    pixels.insert(pixels.end(), images[i].begin(), images[i].end());
  }
  std::sort(pixels.begin(), pixels.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(pixels.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, pixels.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return pixels[lo] + (pixels[hi] - pixels[lo]) * frac;
  };

  BinnedDistribution out;
  // Quantile bin b covers (q_b, q_{b+1}]; merging the first `merge_leading`
  // bins drops their inner edges.
  for (std::size_t j = merge_leading; j < quantile_bins; ++j) {
    out.edges.push_back(quantile(static_cast<double>(j) / static_cast<double>(quantile_bins)));
  }
  for (const auto& image : images) {
    std::vector<double> counts(out.bins(), 0.0);
    for (const double v : image) counts[out.bin_of(v)] += 1.0;
    for (double& c : counts) c /= static_cast<double>(image.size());
    out.distributions.push_back(std::move(counts));
  }
  return out;
}

}  // namespace phenosample::eval
