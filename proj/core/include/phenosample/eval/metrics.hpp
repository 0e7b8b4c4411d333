#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "phenosample/eval/data.hpp"

namespace phenosample::eval {

/// Non-interpolated average precision: mean of precision@rank over the ranks
/// of the positives, ranking by score descending with ties kept in input
/// order. nullopt without positives.
std::optional<double> average_precision(std::span<const double> scores, std::span<const double> labels);

/// Area under the ROC curve (Mann-Whitney with mid-ranks for ties).
/// nullopt unless both classes are present.
std::optional<double> auroc(std::span<const double> scores, std::span<const double> labels);

/// 1 - SS_res / SS_tot. nullopt when SS_tot is zero.
std::optional<double> r2_score(std::span<const double> truth, std::span<const double> prediction);

/// Metric values for one evaluation. `skipped` counts labels/targets for which
/// a metric was undefined (e.g. AP of a label without positives).
struct MetricValues {
  std::map<Metric, double> values;
  std::map<Metric, std::size_t> skipped;
};

/// Classification uses argmax predictions (ties to the lowest class);
/// multilabel thresholds scores at 0.5 for F1 and uses raw scores for AUROC
/// and AP. Macro averages per-label values; micro pools all labels.
/// Regression and distribution report R2 averaged over output columns, and
/// MAE and RMSE pooled over all entries.
MetricValues compute_metrics(const Matrix& predictions, const Matrix& labels, const TaskSpec& task);

/// sum_i p_i ln(p_i / max(q_i, eps)), with 0 ln 0 = 0. Throws Error on
/// length mismatch or negative entries.
double kl_divergence(std::span<const double> p, std::span<const double> q, double eps = 1e-12);

/// Distribution targets built from per-pixel values.
struct BinnedDistribution {
  /// Inner edges; bin b holds values in (edges[b-1], edges[b]].
  std::vector<double> edges;
  /// Per-image proportions over edges.size() + 1 bins.
  std::vector<std::vector<double>> distributions;

  std::size_t bins() const { return edges.size() + 1; }
  std::size_t bin_of(double value) const;
};

/// Global quantile edges at j / quantile_bins (j = 1..quantile_bins-1, linear
/// interpolation between order statistics) over every pixel of every image;
/// the first `merge_leading` bins are merged into one, so the defaults give
/// 8 bins. Throws Error on an empty dataset or an empty image.
BinnedDistribution biomassters_bins(std::span<const std::vector<double>> images, std::size_t quantile_bins = 10,
                                    std::size_t merge_leading = 3);

}  // namespace phenosample::eval
