#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phenosample/eval/data.hpp"
#include "phenosample/eval/folds.hpp"
#include "phenosample/eval/knn.hpp"
#include "phenosample/eval/metrics.hpp"
#include "phenosample/eval/probe.hpp"

namespace phenosample::eval {

enum class ProbeMethod { knn, linear };

std::string_view method_name(ProbeMethod m);

struct ProtocolConfig {
  KnnConfig knn;
  ProbeConfig probe;
  std::size_t workers = 1;
};

struct MetricSummary {
  double mean = 0.0;
  std::optional<double> std;  // population std, only with more than one fold
  std::size_t folds = 0;      // folds in which the metric was defined

  bool operator==(const MetricSummary&) const = default;
};

struct FoldOutcome {
  std::size_t fold = 0;
  MetricValues metrics;
  std::optional<std::size_t> chosen_k;
};

struct MetricSet {
  std::map<Metric, MetricSummary> summary;
  std::vector<FoldOutcome> folds;  // ordered by fold index
};

/// Mean and spread per metric. Values are combined in sorted order, so the
/// result does not depend on the order of `folds`.
MetricSet aggregate(std::vector<FoldOutcome> folds);

/// Per test fold: k-NN picks k on the validation split and predicts test
/// from the train split; the linear probe trains on train with early stopping
/// on val. Folds run on `cfg.workers` threads with seeds derived from the plan
/// seed and fold index.
MetricSet run_protocol(const EmbeddingTable& embeddings, const Matrix& labels, const TaskSpec& task,
                       const FoldPlan& plan, ProbeMethod method, const ProtocolConfig& cfg = {});

std::string report_json(const MetricSet& result, const TaskSpec& task, ProbeMethod method);
std::string report_table(const MetricSet& result, const TaskSpec& task, ProbeMethod method);

}  // namespace phenosample::eval
