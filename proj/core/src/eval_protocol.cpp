#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json_io.hpp"
#include "phenosample/error.hpp"
#include "phenosample/eval/protocol.hpp"
#include "phenosample/rng.hpp"

namespace phenosample::eval {

std::string_view method_name(ProbeMethod m) { return m == ProbeMethod::knn ? "knn" : "linear"; }

MetricSet aggregate(std::vector<FoldOutcome> folds) {
  std::sort(folds.begin(), folds.end(), [](const auto& a, const auto& b) { return a.fold < b.fold; });
  std::map<Metric, std::vector<double>> values;
  for (const auto& f : folds)
    for (const auto& [metric, v] : f.metrics.values) values[metric].push_back(v);

  MetricSet out;
  for (auto& [metric, v] : values) {
    std::sort(v.begin(), v.end());
    MetricSummary s;
    s.folds = v.size();
    double sum = 0.0;
    for (const double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (folds.size() > 1) {
      double sq = 0.0;
      for (const double x : v) sq += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(sq / static_cast<double>(v.size()));
    }
    out.summary[metric] = s;
  }
  out.folds = std::move(folds);
  return out;
}

MetricSet run_protocol(const EmbeddingTable& embeddings, const Matrix& labels, const TaskSpec& task,
                       const FoldPlan& plan, ProbeMethod method, const ProtocolConfig& cfg) {
  task.validate();
  embeddings.validate();
  validate_labels(labels, task);
  if (labels.rows != embeddings.size()) throw Error("run_protocol: labels and embeddings differ in length");
  if (plan.n != embeddings.size()) throw Error("run_protocol: fold plan was built for a different sample count");
  plan.validate();
  for (const auto& fold : plan.folds) {
    if (fold.train.empty()) throw ConfigError("run_protocol: a fold has no training samples; use k_folds >= 2");
  }
  if (method == ProbeMethod::knn) cfg.knn.validate();
  if (method == ProbeMethod::linear) cfg.probe.validate();

  const Matrix& x = embeddings.values;
  std::vector<FoldOutcome> outcomes(plan.folds.size());
  std::vector<std::exception_ptr> errors(plan.folds.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t f = next++; f < plan.folds.size(); f = next++) {
      try {
        const Fold& fold = plan.folds[f];
        const Matrix train_x = x.take_rows(fold.train), train_y = labels.take_rows(fold.train);
        const Matrix val_x = x.take_rows(fold.val), val_y = labels.take_rows(fold.val);
        const Matrix test_x = x.take_rows(fold.test), test_y = labels.take_rows(fold.test);
        FoldOutcome outcome;
        outcome.fold = f;
        Matrix predictions;
        if (method == ProbeMethod::knn) {
          const std::size_t k =
              grid_search_k(train_x, train_y, val_x, val_y, cfg.knn.k_grid, cfg.knn.temperature, task);
          outcome.chosen_k = k;
          predictions = KnnIndex(train_x, train_y).predict(test_x, k, cfg.knn.temperature, task);
        } else {
          const auto probe = train_linear_probe(train_x, train_y, val_x, val_y, task, cfg.probe,
                                                derive_seed(plan.params.seed, 1000 + f));
          predictions = probe.predict(test_x, task);
        }
        outcome.metrics = compute_metrics(predictions, test_y, task);
        outcomes[f] = std::move(outcome);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, std::max<std::size_t>(plan.folds.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return aggregate(std::move(outcomes));
}

namespace {

std::vector<Metric> report_order(const MetricSet& result, const TaskSpec& task) {
  std::vector<Metric> order;
  for (const Metric m : task.reported_metrics())
    if (result.summary.contains(m)) order.push_back(m);
  return order;
}

}  // namespace

std::string report_json(const MetricSet& result, const TaskSpec& task, ProbeMethod method) {
  detail::json j;
  j["task"] = task_kind_name(task.kind);
  j["loss"] = loss_name(task.loss);
  j["method"] = method_name(method);
  j["folds"] = result.folds.size();
  j["primary_metric"] = metric_name(task.primary_metric());
  detail::json metrics = detail::json::object();
  for (const Metric m : report_order(result, task)) {
    const auto& s = result.summary.at(m);
    detail::json e;
    e["mean"] = s.mean;
    e["std"] = s.std ? detail::json(*s.std) : detail::json(nullptr);
    e["folds_defined"] = s.folds;
    metrics[std::string(metric_name(m))] = e;
  }
  j["metrics"] = metrics;
  detail::json per_fold = detail::json::array();
  for (const auto& f : result.folds) {
    detail::json e;
    e["fold"] = f.fold;
    if (f.chosen_k) e["k"] = *f.chosen_k;
    detail::json values = detail::json::object();
    for (const auto& [m, v] : f.metrics.values) values[std::string(metric_name(m))] = v;
    e["metrics"] = values;
    per_fold.push_back(e);
  }
  j["per_fold"] = per_fold;
  return j.dump(2) + "\n";
}

std::string report_table(const MetricSet& result, const TaskSpec& task, ProbeMethod method) {
  std::ostringstream os;
  os << task_kind_name(task.kind) << " / " << method_name(method) << " / " << result.folds.size() << " fold(s)\n";
  os << std::left << std::setw(14) << "metric" << std::right << std::setw(12) << "mean" << std::setw(12) << "std"
     << "\n";
  os << std::fixed << std::setprecision(4);
  for (const Metric m : report_order(result, task)) {
    const auto& s = result.summary.at(m);
    os << std::left << std::setw(14) << metric_name(m) << std::right << std::setw(12) << s.mean << std::setw(12);
    if (s.std)
      os << *s.std;
    else
      os << "-";
    os << "\n";
  }
  return os.str();
}

}  // namespace phenosample::eval
