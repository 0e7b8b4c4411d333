#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "json_io.hpp"
#include "phenosample/error.hpp"
#include "phenosample/eval/data.hpp"
#include "phenosample/raster.hpp"

namespace phenosample::eval {
namespace {

template <typename E>
struct NameTable {
  E value;
  std::string_view name;
};

constexpr NameTable<TaskKind> kTaskKinds[] = {{TaskKind::classification, "classification"},
                                              {TaskKind::multilabel, "multilabel"},
                                              {TaskKind::regression, "regression"},
                                              {TaskKind::distribution, "distribution"}};
constexpr NameTable<LossKind> kLosses[] = {{LossKind::cross_entropy, "cross_entropy"},
                                           {LossKind::multilabel_soft_margin, "multilabel_soft_margin"},
                                           {LossKind::presence_weighted_bce, "presence_weighted_bce"},
                                           {LossKind::mse, "mse"},
                                           {LossKind::kl, "kl"}};
constexpr NameTable<Metric> kMetrics[] = {{Metric::accuracy, "accuracy"},       {Metric::macro_f1, "macro_f1"},
                                          {Metric::micro_f1, "micro_f1"},       {Metric::macro_auroc, "macro_auroc"},
                                          {Metric::micro_auroc, "micro_auroc"}, {Metric::macro_map, "macro_map"},
                                          {Metric::micro_map, "micro_map"},     {Metric::r2, "r2"},
                                          {Metric::mae, "mae"},                 {Metric::rmse, "rmse"}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E> (&table)[N], E value) {
  for (const auto& e : table)
    if (e.value == value) return e.name;
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const NameTable<E> (&table)[N], std::string_view s, const char* what) {
  for (const auto& e : table)
    if (e.name == s) return e.value;
  std::string choices;
  for (const auto& e : table) choices += (choices.empty() ? "" : ", ") + std::string(e.name);
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected one of " + choices + ")");
}

bool loss_fits(TaskKind kind, LossKind loss) {
  switch (kind) {
    case TaskKind::classification: return loss == LossKind::cross_entropy;
    case TaskKind::multilabel:
      return loss == LossKind::multilabel_soft_margin || loss == LossKind::presence_weighted_bce;
    case TaskKind::regression: return loss == LossKind::mse;
    case TaskKind::distribution: return loss == LossKind::kl || loss == LossKind::mse;
  }
  return false;
}

std::vector<double> parse_csv_row(const std::string& line, std::size_t line_no, const std::filesystem::path& path) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw DecodeError(path.string() + ": empty cell", line_no);
    const std::string trimmed = cell.substr(b, e - b + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
    if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size()) {
      throw DecodeError(path.string() + ": not a number: '" + trimmed + "'", line_no);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

Matrix Matrix::take_rows(std::span<const std::size_t> index) const {
  Matrix out(index.size(), cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto src = row(index[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::string_view task_kind_name(TaskKind k) { return name_of(kTaskKinds, k); }
TaskKind parse_task_kind(std::string_view s) { return parse_name(kTaskKinds, s, "task kind"); }
std::string_view loss_name(LossKind k) { return name_of(kLosses, k); }
LossKind parse_loss(std::string_view s) { return parse_name(kLosses, s, "loss"); }
std::string_view metric_name(Metric m) { return name_of(kMetrics, m); }
Metric parse_metric(std::string_view s) { return parse_name(kMetrics, s, "metric"); }

std::vector<Metric> applicable_metrics(TaskKind kind) {
  switch (kind) {
    case TaskKind::classification:
      return {Metric::macro_f1, Metric::accuracy, Metric::micro_f1, Metric::macro_auroc,
              Metric::micro_auroc, Metric::macro_map, Metric::micro_map};
    case TaskKind::multilabel:
      return {Metric::micro_map, Metric::macro_map, Metric::micro_f1, Metric::macro_f1,
              Metric::micro_auroc, Metric::macro_auroc, Metric::accuracy};
    case TaskKind::regression:
    case TaskKind::distribution: return {Metric::r2, Metric::mae, Metric::rmse};
  }
  return {};
}

void TaskSpec::validate() const {
  if (outputs == 0) throw ConfigError("task outputs must be positive");
  if (!loss_fits(kind, loss)) {
    throw ConfigError("loss " + std::string(loss_name(loss)) + " does not fit a " + std::string(task_kind_name(kind)) +
                      " task");
  }
  if (!(pos_weight > 0.0)) throw ConfigError("pos_weight must be positive");
  const auto allowed = applicable_metrics(kind);
  for (const Metric m : metrics) {
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end()) {
      throw ConfigError("metric " + std::string(metric_name(m)) + " is not defined for " +
                        std::string(task_kind_name(kind)) + " tasks");
    }
  }
}

Metric TaskSpec::primary_metric() const { return reported_metrics().front(); }

std::vector<Metric> TaskSpec::reported_metrics() const {
  return metrics.empty() ? applicable_metrics(kind) : metrics;
}

TaskSpec TaskSpec::defaults(TaskKind kind, std::size_t outputs) {
  TaskSpec t;
  t.kind = kind;
  t.outputs = outputs;
  switch (kind) {
    case TaskKind::classification: t.loss = LossKind::cross_entropy; break;
    case TaskKind::multilabel: t.loss = LossKind::multilabel_soft_margin; break;
    case TaskKind::regression: t.loss = LossKind::mse; break;
    case TaskKind::distribution: t.loss = LossKind::kl; break;
  }
  return t;
}

void EmbeddingTable::validate() const {
  if (values.cols == 0) throw ValidationError("embedding dim", "d must be at least 1");
  if (ids.size() != values.rows) throw ValidationError("embedding ids", "id count does not match row count");
  if (values.data.size() != values.rows * values.cols) throw ValidationError("embedding shape", "n*d mismatch");
  for (std::size_t i = 0; i < values.data.size(); ++i) {
    if (!std::isfinite(values.data[i])) {
      throw ValidationError("embedding finite", "non-finite value in row " + std::to_string(i / values.cols));
    }
  }
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  EmbeddingTable t;
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::vector<double> row;
      try {
        row = parse_csv_row(line, line_no, path);
      } catch (const DecodeError&) {
        if (line_no == 1) continue;  // header
        throw;
      }
      if (row.size() < 2) throw DecodeError(path.string() + ": need an id and at least one value", line_no);
      if (t.values.cols == 0) t.values.cols = row.size() - 1;
      if (row.size() - 1 != t.values.cols) throw DecodeError(path.string() + ": ragged row", line_no);
      t.ids.push_back(static_cast<std::int64_t>(row[0]));
      t.values.data.insert(t.values.data.end(), row.begin() + 1, row.end());
      ++t.values.rows;
    }
  } else {
    const auto h = detail::read_json_file(path);
    const auto n = h.at("n").get<std::size_t>();
    const auto d = h.at("d").get<std::size_t>();
    const auto floats = detail::read_f32_le(raster_data_path(path), n * d);
    t.values = Matrix(n, d);
    std::copy(floats.begin(), floats.end(), t.values.data.begin());
    if (h.contains("ids")) {
      t.ids = h.at("ids").get<std::vector<std::int64_t>>();
    } else {
      t.ids.resize(n);
      for (std::size_t i = 0; i < n; ++i) t.ids[i] = static_cast<std::int64_t>(i);
    }
  }
  t.validate();
  return t;
}

void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  table.validate();
  if (path.extension() == ".csv") {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < table.size(); ++i) {
      os << table.ids[i];
      for (const double v : table.values.row(i)) os << ',' << v;
      os << '\n';
    }
    detail::write_text_file(path, os.str());
    return;
  }
  detail::json h;
  h["n"] = table.size();
  h["d"] = table.dim();
  h["ids"] = table.ids;
  detail::write_text_file(path, h.dump() + "\n");
  std::vector<float> floats(table.values.data.begin(), table.values.data.end());
  detail::write_f32_le(raster_data_path(path), floats);
}

Matrix one_hot(std::span<const int> classes, std::size_t num_classes) {
  Matrix out(classes.size(), num_classes);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] < 0 || static_cast<std::size_t>(classes[i]) >= num_classes) {
      throw Error("class index " + std::to_string(classes[i]) + " outside [0, " + std::to_string(num_classes) + ")");
    }
    out(i, static_cast<std::size_t>(classes[i])) = 1.0;
  }
  return out;
}

void validate_labels(const Matrix& labels, const TaskSpec& task) {
  if (labels.cols != task.outputs) {
    throw ValidationError("label width", "labels have " + std::to_string(labels.cols) + " columns, task expects " +
                                             std::to_string(task.outputs));
  }
  for (std::size_t i = 0; i < labels.rows; ++i) {
    const auto r = labels.row(i);
    double sum = 0.0;
    for (const double v : r) {
      if (!std::isfinite(v)) throw ValidationError("label finite", "row " + std::to_string(i));
      if ((task.kind == TaskKind::classification || task.kind == TaskKind::multilabel) && v != 0.0 && v != 1.0) {
        throw ValidationError("label binary", "row " + std::to_string(i) + " has a non-binary entry");
      }
      if (task.kind == TaskKind::distribution && v < 0.0) {
        throw ValidationError("label distribution", "row " + std::to_string(i) + " has a negative proportion");
      }
      sum += v;
    }
    if (task.kind == TaskKind::classification && sum != 1.0) {
      throw ValidationError("label one-hot", "row " + std::to_string(i) + " is not one-hot");
    }
    if (task.kind == TaskKind::distribution && std::abs(sum - 1.0) > 1e-6) {
      throw ValidationError("label distribution", "row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

Matrix read_labels(const std::filesystem::path& path, const TaskSpec& task, std::span<const std::int64_t> ids) {
  task.validate();
  std::map<std::int64_t, std::vector<double>> by_id;
  detail::for_each_json_line(path, [&](const detail::json& j, std::size_t line) {
    const auto id = j.at("id").get<std::int64_t>();
    const auto& y = j.at("y");
    std::vector<double> row(task.outputs, 0.0);
    if (task.kind == TaskKind::classification) {
      const int c = y.get<int>();
      if (c < 0 || static_cast<std::size_t>(c) >= task.outputs) {
        throw DecodeError(path.string() + ": class " + std::to_string(c) + " out of range", line);
      }
      row[static_cast<std::size_t>(c)] = 1.0;
    } else if (y.is_number()) {
      if (task.outputs != 1) throw DecodeError(path.string() + ": scalar label for a multi-output task", line);
      row[0] = y.get<double>();
    } else {
      const auto values = y.get<std::vector<double>>();
      if (values.size() != task.outputs) {
        throw DecodeError(path.string() + ": label has " + std::to_string(values.size()) + " entries, expected " +
                              std::to_string(task.outputs),
                          line);
      }
      row = values;
    }
    if (!by_id.emplace(id, std::move(row)).second) {
      throw DecodeError(path.string() + ": duplicate id " + std::to_string(id), line);
    }
  });
  Matrix out(ids.size(), task.outputs);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = by_id.find(ids[i]);
    if (it == by_id.end()) throw DecodeError(path.string() + ": no label for id " + std::to_string(ids[i]));
    std::copy(it->second.begin(), it->second.end(), out.row(i).begin());
  }
  validate_labels(out, task);
  return out;
}

}  // namespace phenosample::eval
