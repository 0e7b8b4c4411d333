#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "phenosample/config.hpp"
#include "phenosample/error.hpp"
#include "phenosample/eval/data.hpp"
#include "phenosample/eval/folds.hpp"
#include "phenosample/eval/protocol.hpp"
#include "phenosample/manifest.hpp"
#include "phenosample/pipeline.hpp"
#include "phenosample/synthetic.hpp"

namespace ps = phenosample;

namespace {

struct StageFlags {
  std::string config;
  std::optional<std::string> catalog;
  std::optional<std::string> output_dir;
  std::optional<double> max_cloud;
  std::optional<std::string> years;
  std::optional<int> min_images;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> nonveg_threshold;
  std::optional<double> mountain_multiplier;
};

void add_stage_flags(CLI::App* cmd, StageFlags& f) {
  cmd->add_option("-c,--config", f.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--catalog", f.catalog, "Catalog JSON-lines file or http:// search endpoint");
  cmd->add_option("--output-dir", f.output_dir, "Directory for stage artifacts");
  cmd->add_option("--max-cloud", f.max_cloud, "Reject scenes with cloud fraction at or above this");
  cmd->add_option("--years", f.years, "Inclusive year range, e.g. 2017-2024");
  cmd->add_option("--min-images", f.min_images, "Seasons required to keep a location");
  cmd->add_option("--workers", f.workers, "Concurrent catalog queries");
  cmd->add_option("--seed", f.seed, "Base seed");
  cmd->add_option("--nonveg-threshold", f.nonveg_threshold, "NDVI below which a location is non-vegetated");
  cmd->add_option("--mountain-multiplier", f.mountain_multiplier, "Weight multiplier for mountain locations");
}

std::pair<int, int> parse_years(const std::string& s) {
  const auto dash = s.find('-');
  int a = 0, b = 0;
  const auto ok = [](std::string_view v, int& out) {
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    return r.ec == std::errc() && r.ptr == v.data() + v.size();
  };
  if (dash == std::string::npos) {
    if (!ok(s, a)) throw ps::ConfigError("--years: expected YEAR or START-END, got '" + s + "'");
    return {a, a};
  }
  const std::string_view v(s);
  if (!ok(v.substr(0, dash), a) || !ok(v.substr(dash + 1), b)) {
    throw ps::ConfigError("--years: expected START-END, got '" + s + "'");
  }
  return {a, b};
}

ps::PipelineConfig load_with_overrides(const StageFlags& f) {
  auto cfg = ps::load_config(f.config);
  if (f.catalog) cfg.paths.catalog = *f.catalog;
  if (f.output_dir) cfg.paths.output_dir = *f.output_dir;
  if (f.max_cloud) cfg.selection.max_cloud = *f.max_cloud;
  if (f.years) std::tie(cfg.selection.year_start, cfg.selection.year_end) = parse_years(*f.years);
  if (f.min_images) cfg.selection.min_images = *f.min_images;
  if (f.workers) cfg.workers = *f.workers;
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.folds.seed = *f.seed;
  }
  if (f.nonveg_threshold) cfg.weights.nonveg_threshold = *f.nonveg_threshold;
  if (f.mountain_multiplier) cfg.weights.mountain_multiplier = *f.mountain_multiplier;
  cfg.validate();
  return cfg;
}

struct EvalFlags {
  std::string embeddings;
  std::string labels;
  std::string task = "classification";
  std::size_t outputs = 0;
  std::optional<std::string> loss;
  std::optional<std::string> config;
  std::vector<std::size_t> k_grid;
  std::optional<double> temperature;
  std::optional<double> lr;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> max_epochs;
  std::optional<double> weight_decay;
  std::optional<std::size_t> folds;
  std::optional<double> train_fraction;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::optional<std::string> report;
};

void add_eval_flags(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--embeddings", f.embeddings, "Embedding table (.csv or JSON header + .bin)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--labels", f.labels, "Labels JSON-lines {id, y}")->required()->check(CLI::ExistingFile);
  cmd->add_option("--task", f.task, "classification | multilabel | regression | distribution");
  cmd->add_option("--outputs", f.outputs, "Classes, labels or target dimensions")->required();
  cmd->add_option("--loss", f.loss, "Override the task's default loss");
  cmd->add_option("-c,--config", f.config, "Pipeline config supplying k-NN / probe / fold defaults")
      ->check(CLI::ExistingFile);
  cmd->add_option("--folds", f.folds, "Number of folds");
  cmd->add_option("--train-fraction", f.train_fraction, "Share of non-test ids used for training");
  cmd->add_option("--seed", f.seed, "Fold and probe seed");
  cmd->add_option("--workers", f.workers, "Folds evaluated concurrently");
  cmd->add_option("--report", f.report, "Write the JSON report here");
}

int run_eval(const EvalFlags& f, ps::eval::ProbeMethod method) {
  ps::PipelineConfig cfg = f.config ? ps::load_config(*f.config) : ps::PipelineConfig{};
  if (!f.k_grid.empty()) cfg.knn.k_grid = f.k_grid;
  if (f.temperature) cfg.knn.temperature = *f.temperature;
  if (f.lr) cfg.probe.learning_rate = *f.lr;
  if (f.batch) cfg.probe.batch_size = *f.batch;
  if (f.patience) cfg.probe.patience = *f.patience;
  if (f.max_epochs) cfg.probe.max_epochs = *f.max_epochs;
  if (f.weight_decay) cfg.probe.weight_decay = *f.weight_decay;
  if (f.folds) cfg.folds.k_folds = *f.folds;
  if (f.train_fraction) cfg.folds.train_fraction = *f.train_fraction;
  if (f.seed) cfg.folds.seed = *f.seed;
  cfg.knn.validate();
  cfg.probe.validate();

  auto task = ps::eval::TaskSpec::defaults(ps::eval::parse_task_kind(f.task), f.outputs);
  if (f.loss) task.loss = ps::eval::parse_loss(*f.loss);
  task.validate();

  const auto emb = ps::eval::read_embeddings(f.embeddings);
  const auto labels = ps::eval::read_labels(f.labels, task, emb.ids);
  const auto plan = ps::eval::make_folds(emb.size(), cfg.folds);
  ps::eval::ProtocolConfig pc{cfg.knn, cfg.probe, f.workers};
  const auto result = ps::eval::run_protocol(emb, labels, task, plan, method, pc);

  std::cout << ps::eval::report_table(result, task, method);
  if (f.report) {
    std::ofstream out(*f.report, std::ios::binary | std::ios::trunc);
    if (!out) throw ps::IoError("cannot write " + *f.report);
    out << ps::eval::report_json(result, task, method);
  }
  return 0;
}

void print_summary(const ps::DatasetManifest& m) {
  const auto s = ps::summarize(m);
  std::cout << "records: " << s.records << "\nscenes: " << s.scenes << "\nmean cloud: " << s.mean_cloud
            << "\nseasons per record:";
  for (const auto& [k, v] : s.coverage) std::cout << ' ' << k << '=' << v;
  std::cout << "\nweights:";
  for (const auto& [k, v] : s.weight_histogram) std::cout << ' ' << k << '=' << v;
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phenology-aware seasonal sampling and frozen-embedding evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       std::string("phenosample ") + PHENOSAMPLE_VERSION + "\n" + ps::kManifestFormatName +
                           " format " + std::to_string(ps::kManifestFormatVersion));

  std::string stage;
  StageFlags stage_flags;
  for (const char* name : {"grid", "pheno", "select", "weights", "run"}) {
    const std::string help = std::string(name) == "run" ? "Run grid, pheno, select and weights in order"
                             : std::string(name) == "weights"
                                 ? "Compute sampling weights and write the manifest"
                                 : std::string("Run the ") + name + " stage";
    auto* cmd = app.add_subcommand(name, help);
    add_stage_flags(cmd, stage_flags);
    cmd->callback([&stage, name] { stage = name; });
  }

  std::string manifest_path;
  auto* validate_cmd = app.add_subcommand("manifest-validate", "Check a manifest against its invariants");
  validate_cmd->add_option("manifest", manifest_path, "Manifest file")->required();
  validate_cmd->callback([&] { stage = "manifest-validate"; });
  auto* summarize_cmd = app.add_subcommand("summarize", "Print coverage and cloud statistics of a manifest");
  summarize_cmd->add_option("manifest", manifest_path, "Manifest file")->required();
  summarize_cmd->callback([&] { stage = "summarize"; });

  EvalFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate frozen embeddings with k-fold probes");
  eval_cmd->require_subcommand(1);
  auto* knn_cmd = eval_cmd->add_subcommand("knn", "Weighted k-NN probe");
  add_eval_flags(knn_cmd, eval_flags);
  knn_cmd->add_option("--k-grid", eval_flags.k_grid, "Candidate k values")->delimiter(',');
  knn_cmd->add_option("--temperature", eval_flags.temperature, "Similarity temperature");
  knn_cmd->callback([&] { stage = "eval knn"; });
  auto* probe_cmd = eval_cmd->add_subcommand("probe", "Linear probe trained with AdamW");
  add_eval_flags(probe_cmd, eval_flags);
  probe_cmd->add_option("--lr", eval_flags.lr, "Learning rate");
  probe_cmd->add_option("--batch", eval_flags.batch, "Mini-batch size");
  probe_cmd->add_option("--patience", eval_flags.patience, "Early-stopping patience in epochs");
  probe_cmd->add_option("--max-epochs", eval_flags.max_epochs, "Epoch limit");
  probe_cmd->add_option("--weight-decay", eval_flags.weight_decay, "Decoupled weight decay");
  probe_cmd->callback([&] { stage = "eval probe"; });

  std::string fixture_dir;
  ps::FixtureOptions fixture;
  auto* fixture_cmd = app.add_subcommand("fixture", "Write the synthetic study-area fixture");
  fixture_cmd->add_option("dir", fixture_dir, "Output directory")->required();
  fixture_cmd->add_option("--points", fixture.points, "Number of land grid cells");
  fixture_cmd->add_option("--seed", fixture.seed, "Generator seed");
  fixture_cmd->callback([&] { stage = "fixture"; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (stage == "grid" || stage == "pheno" || stage == "select" || stage == "weights" || stage == "run") {
      const auto cfg = load_with_overrides(stage_flags);
      std::vector<ps::StageReport> reports;
      if (stage == "grid") reports.push_back(ps::run_grid_stage(cfg));
      if (stage == "pheno") reports.push_back(ps::run_pheno_stage(cfg));
      if (stage == "select") reports.push_back(ps::run_select_stage(cfg));
      if (stage == "weights") reports.push_back(ps::run_weights_stage(cfg));
      if (stage == "run") {
        for (const auto& f : {ps::run_grid_stage, ps::run_pheno_stage, ps::run_select_stage, ps::run_weights_stage}) {
          reports.push_back(f(cfg));
          std::cout << reports.back().describe() << '\n';
        }
        return 0;
      }
      for (const auto& r : reports) std::cout << r.describe() << '\n';
    } else if (stage == "manifest-validate") {
      const auto m = ps::read_manifest(manifest_path);
      ps::validate_manifest(m);
      std::cout << manifest_path << ": valid, " << m.records.size() << " records\n";
    } else if (stage == "summarize") {
      const auto m = ps::read_manifest(manifest_path);
      print_summary(m);
    } else if (stage == "eval knn") {
      return run_eval(eval_flags, ps::eval::ProbeMethod::knn);
    } else if (stage == "eval probe") {
      return run_eval(eval_flags, ps::eval::ProbeMethod::linear);
    } else if (stage == "fixture") {
      const auto s = ps::write_fixture(fixture_dir, fixture);
      std::cout << "fixture: points=" << s.points << " evi_rows=" << s.evi_rows
                << " catalog_records=" << s.catalog_records << "\n  config " << s.config.string() << '\n';
    }
  } catch (const ps::ValidationError& e) {
    std::cerr << "phenosample: " << stage << " failed: " << e.what() << '\n';
    return 3;
  } catch (const ps::ConfigError& e) {
    std::cerr << "phenosample: " << stage << " failed: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "phenosample: " << stage << " failed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
