#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "phenosample/catalog.hpp"
#include "phenosample/config.hpp"
#include "phenosample/manifest.hpp"
#include "phenosample/phenology.hpp"

namespace phenosample {

/// Artifact file names inside `paths.output_dir`.
namespace artifact {
inline constexpr const char* grid = "grid.jsonl";
inline constexpr const char* pheno = "pheno.jsonl";
inline constexpr const char* selections = "selections.jsonl";
inline constexpr const char* weights = "weights.jsonl";
inline constexpr const char* manifest = "manifest.jsonl";
}  // namespace artifact

/// Per-point output of the phenology stage.
struct PhenoRecord {
  std::int64_t point_id = 0;
  /// Multi-year median before gap filling.
  PhenoDates observed;
  /// Dates after gap filling; complete whenever a donor existed.
  PhenoDates dates;
  SeasonWindows windows;

  bool filled() const { return !(observed == dates); }
  bool operator==(const PhenoRecord&) const = default;
};

void write_pheno_records(const std::vector<PhenoRecord>& records, const std::filesystem::path& path);
std::vector<PhenoRecord> read_pheno_records(const std::filesystem::path& path);
WindowTable window_table(const std::vector<PhenoRecord>& records);

/// Daily EVI rows `point_id,year,day,evi` grouped into one curve per point
/// and year. Missing days and empty / nan values become no-data.
std::map<std::int64_t, std::vector<EviCurve>> read_evi_csv(const std::filesystem::path& path);

/// Counters and output paths of one stage, for logs and tests.
struct StageReport {
  std::string stage;
  std::vector<std::filesystem::path> outputs;
  std::map<std::string, std::int64_t> counts;

  std::string describe() const;
};

StageReport run_grid_stage(const PipelineConfig& cfg);
StageReport run_pheno_stage(const PipelineConfig& cfg);
StageReport run_select_stage(const PipelineConfig& cfg);
/// Writes the weights and the final manifest.
StageReport run_weights_stage(const PipelineConfig& cfg);
/// Every stage in order.
std::vector<StageReport> run_pipeline(const PipelineConfig& cfg);

ManifestHeader manifest_header(const PipelineConfig& cfg);

}  // namespace phenosample
