#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phenosample/catalog.hpp"
#include "phenosample/eval/folds.hpp"
#include "phenosample/eval/knn.hpp"
#include "phenosample/eval/probe.hpp"
#include "phenosample/geogrid.hpp"
#include "phenosample/phenology.hpp"
#include "phenosample/sampler.hpp"

namespace phenosample {

/// Four transition rasters (day-of-year values) for one year.
struct PhenoRasterSet {
  int year = 0;
  std::filesystem::path greenup, maturity, senescence, dormancy;
};

struct PipelinePaths {
  std::optional<std::filesystem::path> land_mask;
  std::optional<std::filesystem::path> evi_csv;
  std::vector<PhenoRasterSet> pheno_rasters;
  /// Local JSON-lines file or http:// search endpoint.
  std::optional<std::string> catalog;
  /// Mean NDVI per season (spring, summer, autumn, winter); empty entries allowed.
  std::vector<std::optional<std::filesystem::path>> ndvi;
  std::optional<std::filesystem::path> mountain_mask;
  std::filesystem::path output_dir = "out";
};

struct PipelineConfig {
  GridSpec grid;
  PhenoConfig pheno;
  WindowMode window_mode = WindowMode::phenological;
  int year_length = 365;
  SelectionPolicy selection;
  std::size_t workers = 8;
  double max_failure_fraction = 0.0;
  RemoteOptions remote;
  WeightPolicy weights;
  eval::KnnConfig knn;
  eval::ProbeConfig probe;
  eval::FoldParams folds;
  int patch_px = 256;
  double gsd_m = 10.0;
  std::uint64_t seed = 0;
  /// Written into the manifest header; fixed so reruns are byte-identical.
  std::string created_at = "1970-01-01T00:00:00Z";
  PipelinePaths paths;

  /// Every sub-config invariant; input paths must exist.
  void validate() const;
};

/// Parses a JSON config. Unknown keys are errors that suggest the closest
/// known key; relative paths resolve against `base_dir`. Missing keys take
/// their defaults. Throws ConfigError naming the offending field.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);

/// Closest candidate by edit distance, if any is within distance 3.
std::optional<std::string> suggest_key(std::string_view key, const std::vector<std::string>& candidates);

}  // namespace phenosample
