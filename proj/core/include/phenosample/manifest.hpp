#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phenosample/catalog.hpp"
#include "phenosample/geogrid.hpp"
#include "phenosample/phenology.hpp"
#include "phenosample/sampler.hpp"

namespace phenosample {

inline constexpr int kManifestFormatVersion = 1;
inline constexpr const char* kManifestFormatName = "phenosample-manifest";

struct ManifestSeason {
  int season = 0;  // 0 spring, 1 summer, 2 autumn, 3 winter
  int window_start = 1;
  int window_end = 1;  // exclusive, cyclic
  int target_day = 1;
  std::string scene_id;
  TimePoint acquisition{};
  double cloud_fraction = 0.0;

  bool operator==(const ManifestSeason&) const = default;
};

struct ManifestRecord {
  std::int64_t point_id = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::vector<ManifestSeason> seasons;
  double weight = 1.0;
  int patch_px = 256;
  double gsd_m = 10.0;

  double patch_extent_m() const { return patch_px * gsd_m; }
  bool operator==(const ManifestRecord&) const = default;
};

struct ManifestHeader {
  int format_version = kManifestFormatVersion;
  std::string created_at = "1970-01-01T00:00:00Z";
  GridSpec grid;
  PhenoConfig pheno;
  WindowMode window_mode = WindowMode::phenological;
  int year_length = 365;
  SelectionPolicy policy;

  bool operator==(const ManifestHeader&) const = default;
};

struct DatasetManifest {
  ManifestHeader header;
  std::vector<ManifestRecord> records;

  bool operator==(const DatasetManifest&) const = default;
};

/// Checks one record against the header. Throws ValidationError whose rule()
/// is one of: "min seasons", "max seasons", "season index", "duplicate season",
/// "cloud bound", "window", "scene in window", "weight", "patch", "coordinates".
void validate_record(const ManifestRecord& record, const ManifestHeader& header);

/// Header checks plus every record plus ordering ("duplicate point_id",
/// "point order").
void validate_manifest(const DatasetManifest& manifest);

/// Header line, then one JSON object per record; keys in a fixed order.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
std::string serialize_manifest(const DatasetManifest& manifest);

/// Streams and validates. Malformed lines raise DecodeError with the line
/// number; invariant violations raise ValidationError naming the rule.
DatasetManifest read_manifest(const std::filesystem::path& path);

struct ManifestSummary {
  std::size_t records = 0;
  std::size_t scenes = 0;
  std::map<int, std::size_t> coverage;  // seasons per record -> count
  double mean_cloud = 0.0;
  std::map<double, std::size_t> weight_histogram;
};

ManifestSummary summarize(const DatasetManifest& manifest);

/// Joins the stage outputs into records: excluded selections are dropped,
/// every other point needs coordinates plus season windows plus a weight.
DatasetManifest assemble_manifest(const ManifestHeader& header, std::span<const GeoPoint> points,
                                  std::span<const SeasonalSelection> selections, const WindowTable& windows,
                                  std::span<const LocationWeight> weights);

}  // namespace phenosample
