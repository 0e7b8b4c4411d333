#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phenosample/geogrid.hpp"
#include "phenosample/phenology.hpp"

namespace phenosample {

using TimePoint = std::chrono::sys_seconds;

/// Accepts "YYYY-MM-DD" or RFC 3339 date-times ("Z" or numeric offsets,
/// optional fractional seconds, which are truncated). Throws DecodeError.
TimePoint parse_rfc3339(std::string_view text);
/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(TimePoint t);

struct SceneRecord {
  std::string scene_id;
  std::int64_t point_id = 0;
  TimePoint acquisition{};
  double cloud_fraction = 0.0;

  int year() const;
  int day_of_year() const;

  bool operator==(const SceneRecord&) const = default;
};

struct SelectionPolicy {
  double max_cloud = 0.20;
  int year_start = 2017;
  int year_end = 2024;
  int min_images = 2;

  /// Throws ConfigError unless 0 < max_cloud <= 1, year_start <= year_end and
  /// min_images >= 1.
  void validate() const;

  bool operator==(const SelectionPolicy&) const = default;
};

/// Source of candidate acquisitions. Implementations return everything they
/// have for the point that might fall in the window; `query()` applies the
/// exact window/year filter and ordering on top.
class CatalogBackend {
 public:
  virtual ~CatalogBackend() = default;
  virtual std::vector<SceneRecord> fetch(const GeoPoint& point, const DayWindow& window,
                                         const SelectionPolicy& policy) const = 0;
};

/// Records for `point` whose acquisition year lies in [year_start, year_end]
/// and whose day-of-year lies in `window`, ordered by (acquisition, scene_id).
/// Cloud cover is not filtered here.
std::vector<SceneRecord> query(const CatalogBackend& backend, const GeoPoint& point, const DayWindow& window,
                               const SelectionPolicy& policy);

/// In-memory catalog loaded from JSON-lines. Read-only after construction.
class LocalCatalog final : public CatalogBackend {
 public:
  explicit LocalCatalog(std::vector<SceneRecord> records);
  static LocalCatalog load(const std::filesystem::path& path);

  std::vector<SceneRecord> fetch(const GeoPoint& point, const DayWindow& window,
                                 const SelectionPolicy& policy) const override;

  std::size_t size() const { return size_; }

 private:
  std::unordered_map<std::int64_t, std::vector<SceneRecord>> by_point_;
  std::size_t size_ = 0;
};

struct RemoteOptions {
  int page_limit = 100;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{30};
};

/// Client for a minimal STAC-like search endpoint. Each request is a POST of
///   {"point": {"id", "lat", "lon"}, "datetime": ["<start>/<end>", ...],
///    "limit": n, "token": null | "<next_token>"}
/// answered by {"records": [...], "next_token": null | "..."}. Pages are
/// followed until next_token is null. 5xx answers and transport failures are
/// retried with exponential backoff; other HTTP errors fail immediately.
/// Safe for concurrent use: every call opens its own connection.
class RemoteCatalog final : public CatalogBackend {
 public:
  explicit RemoteCatalog(std::string url, RemoteOptions options = {});

  std::vector<SceneRecord> fetch(const GeoPoint& point, const DayWindow& window,
                                 const SelectionPolicy& policy) const override;

 private:
  std::string origin_;
  std::string path_;
  RemoteOptions options_;
};

/// "http://..." opens a RemoteCatalog, anything else a LocalCatalog file.
std::unique_ptr<CatalogBackend> open_catalog(const std::string& path_or_url, RemoteOptions options = {});

/// Datetime ranges ("start/end", inclusive whole days) covering `window` in
/// every year of the policy range. Used for the remote request body.
std::vector<std::string> window_datetime_ranges(const DayWindow& window, const SelectionPolicy& policy);

struct SeasonalSelection {
  std::int64_t point_id = 0;
  std::array<std::optional<SceneRecord>, kSeasonCount> scenes{};
  bool excluded = false;
  std::string reason;

  int retained() const;
  bool operator==(const SeasonalSelection&) const = default;
};

/// Per season: drop candidates with cloud_fraction >= max_cloud, keep the
/// least clouded, break ties by distance to the window target day and then by
/// scene_id. The point is excluded when fewer than min_images seasons keep a
/// scene.
SeasonalSelection select_seasonal_scenes(const GeoPoint& point, const SeasonWindows& windows,
                                         const CatalogBackend& backend, const SelectionPolicy& policy);

struct BuildOptions {
  std::size_t workers = 8;
  /// Fraction of points allowed to fail (backend errors) before the run fails.
  double max_failure_fraction = 0.0;
};

struct BuildResult {
  /// One entry per input point, ordered by point id. Failed points are
  /// present, excluded, with the error as reason.
  std::vector<SeasonalSelection> selections;
  std::vector<std::pair<std::int64_t, std::string>> failures;
};

using WindowTable = std::map<std::int64_t, SeasonWindows>;

/// Runs select_seasonal_scenes for every point on a bounded worker pool.
/// Output does not depend on the worker count. Throws Error when a point has
/// no windows or when the failure fraction exceeds the bound.
BuildResult build_dataset(std::span<const GeoPoint> points, const WindowTable& windows,
                          const CatalogBackend& backend, const SelectionPolicy& policy,
                          const BuildOptions& options = {});

void write_scene_records(std::span<const SceneRecord> records, const std::filesystem::path& path);
std::vector<SceneRecord> read_scene_records(const std::filesystem::path& path);

void write_selections(std::span<const SeasonalSelection> selections, const std::filesystem::path& path);
std::vector<SeasonalSelection> read_selections(const std::filesystem::path& path);

}  // namespace phenosample
