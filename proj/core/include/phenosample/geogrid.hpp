#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "phenosample/raster.hpp"

namespace phenosample {

inline constexpr double kEarthRadiusKm = 6371.0088;  // IUGG mean radius

struct GeoPoint {
  std::int64_t id = 0;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

struct GridSpec {
  double spacing_km = 23.0;
  double earth_radius_km = kEarthRadiusKm;

  /// Throws ConfigError unless 0 < spacing_km < pi * earth_radius_km.
  void validate() const;

  /// Latitude step in degrees.
  double row_step_deg() const;
  /// Number of latitude rows covering [-90, 90].
  std::size_t row_count() const;
  /// Centre latitude of row `row`.
  double row_latitude(std::size_t row) const;
  /// Number of longitude cells in a row at latitude `lat_deg` (at least 1).
  std::size_t row_cells(double lat_deg) const;

  bool operator==(const GridSpec&) const = default;
};

/// Equal-area grid of cell centres over the land cells of `land_mask`.
///
/// Rows are spaced `spacing_km` apart in latitude; a row at latitude phi holds
/// round(2*pi*R*cos(phi) / spacing) equally spaced cells. A candidate is kept
/// iff the mask cell containing it holds 1 (no-data and cells outside the
/// raster count as sea). Ids are the candidate's position in the full
/// (unmasked) row-major enumeration, so they are stable under mask changes.
/// Output is sorted by (lat, lon).
std::vector<GeoPoint> generate_grid(const GridSpec& spec, const Raster& land_mask);

/// Great-circle distance on a sphere of radius `radius_km`.
double haversine_km(const GeoPoint& a, const GeoPoint& b, double radius_km = kEarthRadiusKm);

/// Grid output: JSON-lines with keys id, lat, lon.
void write_points(const std::vector<GeoPoint>& points, const std::filesystem::path& path);
std::vector<GeoPoint> read_points(const std::filesystem::path& path);

}  // namespace phenosample
