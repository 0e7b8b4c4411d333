#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace phenosample {

/// Regular lat/lon grid of 32-bit values. Cell (r, c) covers
/// [lat0 + r*dlat, lat0 + (r+1)*dlat) x [lon0 + c*dlon, lon0 + (c+1)*dlon);
/// dlat/dlon may be negative (north-up rasters use dlat < 0).
struct Raster {
  double lat0 = 0.0;
  double lon0 = 0.0;
  double dlat = 1.0;
  double dlon = 1.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  float nodata = -9999.0f;
  std::vector<float> values;

  static Raster filled(double lat0, double lon0, double dlat, double dlon, std::size_t rows,
                       std::size_t cols, float value, float nodata = -9999.0f);

  /// Throws ValidationError when the layout is inconsistent.
  void validate() const;

  bool is_nodata(float v) const;

  float& at(std::size_t row, std::size_t col) { return values[row * cols + col]; }
  float at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }

  /// Flat index of the cell containing (lat, lon), or nullopt outside the raster.
  std::optional<std::size_t> cell_index(double lat, double lon) const;

  /// Value at (lat, lon); nullopt outside the raster or on no-data.
  std::optional<double> sample(double lat, double lon) const;

  bool operator==(const Raster&) const = default;
};

/// Sibling binary file for a raster header: same stem, ".bin" extension.
std::filesystem::path raster_data_path(const std::filesystem::path& header);

/// Reads the JSON header and its little-endian float32 sibling.
Raster read_raster(const std::filesystem::path& header);

void write_raster(const Raster& raster, const std::filesystem::path& header);

}  // namespace phenosample
