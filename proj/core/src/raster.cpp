#include "phenosample/raster.hpp"

#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "json_io.hpp"

namespace phenosample {

Raster Raster::filled(double lat0, double lon0, double dlat, double dlon, std::size_t rows,
                      std::size_t cols, float value, float nodata) {
  Raster r{lat0, lon0, dlat, dlon, rows, cols, nodata, std::vector<float>(rows * cols, value)};
  r.validate();
  return r;
}

void Raster::validate() const {
  if (rows == 0 || cols == 0) throw ValidationError("raster shape", "rows and cols must be positive");
  if (rows * cols != values.size()) {
    throw ValidationError("raster shape", "rows*cols = " + std::to_string(rows * cols) +
                                              " but " + std::to_string(values.size()) + " values");
  }
  if (!(dlat != 0.0 && dlon != 0.0) || !std::isfinite(dlat) || !std::isfinite(dlon)) {
    throw ValidationError("raster cell size", "dlat and dlon must be finite and nonzero");
  }
  constexpr double kTol = 1e-9;
  const double lat1 = lat0 + static_cast<double>(rows) * dlat;
  const double lon1 = lon0 + static_cast<double>(cols) * dlon;
  if (std::min(lat0, lat1) < -90.0 - kTol || std::max(lat0, lat1) > 90.0 + kTol) {
    throw ValidationError("raster bounds", "latitude extent outside [-90, 90]");
  }
  if (std::min(lon0, lon1) < -180.0 - kTol || std::max(lon0, lon1) > 180.0 + kTol) {
    throw ValidationError("raster bounds", "longitude extent outside [-180, 180]");
  }
}

bool Raster::is_nodata(float v) const { return std::isnan(v) || v == nodata; }

std::optional<std::size_t> Raster::cell_index(double lat, double lon) const {
  const double fr = std::floor((lat - lat0) / dlat);
  const double fc = std::floor((lon - lon0) / dlon);
  if (fr < 0 || fc < 0 || fr >= static_cast<double>(rows) || fc >= static_cast<double>(cols)) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(fr) * cols + static_cast<std::size_t>(fc);
}

std::optional<double> Raster::sample(double lat, double lon) const {
  const auto idx = cell_index(lat, lon);
  if (!idx) return std::nullopt;
  const float v = values[*idx];
  if (is_nodata(v)) return std::nullopt;
  return static_cast<double>(v);
}

std::filesystem::path raster_data_path(const std::filesystem::path& header) {
  auto p = header;
  p.replace_extension(".bin");
  return p;
}

Raster read_raster(const std::filesystem::path& header) {
  const auto h = detail::read_json_file(header);
  Raster r;
  try {
    r.lat0 = h.at("lat0").get<double>();
    r.lon0 = h.at("lon0").get<double>();
    r.dlat = h.at("dlat").get<double>();
    r.dlon = h.at("dlon").get<double>();
    r.rows = h.at("rows").get<std::size_t>();
    r.cols = h.at("cols").get<std::size_t>();
    r.nodata = h.at("nodata").get<float>();
  } catch (const detail::json::exception& e) {
    throw DecodeError(header.string() + ": bad raster header: " + e.what());
  }
  r.values = detail::read_f32_le(raster_data_path(header), r.rows * r.cols);
  r.validate();
  return r;
}

void write_raster(const Raster& raster, const std::filesystem::path& header) {
  raster.validate();
  detail::json h;
  h["lat0"] = raster.lat0;
  h["lon0"] = raster.lon0;
  h["dlat"] = raster.dlat;
  h["dlon"] = raster.dlon;
  h["rows"] = raster.rows;
  h["cols"] = raster.cols;
  h["nodata"] = raster.nodata;
  detail::write_text_file(header, h.dump(2) + "\n");
  detail::write_f32_le(raster_data_path(header), raster.values);
}

}  // namespace phenosample
