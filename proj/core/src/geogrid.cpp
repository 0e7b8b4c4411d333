#include "phenosample/geogrid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "json_io.hpp"
#include "phenosample/error.hpp"

namespace phenosample {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool is_land(const Raster& mask, double lat, double lon) {
  const auto v = mask.sample(lat, lon);
  return v.has_value() && *v > 0.5;
}

}  // namespace

void GridSpec::validate() const {
  if (!(earth_radius_km > 0.0) || !std::isfinite(earth_radius_km)) {
    throw ConfigError("grid.earth_radius_km must be positive");
  }
  if (!(spacing_km > 0.0) || !(spacing_km < std::numbers::pi * earth_radius_km)) {
    throw ConfigError("grid.spacing_km must be in (0, pi * earth_radius_km)");
  }
}

double GridSpec::row_step_deg() const { return spacing_km / earth_radius_km / kDegToRad; }

std::size_t GridSpec::row_count() const {
  return static_cast<std::size_t>(std::floor(180.0 / row_step_deg()));
}

double GridSpec::row_latitude(std::size_t row) const {
  return -90.0 + (static_cast<double>(row) + 0.5) * row_step_deg();
}

std::size_t GridSpec::row_cells(double lat_deg) const {
  const double circumference = 2.0 * std::numbers::pi * earth_radius_km * std::cos(lat_deg * kDegToRad);
  // std::round is half-away-from-zero.
  const double n = std::round(circumference / spacing_km);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

std::vector<GeoPoint> generate_grid(const GridSpec& spec, const Raster& land_mask) {
  spec.validate();
  land_mask.validate();

  std::vector<GeoPoint> out;
  std::int64_t next_id = 0;
  const std::size_t rows = spec.row_count();
  for (std::size_t row = 0; row < rows; ++row) {
    const double lat = spec.row_latitude(row);
    const std::size_t cells = spec.row_cells(lat);
    const double dlon = 360.0 / static_cast<double>(cells);
    for (std::size_t col = 0; col < cells; ++col, ++next_id) {
      const double lon = -180.0 + (static_cast<double>(col) + 0.5) * dlon;
      if (is_land(land_mask, lat, lon)) out.push_back({next_id, lat, lon});
    }
  }
  return out;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b, double radius_km) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double sdphi = std::sin((phi2 - phi1) / 2.0);
  const double sdlam = std::sin((b.lon - a.lon) * kDegToRad / 2.0);
  const double h = sdphi * sdphi + std::cos(phi1) * std::cos(phi2) * sdlam * sdlam;
  return 2.0 * radius_km * std::asin(std::sqrt(std::min(1.0, h)));
}

void write_points(const std::vector<GeoPoint>& points, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& p : points) {
    detail::json j;
    j["id"] = p.id;
    j["lat"] = p.lat;
    j["lon"] = p.lon;
    os << detail::dump_line(j);
  }
  detail::write_text_file(path, os.str());
}

std::vector<GeoPoint> read_points(const std::filesystem::path& path) {
  std::vector<GeoPoint> out;
  detail::for_each_json_line(path, [&](const detail::json& j, std::size_t line) {
    GeoPoint p{j.at("id").get<std::int64_t>(), j.at("lat").get<double>(), j.at("lon").get<double>()};
    if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
      throw DecodeError(path.string() + ": coordinates out of range", line);
    }
    out.push_back(p);
  });
  return out;
}

}  // namespace phenosample
