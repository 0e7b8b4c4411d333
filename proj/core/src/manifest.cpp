#include "phenosample/manifest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "phenosample/error.hpp"

namespace phenosample {
namespace {

using detail::json;

int cyclic_length(int start, int end, int year_length) {
  const int d = ((end - start) % year_length + year_length) % year_length;
  return d == 0 ? year_length : d;
}

json header_to_json(const ManifestHeader& h) {
  json j;
  j["format"] = kManifestFormatName;
  j["format_version"] = h.format_version;
  j["created_at"] = h.created_at;
  j["grid"] = {{"spacing_km", h.grid.spacing_km}, {"earth_radius_km", h.grid.earth_radius_km}};
  j["phenology"] = {{"low_fraction", h.pheno.low_fraction},
                    {"high_fraction", h.pheno.high_fraction},
                    {"window_mode", window_mode_name(h.window_mode)},
                    {"year_length", h.year_length}};
  j["selection"] = {{"max_cloud", h.policy.max_cloud},
                    {"year_start", h.policy.year_start},
                    {"year_end", h.policy.year_end},
                    {"min_images", h.policy.min_images}};
  return j;
}

ManifestHeader header_from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kManifestFormatName) {
    throw DecodeError("first line is not a phenosample manifest header", 1);
  }
  ManifestHeader h;
  h.format_version = j.at("format_version").get<int>();
  if (h.format_version != kManifestFormatVersion) {
    throw ValidationError("format version", "unsupported manifest format_version " + std::to_string(h.format_version));
  }
  h.created_at = j.at("created_at").get<std::string>();
  const auto& g = j.at("grid");
  h.grid.spacing_km = g.at("spacing_km").get<double>();
  h.grid.earth_radius_km = g.at("earth_radius_km").get<double>();
  const auto& p = j.at("phenology");
  h.pheno.low_fraction = p.at("low_fraction").get<double>();
  h.pheno.high_fraction = p.at("high_fraction").get<double>();
  h.window_mode = parse_window_mode(p.at("window_mode").get<std::string>());
  h.year_length = p.at("year_length").get<int>();
  const auto& s = j.at("selection");
  h.policy.max_cloud = s.at("max_cloud").get<double>();
  h.policy.year_start = s.at("year_start").get<int>();
  h.policy.year_end = s.at("year_end").get<int>();
  h.policy.min_images = s.at("min_images").get<int>();
  return h;
}

void validate_header(const ManifestHeader& h) {
  if (h.format_version != kManifestFormatVersion) {
    throw ValidationError("format version", "unsupported manifest format_version " + std::to_string(h.format_version));
  }
  try {
    h.grid.validate();
    h.pheno.validate();
    h.policy.validate();
  } catch (const ConfigError& e) {
    throw ValidationError("header", e.what());
  }
  if (h.year_length != 365 && h.year_length != 366) throw ValidationError("header", "year_length must be 365 or 366");
}

json record_to_json(const ManifestRecord& r) {
  json j;
  j["point_id"] = r.point_id;
  j["lat"] = r.lat;
  j["lon"] = r.lon;
  j["weight"] = r.weight;
  j["patch_px"] = r.patch_px;
  j["gsd_m"] = r.gsd_m;
  json seasons = json::array();
  for (const auto& s : r.seasons) {
    json e;
    e["season"] = s.season;
    e["window_start"] = s.window_start;
    e["window_end"] = s.window_end;
    e["target_day"] = s.target_day;
    e["scene_id"] = s.scene_id;
    e["datetime"] = format_rfc3339(s.acquisition);
    e["cloud_fraction"] = s.cloud_fraction;
    seasons.push_back(std::move(e));
  }
  j["seasons"] = std::move(seasons);
  return j;
}

ManifestRecord record_from_json(const json& j) {
  ManifestRecord r;
  r.point_id = j.at("point_id").get<std::int64_t>();
  r.lat = j.at("lat").get<double>();
  r.lon = j.at("lon").get<double>();
  r.weight = j.at("weight").get<double>();
  r.patch_px = j.at("patch_px").get<int>();
  r.gsd_m = j.at("gsd_m").get<double>();
  for (const auto& e : j.at("seasons")) {
    ManifestSeason s;
    s.season = e.at("season").get<int>();
    s.window_start = e.at("window_start").get<int>();
    s.window_end = e.at("window_end").get<int>();
    s.target_day = e.at("target_day").get<int>();
    s.scene_id = e.at("scene_id").get<std::string>();
    s.acquisition = parse_rfc3339(e.at("datetime").get<std::string>());
    s.cloud_fraction = e.at("cloud_fraction").get<double>();
    r.seasons.push_back(std::move(s));
  }
  return r;
}

void check_order(const ManifestRecord& r, const ManifestRecord* previous) {
  if (previous == nullptr) return;
  if (r.point_id == previous->point_id) {
    throw ValidationError("duplicate point_id", "point_id " + std::to_string(r.point_id) + " appears twice");
  }
  if (r.point_id < previous->point_id) {
    throw ValidationError("point order", "point_id " + std::to_string(r.point_id) + " follows " +
                                             std::to_string(previous->point_id));
  }
}

}  // namespace

void validate_record(const ManifestRecord& r, const ManifestHeader& h) {
  const std::string who = "point " + std::to_string(r.point_id) + ": ";
  if (!(r.lat >= -90.0 && r.lat <= 90.0 && r.lon >= -180.0 && r.lon <= 180.0)) {
    throw ValidationError("coordinates", who + "lat/lon out of range");
  }
  if (!(r.weight > 0.0) || !std::isfinite(r.weight)) throw ValidationError("weight", who + "weight must be positive");
  if (r.patch_px <= 0 || !(r.gsd_m > 0.0)) throw ValidationError("patch", who + "patch_px and gsd_m must be positive");
  const int count = static_cast<int>(r.seasons.size());
  const int min_seasons = std::max(h.policy.min_images, 2);
  if (count < min_seasons) {
    throw ValidationError("min seasons", who + std::to_string(count) + " season entries, need at least " +
                                             std::to_string(min_seasons));
  }
  if (count > kSeasonCount) throw ValidationError("max seasons", who + std::to_string(count) + " season entries");
  std::array<bool, kSeasonCount> seen{};
  for (const auto& s : r.seasons) {
    if (s.season < 0 || s.season >= kSeasonCount) {
      throw ValidationError("season index", who + "season " + std::to_string(s.season));
    }
    if (seen[static_cast<std::size_t>(s.season)]) {
      throw ValidationError("duplicate season", who + "season " + std::to_string(s.season) + " listed twice");
    }
    seen[static_cast<std::size_t>(s.season)] = true;
    if (!(s.cloud_fraction >= 0.0 && s.cloud_fraction < h.policy.max_cloud)) {
      throw ValidationError("cloud bound", who + "scene " + s.scene_id + " has cloud_fraction " +
                                               std::to_string(s.cloud_fraction));
    }
    const auto in_year = [&](int d) { return d >= 1 && d <= h.year_length; };
    if (!in_year(s.window_start) || !in_year(s.window_end) || !in_year(s.target_day) || s.scene_id.empty()) {
      throw ValidationError("window", who + "season " + std::to_string(s.season) + " has an invalid window");
    }
    const DayWindow w{s.window_start, cyclic_length(s.window_start, s.window_end, h.year_length), s.target_day,
                      h.year_length};
    if (!w.contains(s.target_day)) {
      throw ValidationError("window", who + "target day outside window for season " + std::to_string(s.season));
    }
    const SceneRecord scene{s.scene_id, r.point_id, s.acquisition, s.cloud_fraction};
    const int y = scene.year();
    if (!w.contains(scene.day_of_year()) || y < h.policy.year_start || y > h.policy.year_end) {
      throw ValidationError("scene in window", who + "scene " + s.scene_id + " acquired outside its season window");
    }
  }
}

void validate_manifest(const DatasetManifest& m) {
  validate_header(m.header);
  const ManifestRecord* previous = nullptr;
  for (const auto& r : m.records) {
    validate_record(r, m.header);
    check_order(r, previous);
    previous = &r;
  }
}

std::string serialize_manifest(const DatasetManifest& m) {
  validate_manifest(m);
  std::ostringstream os;
  os << detail::dump_line(header_to_json(m.header));
  for (const auto& r : m.records) os << detail::dump_line(record_to_json(r));
  return os.str();
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  detail::write_text_file(path, serialize_manifest(m));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  DatasetManifest m;
  bool have_header = false;
  detail::for_each_json_line(path, [&](const json& j, std::size_t line) {
    try {
      if (!have_header) {
        m.header = header_from_json(j);
        validate_header(m.header);
        have_header = true;
        return;
      }
      ManifestRecord r = record_from_json(j);
      validate_record(r, m.header);
      check_order(r, m.records.empty() ? nullptr : &m.records.back());
      m.records.push_back(std::move(r));
    } catch (const ValidationError& e) {
      throw ValidationError(e.rule(), path.string() + " line " + std::to_string(line) + ": " + e.what());
    }
  });
  if (!have_header) throw DecodeError(path.string() + ": empty manifest (no header line)");
  return m;
}

ManifestSummary summarize(const DatasetManifest& m) {
  ManifestSummary s;
  s.records = m.records.size();
  double cloud_sum = 0.0;
  for (const auto& r : m.records) {
    ++s.coverage[static_cast<int>(r.seasons.size())];
    ++s.weight_histogram[r.weight];
    for (const auto& e : r.seasons) {
      cloud_sum += e.cloud_fraction;
      ++s.scenes;
    }
  }
  s.mean_cloud = s.scenes == 0 ? 0.0 : cloud_sum / static_cast<double>(s.scenes);
  return s;
}

DatasetManifest assemble_manifest(const ManifestHeader& header, std::span<const GeoPoint> points,
                                  std::span<const SeasonalSelection> selections, const WindowTable& windows,
                                  std::span<const LocationWeight> weights) {
  std::map<std::int64_t, GeoPoint> point_by_id;
  for (const auto& p : points) point_by_id[p.id] = p;
  std::map<std::int64_t, double> weight_by_id;
  for (const auto& w : weights) weight_by_id[w.point_id] = w.weight;

  DatasetManifest m;
  m.header = header;
  for (const auto& sel : selections) {
    if (sel.excluded) continue;
    const auto p = point_by_id.find(sel.point_id);
    const auto w = weight_by_id.find(sel.point_id);
    const auto win = windows.find(sel.point_id);
    if (p == point_by_id.end() || w == weight_by_id.end() || win == windows.end()) {
      throw Error("assemble_manifest: point " + std::to_string(sel.point_id) +
                  " lacks coordinates, weight or season windows");
    }
    ManifestRecord r;
    r.point_id = sel.point_id;
    r.lat = p->second.lat;
    r.lon = p->second.lon;
    r.weight = w->second;
    for (std::size_t k = 0; k < kSeasonCount; ++k) {
      const auto& scene = sel.scenes[k];
      if (!scene) continue;
      const DayWindow& dw = win->second.windows[k];
      r.seasons.push_back({static_cast<int>(k), dw.start, dw.end(), dw.target, scene->scene_id,
                           scene->acquisition, scene->cloud_fraction});
    }
    m.records.push_back(std::move(r));
  }
  std::sort(m.records.begin(), m.records.end(), [](const auto& a, const auto& b) { return a.point_id < b.point_id; });
  validate_manifest(m);
  return m;
}

}  // namespace phenosample
