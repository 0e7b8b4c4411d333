#include "phenosample/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "json_io.hpp"
#include "phenosample/error.hpp"
#include "phenosample/geogrid.hpp"
#include "phenosample/raster.hpp"
#include "phenosample/sampler.hpp"

namespace phenosample {
namespace {

using detail::json;

json optional_day(const std::optional<int>& d) { return d ? json(*d) : json(nullptr); }

json dates_json(const PhenoDates& p) {
  json j = json::object();
  j["greenup"] = optional_day(p.greenup);
  j["maturity"] = optional_day(p.maturity);
  j["senescence"] = optional_day(p.senescence);
  j["dormancy"] = optional_day(p.dormancy);
  return j;
}

PhenoDates dates_from_json(const json& j) {
  std::array<std::optional<int>, 4> v{};
  const char* keys[] = {"greenup", "maturity", "senescence", "dormancy"};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& e = j.at(keys[i]);
    if (e.is_null()) continue;
    const int d = e.get<int>();
    if (d < 1 || d > 366) throw DecodeError(std::string(keys[i]) + " out of range [1, 366]");
    v[i] = d;
  }
  return PhenoDates::from_array(v);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::filesystem::path out_path(const PipelineConfig& cfg, const char* name) { return cfg.paths.output_dir / name; }

void ensure_output_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.paths.output_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.paths.output_dir.string() + ": " + ec.message());
}

std::optional<int> raster_day(const Raster& r, const GeoPoint& p) {
  const auto v = r.sample(p.lat, p.lon);
  if (!v || !std::isfinite(*v)) return std::nullopt;
  const long d = std::lround(*v);
  if (d < 1 || d > 366) return std::nullopt;
  return static_cast<int>(d);
}

}  // namespace

void write_pheno_records(const std::vector<PhenoRecord>& records, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& r : records) {
    json j;
    j["id"] = r.point_id;
    j["observed"] = dates_json(r.observed);
    j["dates"] = dates_json(r.dates);
    j["filled"] = r.filled();
    j["mode"] = std::string(window_mode_name(r.windows.mode));
    j["year_length"] = r.windows.year_length;
    j["repaired"] = r.windows.repaired;
    j["fallback"] = r.windows.fallback;
    json windows = json::array();
    for (const auto& w : r.windows.windows) {
      windows.push_back({{"start", w.start}, {"length", w.length}, {"target", w.target}});
    }
    j["windows"] = std::move(windows);
    os << detail::dump_line(j);
  }
  detail::write_text_file(path, os.str());
}

std::vector<PhenoRecord> read_pheno_records(const std::filesystem::path& path) {
  std::vector<PhenoRecord> out;
  detail::for_each_json_line(path, [&](const json& j, std::size_t line) {
    PhenoRecord r;
    r.point_id = j.at("id").get<std::int64_t>();
    r.observed = dates_from_json(j.at("observed"));
    r.dates = dates_from_json(j.at("dates"));
    r.windows.mode = parse_window_mode(j.at("mode").get<std::string>());
    r.windows.year_length = j.at("year_length").get<int>();
    r.windows.repaired = j.at("repaired").get<bool>();
    r.windows.fallback = j.at("fallback").get<bool>();
    const auto& ws = j.at("windows");
    if (!ws.is_array() || ws.size() != kSeasonCount) throw DecodeError("windows must hold 4 entries", line);
    for (std::size_t s = 0; s < kSeasonCount; ++s) {
      DayWindow w;
      w.start = ws[s].at("start").get<int>();
      w.length = ws[s].at("length").get<int>();
      w.target = ws[s].at("target").get<int>();
      w.year_length = r.windows.year_length;
      if (w.start < 1 || w.start > w.year_length || w.length < 1 || w.length > w.year_length ||
          !w.contains(w.target)) {
        throw DecodeError("invalid window for point " + std::to_string(r.point_id), line);
      }
      r.windows.windows[s] = w;
    }
    if (!out.empty() && out.back().point_id >= r.point_id) {
      throw DecodeError("pheno records must be sorted by unique id", line);
    }
    out.push_back(std::move(r));
  });
  return out;
}

WindowTable window_table(const std::vector<PhenoRecord>& records) {
  WindowTable t;
  for (const auto& r : records) t.emplace(r.point_id, r.windows);
  return t;
}

std::map<std::int64_t, std::vector<EviCurve>> read_evi_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::pair<std::int64_t, int>, EviCurve> curves;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    std::string_view cell[4];
    std::size_t pos = 0;
    for (int c = 0; c < 4; ++c) {
      const auto comma = row.find(',', pos);
      if ((c < 3) == (comma == std::string_view::npos)) {
        throw DecodeError(path.string() + ": expected 4 columns point_id,year,day,evi", number);
      }
      cell[c] = row.substr(pos, c < 3 ? comma - pos : std::string_view::npos);
      pos = comma + 1;
    }
    std::int64_t id = 0;
    int year = 0, day = 0;
    if (!parse_number(cell[0], id) || !parse_number(cell[1], year) || !parse_number(cell[2], day)) {
      if (number == 1) continue;  // header
      throw DecodeError(path.string() + ": bad point_id, year or day", number);
    }
    double evi = std::numeric_limits<double>::quiet_NaN();
    const auto v = trim(cell[3]);
    if (!v.empty() && v != "nan" && v != "NaN" && !parse_number(v, evi)) {
      throw DecodeError(path.string() + ": bad evi value", number);
    }
    const int n = days_in_year(year);
    if (day < 1 || day > n) throw DecodeError(path.string() + ": day out of range", number);
    auto& curve = curves[{id, year}];
    if (curve.values.empty()) {
      curve.year = year;
      curve.values.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    }
    curve.values[static_cast<std::size_t>(day - 1)] = evi;
  }
  std::map<std::int64_t, std::vector<EviCurve>> out;
  for (auto& [key, curve] : curves) {
    try {
      curve.validate();
    } catch (const ValidationError& e) {
      throw DecodeError(path.string() + ": point " + std::to_string(key.first) + " year " +
                        std::to_string(key.second) + ": " + e.what());
    }
    out[key.first].push_back(std::move(curve));
  }
  return out;
}

std::string StageReport::describe() const {
  std::ostringstream os;
  os << stage << ":";
  for (const auto& [k, v] : counts) os << ' ' << k << '=' << v;
  for (const auto& p : outputs) os << "\n  wrote " << p.string();
  return os.str();
}

ManifestHeader manifest_header(const PipelineConfig& cfg) {
  ManifestHeader h;
  h.created_at = cfg.created_at;
  h.grid = cfg.grid;
  h.pheno = cfg.pheno;
  h.window_mode = cfg.window_mode;
  h.year_length = cfg.year_length;
  h.policy = cfg.selection;
  return h;
}

StageReport run_grid_stage(const PipelineConfig& cfg) {
  if (!cfg.paths.land_mask) throw ConfigError("paths.land_mask is required for the grid stage");
  const Raster mask = read_raster(*cfg.paths.land_mask);
  const auto points = generate_grid(cfg.grid, mask);
  ensure_output_dir(cfg);
  const auto path = out_path(cfg, artifact::grid);
  write_points(points, path);
  StageReport r{"grid", {path}, {}};
  r.counts["points"] = static_cast<std::int64_t>(points.size());
  return r;
}

StageReport run_pheno_stage(const PipelineConfig& cfg) {
  const auto points = read_points(out_path(cfg, artifact::grid));
  PhenoTable observed;
  std::int64_t curves = 0;

  if (cfg.paths.evi_csv) {
    const auto by_point = read_evi_csv(*cfg.paths.evi_csv);
    for (const auto& p : points) {
      const auto it = by_point.find(p.id);
      if (it == by_point.end()) continue;
      std::vector<PhenoDates> per_year;
      for (const auto& c : it->second) {
        per_year.push_back(detect_transitions(c, cfg.pheno));
        ++curves;
      }
      const auto m = median_phenology(per_year);
      if (!m.empty()) observed.emplace(p.id, m);
    }
  } else if (!cfg.paths.pheno_rasters.empty()) {
    std::vector<std::array<Raster, 4>> years;
    for (const auto& set : cfg.paths.pheno_rasters) {
      years.push_back({read_raster(set.greenup), read_raster(set.maturity), read_raster(set.senescence),
                       read_raster(set.dormancy)});
    }
    for (const auto& p : points) {
      std::vector<PhenoDates> per_year;
      for (const auto& r : years) {
        per_year.push_back(PhenoDates{raster_day(r[0], p), raster_day(r[1], p), raster_day(r[2], p),
                                      raster_day(r[3], p)});
        ++curves;
      }
      const auto m = median_phenology(per_year);
      if (!m.empty()) observed.emplace(p.id, m);
    }
  } else if (cfg.window_mode == WindowMode::phenological) {
    throw ConfigError("phenological windows need paths.evi_csv or paths.pheno_rasters");
  }

  PhenoTable filled;
  if (cfg.window_mode == WindowMode::phenological) filled = fill_missing(points, observed, cfg.grid.earth_radius_km);

  std::vector<PhenoRecord> records;
  records.reserve(points.size());
  StageReport report{"pheno", {}, {}};
  auto& c = report.counts;
  c["points"] = static_cast<std::int64_t>(points.size());
  c["curves"] = curves;
  c["observed_complete"] = 0;
  c["filled"] = 0;
  c["repaired"] = 0;
  c["fallback"] = 0;
  for (const auto& p : points) {
    PhenoRecord rec;
    rec.point_id = p.id;
    if (const auto it = observed.find(p.id); it != observed.end()) rec.observed = it->second;
    rec.dates = cfg.window_mode == WindowMode::phenological ? filled.at(p.id) : rec.observed;
    rec.windows = season_windows(rec.dates, cfg.window_mode, cfg.year_length);
    c["observed_complete"] += rec.observed.complete() ? 1 : 0;
    c["filled"] += rec.filled() ? 1 : 0;
    c["repaired"] += rec.windows.repaired ? 1 : 0;
    c["fallback"] += rec.windows.fallback ? 1 : 0;
    records.push_back(std::move(rec));
  }
  ensure_output_dir(cfg);
  const auto path = out_path(cfg, artifact::pheno);
  write_pheno_records(records, path);
  report.outputs.push_back(path);
  return report;
}

StageReport run_select_stage(const PipelineConfig& cfg) {
  if (!cfg.paths.catalog) throw ConfigError("paths.catalog is required for the select stage");
  const auto points = read_points(out_path(cfg, artifact::grid));
  const auto windows = window_table(read_pheno_records(out_path(cfg, artifact::pheno)));
  const auto backend = open_catalog(*cfg.paths.catalog, cfg.remote);
  const auto result = build_dataset(points, windows, *backend, cfg.selection,
                                    BuildOptions{cfg.workers, cfg.max_failure_fraction});
  ensure_output_dir(cfg);
  const auto path = out_path(cfg, artifact::selections);
  write_selections(result.selections, path);

  StageReport report{"select", {path}, {}};
  auto& c = report.counts;
  c["points"] = static_cast<std::int64_t>(points.size());
  c["excluded"] = 0;
  c["scenes"] = 0;
  c["failures"] = static_cast<std::int64_t>(result.failures.size());
  for (const auto& s : result.selections) {
    c["excluded"] += s.excluded ? 1 : 0;
    if (!s.excluded) c["scenes"] += s.retained();
  }
  c["retained"] = c["points"] - c["excluded"];
  return report;
}

StageReport run_weights_stage(const PipelineConfig& cfg) {
  const auto points = read_points(out_path(cfg, artifact::grid));
  const auto windows = window_table(read_pheno_records(out_path(cfg, artifact::pheno)));
  const auto selections = read_selections(out_path(cfg, artifact::selections));

  std::array<std::optional<Raster>, kSeasonCount> ndvi;
  for (std::size_t s = 0; s < cfg.paths.ndvi.size(); ++s) {
    if (cfg.paths.ndvi[s]) ndvi[s] = read_raster(*cfg.paths.ndvi[s]);
  }
  std::optional<Raster> mountain;
  if (cfg.paths.mountain_mask) mountain = read_raster(*cfg.paths.mountain_mask);

  std::vector<LocationWeight> weights;
  weights.reserve(points.size());
  StageReport report{"weights", {}, {}};
  auto& c = report.counts;
  c["non_vegetated"] = 0;
  c["mountain"] = 0;
  c["ndvi_missing"] = 0;
  for (const auto& p : points) {
    LocationAttributes a;
    a.point_id = p.id;
    for (std::size_t s = 0; s < kSeasonCount; ++s) {
      if (!ndvi[s]) continue;
      if (const auto v = ndvi[s]->sample(p.lat, p.lon); v && std::isfinite(*v)) a.mean_ndvi[s] = *v;
    }
    if (mountain) {
      const auto v = mountain->sample(p.lat, p.lon);
      a.is_mountain = v && *v > 0.5;
    }
    weights.push_back(location_weight(a, cfg.weights));
    c["non_vegetated"] += weights.back().non_vegetated ? 1 : 0;
    c["mountain"] += weights.back().mountain ? 1 : 0;
    c["ndvi_missing"] += weights.back().ndvi_missing ? 1 : 0;
  }
  ensure_output_dir(cfg);
  const auto weights_path = out_path(cfg, artifact::weights);
  write_weights(weights, weights_path);

  auto manifest = assemble_manifest(manifest_header(cfg), points, selections, windows, weights);
  for (auto& r : manifest.records) {
    r.patch_px = cfg.patch_px;
    r.gsd_m = cfg.gsd_m;
  }
  validate_manifest(manifest);
  const auto manifest_path = out_path(cfg, artifact::manifest);
  write_manifest(manifest, manifest_path);

  report.outputs = {weights_path, manifest_path};
  c["records"] = static_cast<std::int64_t>(manifest.records.size());
  return report;
}

std::vector<StageReport> run_pipeline(const PipelineConfig& cfg) {
  return {run_grid_stage(cfg), run_pheno_stage(cfg), run_select_stage(cfg), run_weights_stage(cfg)};
}

}  // namespace phenosample
