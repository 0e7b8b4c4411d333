#include "phenosample/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "json_io.hpp"
#include "phenosample/catalog.hpp"
#include "phenosample/error.hpp"
#include "phenosample/eval/data.hpp"
#include "phenosample/raster.hpp"

namespace phenosample {
namespace {

using detail::json;

double uniform(Pcg64& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

struct Candidate {
  GeoPoint point;
  double score = 0.0;
};

// Candidates inside the study box, ranked by a wobbly elliptical distance.
std::vector<GeoPoint> study_points(const FixtureOptions& o, std::size_t& first_row, std::size_t& row_span) {
  const GridSpec& g = o.grid;
  const double half_lat = 6.0, half_lon = 9.0;
  std::vector<Candidate> cands;
  std::int64_t id = 0;
  first_row = g.row_count();
  std::size_t last_row = 0;
  for (std::size_t row = 0; row < g.row_count(); ++row) {
    const double lat = g.row_latitude(row);
    const std::size_t cells = g.row_cells(lat);
    const double dlon = 360.0 / static_cast<double>(cells);
    if (std::abs(lat - o.center_lat) > half_lat) {
      id += static_cast<std::int64_t>(cells);
      continue;
    }
    first_row = std::min(first_row, row);
    last_row = std::max(last_row, row);
    for (std::size_t col = 0; col < cells; ++col, ++id) {
      const double lon = -180.0 + (static_cast<double>(col) + 0.5) * dlon;
      if (std::abs(lon - o.center_lon) > half_lon) continue;
      const double y = (lat - o.center_lat) / 3.0, x = (lon - o.center_lon) / 4.5;
      const double wobble = 1.0 + 0.15 * std::sin(3.0 * std::atan2(y, x));
      cands.push_back({{id, lat, lon}, std::hypot(x, y) / wobble});
    }
  }
  if (cands.size() < o.points) throw ConfigError("fixture study box holds too few grid cells");
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.score != b.score ? a.score < b.score : a.point.id < b.point.id;
  });
  cands.resize(o.points);
  std::vector<GeoPoint> out;
  for (const auto& c : cands) out.push_back(c.point);
  std::sort(out.begin(), out.end(), [](const GeoPoint& a, const GeoPoint& b) { return a.id < b.id; });
  row_span = last_row - first_row + 1;
  return out;
}

// Fine mask aligned with the grid rows; each selected point gets its own cell.
Raster land_mask(const FixtureOptions& o, const std::vector<GeoPoint>& pts, std::size_t first_row,
                 std::size_t row_span) {
  const double step = o.grid.row_step_deg();
  const double dlon = 0.02;
  const double lon0 = o.center_lon - 10.0;
  Raster r = Raster::filled(-90.0 + static_cast<double>(first_row) * step, lon0, step, dlon, row_span,
                            static_cast<std::size_t>(std::lround(20.0 / dlon)), 0.0f);
  for (const auto& p : pts) {
    const auto idx = r.cell_index(p.lat, p.lon);
    if (!idx) throw Error("fixture point outside its own mask");
    r.values[*idx] = 1.0f;
  }
  return r;
}

Raster coarse(const FixtureOptions& o) {
  return Raster::filled(o.center_lat - 8.0, o.center_lon - 12.0, 0.25, 0.25, 64, 96, 0.0f);
}

std::string two_digits(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

}  // namespace

DoubleLogistic random_double_logistic(Pcg64& rng, int year_length) {
  DoubleLogistic p;
  p.base = uniform(rng, 0.05, 0.3);
  p.amplitude = uniform(rng, 0.2, 0.6);
  p.rise_day = uniform(rng, 80.0, 170.0);
  p.fall_day = uniform(rng, p.rise_day + 30.0, static_cast<double>(year_length) - 80.0);
  p.rise_rate = uniform(rng, 0.05, 0.3);
  p.fall_rate = uniform(rng, 0.05, 0.3);
  return p;
}

FixtureSummary write_fixture(const std::filesystem::path& dir, const FixtureOptions& o) {
  if (o.points == 0) throw ConfigError("fixture needs at least one point");
  if (o.evi_step_days < 1 || o.revisit_days < 1) throw ConfigError("fixture step sizes must be positive");
  o.grid.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  Pcg64 rng(o.seed, 7);
  std::size_t first_row = 0, row_span = 0;
  const auto points = study_points(o, first_row, row_span);
  write_raster(land_mask(o, points, first_row, row_span), dir / "land_mask.json");

  FixtureSummary summary;
  summary.points = points.size();

  // EVI: smooth latitude/longitude trends plus per-point jitter. Some points
  // have no record or a flat curve (gap fill) and some peak across 1 January.
  std::ostringstream evi;
  evi << "point_id,year,day,evi\n";
  for (const auto& p : points) {
    Pcg64 prng(derive_seed(o.seed, static_cast<std::uint64_t>(p.id)), 1);
    const double kind = prng.uniform();
    if (kind < 0.08) continue;
    const bool flat = kind < 0.14;
    const bool wraps = kind > 0.95;
    DoubleLogistic base;
    base.base = 0.1 + 0.05 * prng.uniform();
    base.amplitude = flat ? 0.0 : 0.3 + 0.2 * prng.uniform();
    base.rise_day = std::clamp(115.0 + 6.0 * (p.lat - o.center_lat) + uniform(prng, -10.0, 10.0), 60.0, 200.0);
    base.fall_day = std::clamp(270.0 - 5.0 * (p.lat - o.center_lat) + uniform(prng, -10.0, 10.0),
                               base.rise_day + 40.0, 330.0);
    base.rise_rate = uniform(prng, 0.06, 0.2);
    base.fall_rate = uniform(prng, 0.06, 0.2);
    for (const int year : o.evi_years) {
      DoubleLogistic yp = base;
      yp.rise_day += uniform(prng, -6.0, 6.0);
      yp.fall_day += uniform(prng, -6.0, 6.0);
      auto curve = synth_evi(yp, year);
      const int n = static_cast<int>(curve.values.size());
      if (wraps) std::rotate(curve.values.begin(), curve.values.begin() + n / 2, curve.values.end());
      const bool drop_year = prng.uniform() < 0.05;
      if (drop_year) continue;
      for (int day = 1; day <= n; day += o.evi_step_days) {
        const double v = curve.values[static_cast<std::size_t>(day - 1)];
        evi << p.id << ',' << year << ',' << day << ',';
        if (prng.uniform() < 0.03) {
          evi << "nan";
        } else {
          const double noisy = std::clamp(v + uniform(prng, -0.005, 0.005), -1.0, 1.0);
          evi << std::round(noisy * 1e4) / 1e4;
        }
        evi << '\n';
        ++summary.evi_rows;
      }
    }
  }
  detail::write_text_file(dir / "evi.csv", evi.str());

  // Catalog: regular revisits with quantised cloud cover so ties happen;
  // a few duplicate acquisitions from an overlapping tile.
  std::vector<SceneRecord> scenes;
  for (const auto& p : points) {
    Pcg64 prng(derive_seed(o.seed, static_cast<std::uint64_t>(p.id)), 2);
    const double cloudiness = prng.uniform() < 0.1 ? 0.9 : uniform(prng, 0.0, 0.5);
    const int offset = static_cast<int>(prng.bounded(static_cast<std::uint64_t>(o.revisit_days)));
    for (const int year : o.catalog_years) {
      const auto jan1 = std::chrono::sys_days{std::chrono::year{year} / std::chrono::January / 1};
      const int n = days_in_year(year);
      for (int doy = 1 + offset; doy <= n; doy += o.revisit_days) {
        const auto day = jan1 + std::chrono::days{doy - 1};
        const auto ymd = std::chrono::year_month_day{day};
        const std::string stamp = std::to_string(year) + two_digits(static_cast<int>(unsigned(ymd.month()))) +
                                  two_digits(static_cast<int>(unsigned(ymd.day())));
        double cloud = std::clamp(cloudiness + uniform(prng, -0.3, 0.4), 0.0, 1.0);
        cloud = std::round(cloud * 20.0) / 20.0;
        SceneRecord r;
        r.scene_id = "S2A_" + std::to_string(p.id) + "_" + stamp;
        r.point_id = p.id;
        r.acquisition = std::chrono::time_point_cast<std::chrono::seconds>(day + std::chrono::hours{10} +
                                                                           std::chrono::minutes{30});
        r.cloud_fraction = cloud;
        scenes.push_back(r);
        if (prng.uniform() < 0.03) {
          r.scene_id = "S2B_" + std::to_string(p.id) + "_" + stamp;
          scenes.push_back(r);
        }
      }
    }
  }
  write_scene_records(scenes, dir / "catalog.jsonl");
  summary.catalog_records = scenes.size();

  // Seasonal NDVI: vegetated overall, a barren patch in the south-west corner
  // and a no-data patch in the north-east.
  const char* season_files[] = {"ndvi_spring.json", "ndvi_summer.json", "ndvi_autumn.json", "ndvi_winter.json"};
  const double season_scale[] = {0.8, 1.0, 0.7, 0.4};
  for (std::size_t s = 0; s < kSeasonCount; ++s) {
    Raster r = coarse(o);
    for (std::size_t row = 0; row < r.rows; ++row) {
      for (std::size_t col = 0; col < r.cols; ++col) {
        const double lat = r.lat0 + (static_cast<double>(row) + 0.5) * r.dlat;
        const double lon = r.lon0 + (static_cast<double>(col) + 0.5) * r.dlon;
        float v = static_cast<float>(season_scale[s] * (0.55 + 0.1 * std::sin(lat) * std::cos(lon)));
        if (lat < o.center_lat - 1.0 && lon < o.center_lon - 1.5) v = 0.05f;
        if (lat > o.center_lat + 1.0 && lon > o.center_lon + 2.0) v = r.nodata;
        r.at(row, col) = v;
      }
    }
    write_raster(r, dir / season_files[s]);
  }

  Raster mountain = coarse(o);
  for (std::size_t row = 0; row < mountain.rows; ++row) {
    for (std::size_t col = 0; col < mountain.cols; ++col) {
      const double lat = mountain.lat0 + (static_cast<double>(row) + 0.5) * mountain.dlat;
      const double lon = mountain.lon0 + (static_cast<double>(col) + 0.5) * mountain.dlon;
      const double y = (lat - o.center_lat - 0.5) / 1.0, x = (lon - o.center_lon - 1.0) / 3.0;
      mountain.at(row, col) = x * x + y * y < 1.0 ? 1.0f : 0.0f;
    }
  }
  write_raster(mountain, dir / "mountain.json");

  // Embeddings: 16-d Gaussian clusters keyed by a latitude/longitude class.
  eval::EmbeddingTable emb;
  const std::size_t dim = 16, classes = 4;
  emb.values = eval::Matrix(points.size(), dim);
  std::ostringstream labels;
  Pcg64 erng(derive_seed(o.seed, 99), 3);
  std::vector<std::vector<double>> centers(classes, std::vector<double>(dim));
  for (auto& c : centers)
    for (auto& v : c) v = uniform(erng, -1.0, 1.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const int cls = (p.lat > o.center_lat ? 2 : 0) + (p.lon > o.center_lon ? 1 : 0);
    emb.ids.push_back(p.id);
    for (std::size_t d = 0; d < dim; ++d) {
      const double noise = uniform(erng, -0.6, 0.6);
      emb.values(i, d) = centers[static_cast<std::size_t>(cls)][d] + noise;
    }
    json j;
    j["id"] = p.id;
    j["y"] = cls;
    labels << detail::dump_line(j);
  }
  eval::write_embeddings(emb, dir / "embeddings.json");
  detail::write_text_file(dir / "labels.jsonl", labels.str());

  json cfg;
  cfg["seed"] = o.seed;
  cfg["grid"] = {{"spacing_km", o.grid.spacing_km}};
  cfg["selection"] = {{"max_cloud", 0.20}, {"year_start", 2017}, {"year_end", 2024}, {"min_images", 2}};
  cfg["paths"] = {{"land_mask", "land_mask.json"},
                  {"evi_csv", "evi.csv"},
                  {"catalog", "catalog.jsonl"},
                  {"ndvi", {season_files[0], season_files[1], season_files[2], season_files[3]}},
                  {"mountain_mask", "mountain.json"},
                  {"output_dir", "out"}};
  summary.config = dir / "config.json";
  detail::write_text_file(summary.config, cfg.dump(2) + "\n");
  return summary;
}

}  // namespace phenosample
