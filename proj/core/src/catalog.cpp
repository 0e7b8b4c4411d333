#include "phenosample/catalog.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "catalog_json.hpp"
#include "phenosample/error.hpp"

namespace phenosample {
namespace {

using namespace std::chrono;

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw DecodeError("truncated datetime '" + std::string(text) + "'");
  int value = 0;
  const char* begin = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(begin, begin + len, value);
  if (ec != std::errc{} || ptr != begin + len) {
    throw DecodeError("bad datetime '" + std::string(text) + "'");
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) throw DecodeError("bad datetime '" + std::string(text) + "'");
}

bool scene_less(const SceneRecord& a, const SceneRecord& b) {
  return std::tie(a.acquisition, a.scene_id) < std::tie(b.acquisition, b.scene_id);
}

}  // namespace

TimePoint parse_rfc3339(std::string_view text) {
  const int y = read_int(text, 0, 4);
  expect(text, 4, '-');
  const int mo = read_int(text, 5, 2);
  expect(text, 7, '-');
  const int d = read_int(text, 8, 2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw DecodeError("invalid calendar date '" + std::string(text) + "'");
  TimePoint t = sys_days{ymd};
  if (text.size() == 10) return t;

  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') throw DecodeError("bad datetime '" + std::string(text) + "'");
  const int hh = read_int(text, 11, 2);
  expect(text, 13, ':');
  const int mm = read_int(text, 14, 2);
  expect(text, 16, ':');
  const int ss = read_int(text, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw DecodeError("invalid time '" + std::string(text) + "'");
  t += hours{hh} + minutes{mm} + seconds{ss};
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  if (pos >= text.size()) throw DecodeError("datetime without offset '" + std::string(text) + "'");
  if (text[pos] == 'Z' || text[pos] == 'z') {
    if (pos + 1 != text.size()) throw DecodeError("bad datetime '" + std::string(text) + "'");
    return t;
  }
  if (text[pos] != '+' && text[pos] != '-') throw DecodeError("bad datetime offset '" + std::string(text) + "'");
  const int sign = text[pos] == '+' ? 1 : -1;
  const int oh = read_int(text, pos + 1, 2);
  expect(text, pos + 3, ':');
  const int om = read_int(text, pos + 4, 2);
  if (pos + 6 != text.size()) throw DecodeError("bad datetime '" + std::string(text) + "'");
  return t - sign * (hours{oh} + minutes{om});
}

std::string format_rfc3339(TimePoint t) {
  const auto dp = floor<days>(t);
  const year_month_day ymd{dp};
  const hh_mm_ss hms{t - dp};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

int SceneRecord::year() const {
  return static_cast<int>(year_month_day{floor<days>(acquisition)}.year());
}

int SceneRecord::day_of_year() const {
  const auto dp = floor<days>(acquisition);
  const year_month_day ymd{dp};
  return static_cast<int>((dp - sys_days{ymd.year() / January / 1}).count()) + 1;
}

void SelectionPolicy::validate() const {
  if (!(max_cloud > 0.0 && max_cloud <= 1.0)) throw ConfigError("selection.max_cloud must be in (0, 1]");
  if (year_start > year_end) throw ConfigError("selection.year_start must not exceed selection.year_end");
  if (min_images < 1) throw ConfigError("selection.min_images must be at least 1");
}

std::vector<SceneRecord> query(const CatalogBackend& backend, const GeoPoint& point, const DayWindow& window,
                               const SelectionPolicy& policy) {
  auto records = backend.fetch(point, window, policy);
  std::erase_if(records, [&](const SceneRecord& r) {
    const int y = r.year();
    return r.point_id != point.id || y < policy.year_start || y > policy.year_end ||
           !window.contains(r.day_of_year());
  });
  std::sort(records.begin(), records.end(), scene_less);
  return records;
}

LocalCatalog::LocalCatalog(std::vector<SceneRecord> records) : size_(records.size()) {
  for (auto& r : records) by_point_[r.point_id].push_back(std::move(r));
  for (auto& [id, list] : by_point_) std::sort(list.begin(), list.end(), scene_less);
}

LocalCatalog LocalCatalog::load(const std::filesystem::path& path) {
  return LocalCatalog(read_scene_records(path));
}

std::vector<SceneRecord> LocalCatalog::fetch(const GeoPoint& point, const DayWindow& window,
                                             const SelectionPolicy& policy) const {
  const auto it = by_point_.find(point.id);
  if (it == by_point_.end()) return {};
  std::vector<SceneRecord> out;
  for (const auto& r : it->second) {
    const int y = r.year();
    if (y >= policy.year_start && y <= policy.year_end && window.contains(r.day_of_year())) out.push_back(r);
  }
  return out;
}

std::vector<std::string> window_datetime_ranges(const DayWindow& window, const SelectionPolicy& policy) {
  std::vector<std::string> out;
  const auto range = [&](sys_days first, sys_days last) {
    out.push_back(format_rfc3339(first) + "/" + format_rfc3339(last + days{1} - seconds{1}));
  };
  for (int y = policy.year_start; y <= policy.year_end; ++y) {
    const sys_days jan1{year{y} / January / 1};
    const int n = days_in_year(y);
    const int first = window.start;
    const int last = first + window.length - 1;
    if (last <= n) {
      range(jan1 + days{first - 1}, jan1 + days{last - 1});
    } else {
      if (first <= n) range(jan1 + days{first - 1}, jan1 + days{n - 1});
      range(jan1, jan1 + days{std::min(last - window.year_length, n) - 1});
    }
  }
  return out;
}

int SeasonalSelection::retained() const {
  return static_cast<int>(std::count_if(scenes.begin(), scenes.end(), [](const auto& s) { return s.has_value(); }));
}

SeasonalSelection select_seasonal_scenes(const GeoPoint& point, const SeasonWindows& windows,
                                         const CatalogBackend& backend, const SelectionPolicy& policy) {
  SeasonalSelection out;
  out.point_id = point.id;
  for (std::size_t s = 0; s < windows.windows.size(); ++s) {
    const DayWindow& w = windows.windows[s];
    const auto candidates = query(backend, point, w, policy);
    const SceneRecord* best = nullptr;
    for (const auto& c : candidates) {
      if (!(c.cloud_fraction < policy.max_cloud)) continue;
      if (best == nullptr) {
        best = &c;
        continue;
      }
      const auto key = [&](const SceneRecord& r) {
        return std::make_tuple(r.cloud_fraction, w.distance_to_target(r.day_of_year()), std::string_view(r.scene_id));
      };
      if (key(c) < key(*best)) best = &c;
    }
    if (best != nullptr) out.scenes[s] = *best;
  }
  const int kept = out.retained();
  if (kept < policy.min_images) {
    out.excluded = true;
    out.reason = "only " + std::to_string(kept) + " seasonal scene(s) below the cloud limit; need " +
                 std::to_string(policy.min_images);
  }
  return out;
}

BuildResult build_dataset(std::span<const GeoPoint> points, const WindowTable& windows,
                          const CatalogBackend& backend, const SelectionPolicy& policy,
                          const BuildOptions& options) {
  policy.validate();
  for (const auto& p : points) {
    if (!windows.contains(p.id)) throw Error("build_dataset: no season windows for point " + std::to_string(p.id));
  }

  std::vector<SeasonalSelection> results(points.size());
  std::vector<std::optional<std::string>> errors(points.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = select_seasonal_scenes(points[i], windows.at(points[i].id), backend, policy);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        results[i] = SeasonalSelection{};
        results[i].point_id = points[i].id;
        results[i].excluded = true;
        results[i].reason = std::string("query failed: ") + e.what();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(points.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  BuildResult out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (errors[i]) out.failures.emplace_back(points[i].id, *errors[i]);
  }
  if (!points.empty()) {
    const double fraction = static_cast<double>(out.failures.size()) / static_cast<double>(points.size());
    if (fraction > options.max_failure_fraction) {
      throw Error("build_dataset: " + std::to_string(out.failures.size()) + " of " + std::to_string(points.size()) +
                  " points failed; first: point " + std::to_string(out.failures.front().first) + ": " +
                  out.failures.front().second);
    }
  }
  out.selections = std::move(results);
  std::sort(out.selections.begin(), out.selections.end(),
            [](const auto& a, const auto& b) { return a.point_id < b.point_id; });
  std::sort(out.failures.begin(), out.failures.end());
  return out;
}

void write_scene_records(std::span<const SceneRecord> records, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& r : records) os << detail::dump_line(detail::scene_to_json(r));
  detail::write_text_file(path, os.str());
}

std::vector<SceneRecord> read_scene_records(const std::filesystem::path& path) {
  std::vector<SceneRecord> out;
  detail::for_each_json_line(path, [&](const detail::json& j, std::size_t line) {
    try {
      out.push_back(detail::scene_from_json(j));
    } catch (const DecodeError& e) {
      throw DecodeError(path.string() + ": " + e.what(), line);
    }
  });
  return out;
}

void write_selections(std::span<const SeasonalSelection> selections, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& s : selections) {
    detail::json j;
    j["point_id"] = s.point_id;
    j["excluded"] = s.excluded;
    j["reason"] = s.reason;
    detail::json scenes = detail::json::array();
    for (const auto& scene : s.scenes) scenes.push_back(scene ? detail::scene_to_json(*scene) : detail::json(nullptr));
    j["scenes"] = std::move(scenes);
    os << detail::dump_line(j);
  }
  detail::write_text_file(path, os.str());
}

std::vector<SeasonalSelection> read_selections(const std::filesystem::path& path) {
  std::vector<SeasonalSelection> out;
  detail::for_each_json_line(path, [&](const detail::json& j, std::size_t line) {
    SeasonalSelection s;
    s.point_id = j.at("point_id").get<std::int64_t>();
    s.excluded = j.at("excluded").get<bool>();
    s.reason = j.at("reason").get<std::string>();
    const auto& scenes = j.at("scenes");
    if (!scenes.is_array() || scenes.size() != kSeasonCount) {
      throw DecodeError(path.string() + ": 'scenes' must be an array of 4 entries", line);
    }
    for (std::size_t k = 0; k < kSeasonCount; ++k) {
      if (!scenes[k].is_null()) s.scenes[k] = detail::scene_from_json(scenes[k]);
    }
    out.push_back(std::move(s));
  });
  return out;
}

}  // namespace phenosample
