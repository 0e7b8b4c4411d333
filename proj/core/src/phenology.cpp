#include "phenosample/phenology.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "json_io.hpp"
#include "phenosample/error.hpp"
#include "sphere_index.hpp"

namespace phenosample {

std::string_view season_name(Season s) {
  switch (s) {
    case Season::spring: return "spring";
    case Season::summer: return "summer";
    case Season::autumn: return "autumn";
    case Season::winter: return "winter";
  }
  return "?";
}

int days_in_year(int year) {
  return std::chrono::year{year}.is_leap() ? 366 : 365;
}

void EviCurve::validate() const {
  const int expected = days_in_year(year);
  if (static_cast<int>(values.size()) != expected) {
    throw ValidationError("evi length", "year " + std::to_string(year) + " needs " +
                                            std::to_string(expected) + " values, got " +
                                            std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isnan(v) && !(v >= -1.0 && v <= 1.0)) {
      throw ValidationError("evi range", "day " + std::to_string(i + 1) + " has EVI " + std::to_string(v));
    }
  }
}

void PhenoConfig::validate() const {
  if (!(low_fraction > 0.0 && low_fraction < high_fraction && high_fraction < 1.0)) {
    throw ConfigError("phenology fractions must satisfy 0 < low_fraction < high_fraction < 1");
  }
}

PhenoDates detect_transitions(const EviCurve& curve, const PhenoConfig& cfg) {
  cfg.validate();
  curve.validate();
  const auto& v = curve.values;
  const std::size_t n = v.size();

  std::size_t valid = 0;
  std::size_t trough = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(v[i])) continue;
    ++valid;
    if (v[i] < lo) {
      lo = v[i];
      trough = i;
    }
    hi = std::max(hi, v[i]);
  }
  if (valid < 2 || !(hi > lo)) return {};

  const double amplitude = hi - lo;
  const double low = lo + cfg.low_fraction * amplitude;
  const double high = lo + cfg.high_fraction * amplitude;

  std::optional<std::size_t> first_low, first_high, last_low, last_high;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (trough + k) % n;
    const double x = v[i];
    if (std::isnan(x)) continue;
    if (x >= low) {
      if (!first_low) first_low = k;
      last_low = k;
    }
    if (x >= high) {
      if (!first_high) first_high = k;
      last_high = k;
    }
  }
  const auto day = [&](std::size_t k) { return static_cast<int>((trough + k) % n) + 1; };
  // The maximum always clears both thresholds, so every optional is engaged.
  return {day(*first_low), day(*first_high), day(*last_high), day(*last_low)};
}

PhenoDates median_phenology(std::span<const PhenoDates> per_year) {
  std::array<std::optional<int>, 4> out{};
  for (std::size_t var = 0; var < 4; ++var) {
    std::vector<int> present;
    for (const auto& p : per_year) {
      if (const auto x = p.as_array()[var]) present.push_back(*x);
    }
    if (present.empty()) continue;
    std::sort(present.begin(), present.end());
    const std::size_t m = present.size();
    if (m % 2 == 1) {
      out[var] = present[m / 2];
    } else {
      const int a = present[m / 2 - 1], b = present[m / 2];
      out[var] = (a + b) / 2;  // day-of-year values are positive, so this floors
    }
  }
  return PhenoDates::from_array(out);
}

PhenoTable fill_missing(std::span<const GeoPoint> points, const PhenoTable& known, double radius_km) {
  std::vector<GeoPoint> donors;
  for (const auto& p : points) {
    const auto it = known.find(p.id);
    if (it != known.end() && it->second.complete()) donors.push_back(p);
  }

  PhenoTable out;
  const detail::SphereIndex index(donors, radius_km);
  for (const auto& p : points) {
    const auto it = known.find(p.id);
    PhenoDates dates = it == known.end() ? PhenoDates{} : it->second;
    if (!dates.complete()) {
      if (index.empty()) {
        throw Error("fill_missing: point " + std::to_string(p.id) +
                    " lacks phenology and no point has complete dates");
      }
      const GeoPoint& donor = index.nearest(p);
      const auto src = known.at(donor.id).as_array();
      auto dst = dates.as_array();
      for (std::size_t k = 0; k < 4; ++k) {
        if (!dst[k]) dst[k] = src[k];
      }
      dates = PhenoDates::from_array(dst);
    }
    out[p.id] = dates;
  }
  return out;
}

namespace {

int mod_pos(int a, int m) { return ((a % m) + m) % m; }

int normalize_day(int day, int year_length) { return mod_pos(day - 1, year_length) + 1; }

DayWindow make_window(int start, int length, int year_length) {
  DayWindow w;
  w.start = normalize_day(start, year_length);
  w.length = length;
  w.year_length = year_length;
  w.target = normalize_day(w.start + length / 2, year_length);
  return w;
}

int day_of_year(std::chrono::year_month_day ymd) {
  using namespace std::chrono;
  const sys_days first{ymd.year() / January / 1};
  return static_cast<int>((sys_days{ymd} - first).count()) + 1;
}

}  // namespace

bool DayWindow::contains(int day_of_year) const {
  return mod_pos(day_of_year - start, year_length) < length;
}

int DayWindow::distance_to_target(int day_of_year) const {
  const int d = mod_pos(day_of_year - target, year_length);
  return std::min(d, year_length - d);
}

std::string_view window_mode_name(WindowMode m) {
  return m == WindowMode::calendar ? "calendar" : "phenological";
}

WindowMode parse_window_mode(std::string_view s) {
  if (s == "phenological") return WindowMode::phenological;
  if (s == "calendar") return WindowMode::calendar;
  throw ConfigError("unknown window mode '" + std::string(s) + "' (expected phenological or calendar)");
}

SeasonWindows calendar_windows(int year_length) {
  using namespace std::chrono;
  if (year_length != 365 && year_length != 366) throw ConfigError("year_length must be 365 or 366");
  const year y{year_length == 366 ? 2024 : 2023};
  const int mar = day_of_year(y / March / 1);
  const int jun = day_of_year(y / June / 1);
  const int sep = day_of_year(y / September / 1);
  const int dec = day_of_year(y / December / 1);

  SeasonWindows out;
  out.mode = WindowMode::calendar;
  out.year_length = year_length;
  const auto window = [&](int start, int end, month target_month) {
    DayWindow w;
    w.start = start;
    w.length = mod_pos(end - start, year_length);
    w.year_length = year_length;
    w.target = day_of_year(y / target_month / 15);
    return w;
  };
  out.windows[0] = window(mar, jun, April);
  out.windows[1] = window(jun, sep, July);
  out.windows[2] = window(sep, dec, October);
  out.windows[3] = window(dec, mar, January);
  return out;
}

SeasonWindows season_windows(const PhenoDates& pheno, WindowMode mode, int year_length) {
  if (year_length != 365 && year_length != 366) throw ConfigError("year_length must be 365 or 366");
  if (mode == WindowMode::calendar) return calendar_windows(year_length);
  if (!pheno.complete()) throw Error("season_windows: phenological mode needs complete transition dates");

  const auto raw = pheno.as_array();
  std::array<int, 4> day{};
  for (std::size_t i = 0; i < 4; ++i) day[i] = normalize_day(*raw[i], year_length);

  // Offsets from greenup must be strictly increasing inside one cycle.
  // Coincident transitions are pushed forward one day at a time.
  std::array<int, 4> offset{};
  bool repaired = false;
  for (std::size_t i = 1; i < 4; ++i) {
    offset[i] = mod_pos(day[i] - day[0], year_length);
    if (offset[i] == offset[i - 1]) {
      offset[i] += 1;
      repaired = true;
    }
  }
  const bool ordered = offset[1] > 0 && offset[1] < offset[2] && offset[2] < offset[3] && offset[3] < year_length;
  if (!ordered) {
    auto out = calendar_windows(year_length);
    out.fallback = true;
    return out;
  }

  SeasonWindows out;
  out.mode = WindowMode::phenological;
  out.year_length = year_length;
  out.repaired = repaired;
  for (std::size_t i = 0; i < 4; ++i) {
    const int next = i == 3 ? year_length : offset[i + 1];
    out.windows[i] = make_window(day[0] + offset[i], next - offset[i], year_length);
  }
  return out;
}

EviCurve synth_evi(const DoubleLogistic& p, int year) {
  const int n = days_in_year(year);
  const bool finite = std::isfinite(p.base) && std::isfinite(p.amplitude) && std::isfinite(p.rise_day) &&
                      std::isfinite(p.rise_rate) && std::isfinite(p.fall_day) && std::isfinite(p.fall_rate);
  if (!finite) throw ConfigError("double-logistic parameters must be finite");
  if (p.amplitude < 0.0) throw ConfigError("double-logistic amplitude must be non-negative");
  if (p.base - p.amplitude < -1.0 || p.base + p.amplitude > 1.0) {
    throw ConfigError("double-logistic curve would leave [-1, 1]");
  }
  if (!(p.rise_rate > 0.0 && p.fall_rate > 0.0)) throw ConfigError("double-logistic rates must be positive");
  if (!(p.rise_day >= 1.0 && p.rise_day < p.fall_day && p.fall_day <= n)) {
    throw ConfigError("double-logistic needs 1 <= rise_day < fall_day <= days in year");
  }
  const auto logistic = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  EviCurve c{year, std::vector<double>(static_cast<std::size_t>(n))};
  for (int t = 1; t <= n; ++t) {
    c.values[static_cast<std::size_t>(t - 1)] =
        p.base + p.amplitude * (logistic(p.rise_rate * (t - p.rise_day)) - logistic(p.fall_rate * (t - p.fall_day)));
  }
  return c;
}

namespace {

detail::json optional_day(const std::optional<int>& d) { return d ? detail::json(*d) : detail::json(nullptr); }

std::optional<int> read_optional_day(const detail::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const int d = j.at(key).get<int>();
  if (d < 1 || d > 366) throw DecodeError(std::string(key) + " out of range [1, 366]");
  return d;
}

}  // namespace

void write_pheno_table(const PhenoTable& table, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& [id, p] : table) {
    detail::json j;
    j["id"] = id;
    j["greenup"] = optional_day(p.greenup);
    j["maturity"] = optional_day(p.maturity);
    j["senescence"] = optional_day(p.senescence);
    j["dormancy"] = optional_day(p.dormancy);
    os << detail::dump_line(j);
  }
  detail::write_text_file(path, os.str());
}

PhenoTable read_pheno_table(const std::filesystem::path& path) {
  PhenoTable out;
  detail::for_each_json_line(path, [&](const detail::json& j, std::size_t line) {
    const auto id = j.at("id").get<std::int64_t>();
    PhenoDates p{read_optional_day(j, "greenup"), read_optional_day(j, "maturity"),
                 read_optional_day(j, "senescence"), read_optional_day(j, "dormancy")};
    if (!out.emplace(id, p).second) throw DecodeError("duplicate id " + std::to_string(id), line);
  });
  return out;
}

}  // namespace phenosample
