#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "phenosample/geogrid.hpp"

namespace phenosample {

inline constexpr int kSeasonCount = 4;

/// Seasons in window order: spring starts at greenup.
enum class Season { spring = 0, summer = 1, autumn = 2, winter = 3 };

std::string_view season_name(Season s);

int days_in_year(int year);

/// Daily EVI for one calendar year; NaN marks a no-data day.
struct EviCurve {
  int year = 2020;
  std::vector<double> values;

  /// Length must match the year's day count; valid values lie in [-1, 1].
  void validate() const;
};

/// Transition days (day-of-year, 1-based). Any of them may be absent.
struct PhenoDates {
  std::optional<int> greenup;
  std::optional<int> maturity;
  std::optional<int> senescence;
  std::optional<int> dormancy;

  bool complete() const { return greenup && maturity && senescence && dormancy; }
  bool empty() const { return !greenup && !maturity && !senescence && !dormancy; }

  std::array<std::optional<int>, 4> as_array() const { return {greenup, maturity, senescence, dormancy}; }
  static PhenoDates from_array(const std::array<std::optional<int>, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

  bool operator==(const PhenoDates&) const = default;
};

struct PhenoConfig {
  double low_fraction = 0.15;
  double high_fraction = 0.90;

  /// Throws ConfigError unless 0 < low_fraction < high_fraction < 1.
  void validate() const;

  bool operator==(const PhenoConfig&) const = default;
};

/// Greenup / maturity are the first days with EVI >= min + f*amplitude
/// (f = low / high fraction); senescence / dormancy are the last such days.
/// Comparisons are closed. The scan runs over one annual segment that starts
/// at the first minimum-EVI day, so a growing season that straddles 1 January
/// is detected as one season and cyclic shifts of the curve shift every
/// transition by the same amount. When the trough precedes the season the
/// result is the plain calendar-order first/last crossing.
///
/// Fewer than two valid days or zero amplitude yields all-absent dates.
PhenoDates detect_transitions(const EviCurve& curve, const PhenoConfig& cfg = {});

/// Independent per-variable median over years. Even counts take
/// floor((a + b) / 2) of the two central values.
PhenoDates median_phenology(std::span<const PhenoDates> per_year);

using PhenoTable = std::map<std::int64_t, PhenoDates>;

/// Fills absent transition values from the nearest (haversine) point whose
/// dates are complete; equal distances go to the lowest donor id. Present
/// values are kept. Returns an entry for every point in `points`.
/// Throws Error if no complete donor exists while something is missing.
PhenoTable fill_missing(std::span<const GeoPoint> points, const PhenoTable& known,
                        double radius_km = kEarthRadiusKm);

/// Cyclic day interval [start, start + length) on a year of `year_length` days.
struct DayWindow {
  int start = 1;
  int length = 1;
  int target = 1;
  int year_length = 365;

  /// Exclusive end as a day-of-year in [1, year_length].
  int end() const { return (start - 1 + length) % year_length + 1; }
  /// Day 366 in a 365-day cycle wraps to day 1.
  bool contains(int day_of_year) const;
  /// Cyclic distance in days between `day_of_year` and `target`.
  int distance_to_target(int day_of_year) const;

  bool operator==(const DayWindow&) const = default;
};

enum class WindowMode { phenological, calendar };

std::string_view window_mode_name(WindowMode m);
WindowMode parse_window_mode(std::string_view s);

struct SeasonWindows {
  std::array<DayWindow, kSeasonCount> windows{};
  WindowMode mode = WindowMode::phenological;
  int year_length = 365;
  /// Coincident transitions were nudged apart to give every window a day.
  bool repaired = false;
  /// Phenological windows were requested but the dates were not cyclically
  /// ordered, so calendar windows were used instead.
  bool fallback = false;

  const DayWindow& operator[](Season s) const { return windows[static_cast<std::size_t>(s)]; }
  bool operator==(const SeasonWindows&) const = default;
};

/// Meteorological seasons: Mar-May, Jun-Aug, Sep-Nov, Dec-Feb with targets on
/// the 15th of Apr, Jul, Oct and Jan.
SeasonWindows calendar_windows(int year_length = 365);

/// Phenological mode: spring [greenup, maturity), summer [maturity,
/// senescence), autumn [senescence, dormancy), winter [dormancy, next greenup),
/// targets at the floored cyclic midpoint. Throws Error on incomplete dates.
SeasonWindows season_windows(const PhenoDates& pheno, WindowMode mode = WindowMode::phenological,
                             int year_length = 365);

/// Double-logistic EVI model: base + amplitude * (s(rise_rate*(t - rise_day))
/// - s(fall_rate*(t - fall_day))) with s the logistic function, t = 1..days.
struct DoubleLogistic {
  double base = 0.1;
  double amplitude = 0.5;
  double rise_day = 120.0;
  double rise_rate = 0.1;
  double fall_day = 270.0;
  double fall_rate = 0.1;
};

/// Throws ConfigError when the curve could leave [-1, 1] or the parameters are
/// not a rise followed by a fall inside the year.
EviCurve synth_evi(const DoubleLogistic& params, int year);

/// Per-point transition tables for the CLI: JSON-lines {id, greenup, ...}.
void write_pheno_table(const PhenoTable& table, const std::filesystem::path& path);
PhenoTable read_pheno_table(const std::filesystem::path& path);

}  // namespace phenosample
