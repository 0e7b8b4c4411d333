#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "phenosample/geogrid.hpp"
#include "phenosample/phenology.hpp"
#include "phenosample/rng.hpp"

namespace phenosample {

/// Random double-logistic parameters whose crossings are unambiguous:
/// rise in [80, 170], fall in [rise + 30, year_length - 80], rates in
/// [0.05, 0.3], amplitude in [0.2, 0.6].
DoubleLogistic random_double_logistic(Pcg64& rng, int year_length = 365);

struct FixtureOptions {
  std::size_t points = 500;
  std::uint64_t seed = 42;
  double center_lat = 46.0;
  double center_lon = 8.0;
  GridSpec grid;
  /// EVI composites every `evi_step_days`, for each listed year.
  std::vector<int> evi_years{2020, 2021};
  int evi_step_days = 8;
  /// Catalog years; 2016 lies outside the default selection range on purpose.
  std::vector<int> catalog_years{2016, 2019, 2020, 2021};
  int revisit_days = 12;
};

struct FixtureSummary {
  std::size_t points = 0;
  std::size_t evi_rows = 0;
  std::size_t catalog_records = 0;
  std::filesystem::path config;
};

/// Writes a self-contained synthetic study area into `dir`: land mask with
/// exactly `points` grid cells, daily-composite EVI CSV, scene catalog,
/// seasonal NDVI rasters, a mountain mask, an embedding table with
/// classification labels, and a config.json wiring them together.
/// Output is a pure function of the options.
FixtureSummary write_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace phenosample
