#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "phenosample/phenology.hpp"
#include "phenosample/rng.hpp"

namespace phenosample {

struct LocationAttributes {
  std::int64_t point_id = 0;
  std::array<std::optional<double>, kSeasonCount> mean_ndvi{};
  bool is_mountain = false;

  /// Throws ValidationError when a present NDVI lies outside [-1, 1].
  void validate() const;
};

struct WeightPolicy {
  double nonveg_divisor = 4.0;
  double nonveg_threshold = 0.1;
  double mountain_multiplier = 2.0;

  void validate() const;
};

struct LocationWeight {
  std::int64_t point_id = 0;
  double weight = 1.0;
  bool non_vegetated = false;
  bool mountain = false;
  /// No seasonal NDVI was available; the point is treated as vegetated.
  bool ndvi_missing = false;

  bool operator==(const LocationWeight&) const = default;
};

/// (b8 - b4) / (b8 + b4), 0 when both bands are 0. Throws Error on negative input.
double ndvi(double b8, double b4);

/// Starts at 1, divides by nonveg_divisor when every present seasonal NDVI is
/// below nonveg_threshold, multiplies by mountain_multiplier for mountains.
LocationWeight location_weight(const LocationAttributes& attrs, const WeightPolicy& policy = {});

/// `n` independent draws with replacement, P(i) proportional to weights[i].
std::vector<std::size_t> draw_locations(std::span<const double> weights, std::size_t n, Pcg64& rng);

/// `m` distinct entries of `available`, uniform over ordered m-subsets.
/// Throws Error when m > available.size(); never repeats a season.
std::vector<int> draw_seasons(std::span<const int> available, std::size_t m, Pcg64& rng);

/// JSON-lines {point_id, weight, factors: {non_vegetated, mountain, ndvi_missing}}.
void write_weights(std::span<const LocationWeight> weights, const std::filesystem::path& path);
std::vector<LocationWeight> read_weights(const std::filesystem::path& path);

}  // namespace phenosample
