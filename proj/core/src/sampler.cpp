#include "phenosample/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json_io.hpp"
#include "phenosample/error.hpp"

namespace phenosample {

void LocationAttributes::validate() const {
  for (const auto& v : mean_ndvi) {
    if (v && !(*v >= -1.0 && *v <= 1.0)) {
      throw ValidationError("ndvi range", "point " + std::to_string(point_id) + " has NDVI " + std::to_string(*v));
    }
  }
}

void WeightPolicy::validate() const {
  if (!(nonveg_divisor > 0.0)) throw ConfigError("weights.nonveg_divisor must be positive");
  if (!(mountain_multiplier > 0.0)) throw ConfigError("weights.mountain_multiplier must be positive");
  if (!(nonveg_threshold > 0.0) || !std::isfinite(nonveg_threshold)) {
    throw ConfigError("weights.nonveg_threshold must be positive");
  }
}

double ndvi(double b8, double b4) {
  if (b8 < 0.0 || b4 < 0.0) throw Error("ndvi: reflectances must be non-negative");
  const double sum = b8 + b4;
  return sum == 0.0 ? 0.0 : (b8 - b4) / sum;
}

LocationWeight location_weight(const LocationAttributes& attrs, const WeightPolicy& policy) {
  attrs.validate();
  LocationWeight out;
  out.point_id = attrs.point_id;
  const bool any = std::any_of(attrs.mean_ndvi.begin(), attrs.mean_ndvi.end(), [](const auto& v) { return v.has_value(); });
  out.ndvi_missing = !any;
  out.non_vegetated = any && std::all_of(attrs.mean_ndvi.begin(), attrs.mean_ndvi.end(), [&](const auto& v) {
                        return !v || *v < policy.nonveg_threshold;
                      });
  out.mountain = attrs.is_mountain;
  if (out.non_vegetated) out.weight /= policy.nonveg_divisor;
  if (out.mountain) out.weight *= policy.mountain_multiplier;
  return out;
}

std::vector<std::size_t> draw_locations(std::span<const double> weights, std::size_t n, Pcg64& rng) {
  if (weights.empty()) throw Error("draw_locations: empty weight list");
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw Error("draw_locations: weight " + std::to_string(i) + " is not positive");
    }
    total += weights[i];
    cumulative[i] = total;
  }
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    out.push_back(std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), weights.size() - 1));
  }
  return out;
}

std::vector<int> draw_seasons(std::span<const int> available, std::size_t m, Pcg64& rng) {
  if (m > available.size()) {
    throw Error("draw_seasons: asked for " + std::to_string(m) + " distinct seasons but only " +
                std::to_string(available.size()) + " available");
  }
  std::vector<int> pool(available.begin(), available.end());
  std::sort(pool.begin(), pool.end());
  if (std::adjacent_find(pool.begin(), pool.end()) != pool.end()) {
    throw Error("draw_seasons: available seasons contain duplicates");
  }
  pool.assign(available.begin(), available.end());
  // Partial Fisher-Yates: the first m slots are a uniform ordered m-subset.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  return pool;
}

void write_weights(std::span<const LocationWeight> weights, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& w : weights) {
    detail::json j;
    j["point_id"] = w.point_id;
    j["weight"] = w.weight;
    j["factors"] = {{"non_vegetated", w.non_vegetated}, {"mountain", w.mountain}, {"ndvi_missing", w.ndvi_missing}};
    os << detail::dump_line(j);
  }
  detail::write_text_file(path, os.str());
}

std::vector<LocationWeight> read_weights(const std::filesystem::path& path) {
  std::vector<LocationWeight> out;
  detail::for_each_json_line(path, [&](const detail::json& j, std::size_t line) {
    LocationWeight w;
    w.point_id = j.at("point_id").get<std::int64_t>();
    w.weight = j.at("weight").get<double>();
    const auto& f = j.at("factors");
    w.non_vegetated = f.at("non_vegetated").get<bool>();
    w.mountain = f.at("mountain").get<bool>();
    w.ndvi_missing = f.at("ndvi_missing").get<bool>();
    if (!(w.weight > 0.0)) throw DecodeError(path.string() + ": weight must be positive", line);
    out.push_back(w);
  });
  return out;
}

}  // namespace phenosample
