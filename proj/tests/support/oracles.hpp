#pragma once

// Straightforward reference implementations used to cross-check the library.
// They favour obviousness over speed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phenosample/catalog.hpp"
#include "phenosample/eval/data.hpp"
#include "phenosample/geogrid.hpp"
#include "phenosample/phenology.hpp"

namespace oracle {

namespace ps = phenosample;

/// Linear daily scan: first / last day whose value reaches each threshold.
ps::PhenoDates threshold_scan(const std::vector<double>& evi, double low_fraction, double high_fraction);

/// For every point lacking a value, the complete donor at minimum haversine
/// distance (lowest id on ties), found by checking every pair.
ps::PhenoTable nearest_donor_fill(const std::vector<ps::GeoPoint>& points, const ps::PhenoTable& known);

/// Is `doy` inside the cyclic window? Day 366 folds to day 1 on 365-day years.
bool in_window(int doy, const ps::DayWindow& w);
int cyclic_distance(int a, int b, int year_length);

/// Scans the whole catalog for the point and picks per season by
/// (cloud, distance to target, scene_id).
ps::SeasonalSelection select_by_enumeration(std::int64_t point_id, const ps::SeasonWindows& windows,
                                            const std::vector<ps::SceneRecord>& catalog,
                                            const ps::SelectionPolicy& policy);

/// All-pairs cosine k-NN with a full sort of every candidate.
ps::eval::Matrix knn_all_pairs(const ps::eval::Matrix& train, const ps::eval::Matrix& labels,
                               const ps::eval::Matrix& queries, std::size_t k, double temperature, bool renormalize);

/// Mean over positives of (positives ranked at or above it) / rank.
std::optional<double> average_precision_by_definition(const std::vector<double>& scores,
                                                       const std::vector<int>& labels);

/// Central finite difference of `f` at every coordinate of `x`.
template <typename F>
std::vector<double> central_difference(F&& f, std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace oracle
