#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "phenosample/geogrid.hpp"

namespace phenosample::detail {

// KD-tree over unit vectors. Chord distance is monotone in great-circle
// distance, so it is used only for pruning; candidates are ranked by the exact
// haversine_km value and then by id, matching a brute-force scan bit for bit.
class SphereIndex {
 public:
  SphereIndex(std::span<const GeoPoint> points, double radius_km)
      : points_(points.begin(), points.end()), radius_km_(radius_km) {
    xyz_.reserve(points_.size());
    for (const auto& p : points_) xyz_.push_back(to_xyz(p));
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (!order_.empty()) root_ = build(0, order_.size());
  }

  bool empty() const { return points_.empty(); }

  // Nearest point by (haversine distance, id). Requires !empty().
  const GeoPoint& nearest(const GeoPoint& query) const {
    Best best;
    const auto q = to_xyz(query);
    search(root_, query, q, best);
    return points_[best.index];
  }

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::size_t begin = 0, end = 0;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  struct Best {
    double distance = std::numeric_limits<double>::infinity();
    std::int64_t id = std::numeric_limits<std::int64_t>::max();
    std::size_t index = 0;
    double chord2 = std::numeric_limits<double>::infinity();
  };

  static std::array<double, 3> to_xyz(const GeoPoint& p) {
    constexpr double k = std::numbers::pi / 180.0;
    const double lat = p.lat * k, lon = p.lon * k;
    return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
  }

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;
    std::array<double, 3> lo{1e9, 1e9, 1e9}, hi{-1e9, -1e9, -1e9};
    for (std::size_t i = begin; i < end; ++i) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], xyz_[order_[i]][a]);
        hi[a] = std::max(hi[a], xyz_[order_[i]][a]);
      }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
      if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t x, std::size_t y) { return xyz_[x][axis] < xyz_[y][axis]; });
    const double split = xyz_[order_[mid]][axis];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void consider(std::size_t index, const GeoPoint& query, Best& best) const {
    const auto& p = points_[index];
    const double d = haversine_km(query, p, radius_km_);
    if (d < best.distance || (d == best.distance && p.id < best.id)) {
      best.distance = d;
      best.id = p.id;
      best.index = index;
      const double c = 2.0 * std::sin(std::min(d / radius_km_, std::numbers::pi) / 2.0);
      // Slack absorbs rounding differences between the two distance routes.
      best.chord2 = c * c * (1.0 + 1e-9) + 1e-15;
    }
  }

  void search(std::size_t node_id, const GeoPoint& query, const std::array<double, 3>& q, Best& best) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) consider(order_[i], query, best);
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::size_t near = diff < 0 ? node.left : node.right;
    const std::size_t far = diff < 0 ? node.right : node.left;
    search(near, query, q, best);
    if (diff * diff <= best.chord2) search(far, query, q, best);
  }

  std::vector<GeoPoint> points_;
  double radius_km_;
  std::vector<std::array<double, 3>> xyz_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

}  // namespace phenosample::detail
