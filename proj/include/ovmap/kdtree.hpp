#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ovmap/camera.hpp"

namespace ovmap {

/// Static 3D k-d tree over a point set. Queries are read-only and thread safe.
///
/// All queries order neighbours by (squared distance, index), so results are fully
/// deterministic even when several points are equidistant from the query.
class KdTree {
 public:
  struct Neighbor {
    std::uint32_t index = 0;
    double dist2 = 0.0;
    bool operator==(const Neighbor&) const = default;
  };

  KdTree() = default;
  explicit KdTree(std::vector<Point3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Point3>& points() const { return points_; }

  /// Nearest point with distance <= max_dist, if any.
  std::optional<Neighbor> nearest(const Point3& q,
                                  double max_dist = std::numeric_limits<double>::infinity()) const;

  /// The min(k, size()) nearest points, sorted.
  std::vector<Neighbor> knn(const Point3& q, std::size_t k) const;

  /// All points with distance <= radius, sorted. `out` is cleared first.
  void radius_search(const Point3& q, double radius, std::vector<Neighbor>& out) const;
  std::vector<Neighbor> radius_search(const Point3& q, double radius) const;

 private:
  struct Node {
    double lo[3];
    double hi[3];
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  static double box_dist2(const Node& n, const Point3& q);

  std::vector<Point3> points_;           // original order
  std::vector<Point3> sorted_;           // leaf order
  std::vector<std::uint32_t> order_;     // leaf order -> original index
  std::vector<Node> nodes_;
};

}  // namespace ovmap
