#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ovmap/cloud.hpp"
#include "ovmap/instance.hpp"

namespace ovmap {

struct PostprocessConfig {
  double dbscan_eps = 0.05;
  std::size_t dbscan_min_pts = 10;
  std::size_t min_instance_points = 50;
  double knn_fill_radius = 0.04;

  void validate() const;
};

/// Density clustering. A point is core when at least min_pts points (itself included) lie within
/// eps. Clusters are grown breadth-first from unvisited core points in index order, so a border
/// point reachable from several clusters joins the one started first. Labels are 0.. in that
/// start order; noise is -1.
std::vector<std::int32_t> dbscan(std::span<const Point3> points, double eps, std::size_t min_pts);

/// Runs dbscan on every instance. The largest cluster (ties: smallest member index) keeps the
/// id; other clusters with at least min_instance_points points become new instances with fresh
/// ids above the current maximum, copying score and best view. Smaller clusters and noise
/// become unassigned.
InstanceMap split_and_filter(const InstanceMap& map, const WorkingCloud& cloud,
                             const PostprocessConfig& cfg);

/// Each unassigned point takes the id of its nearest assigned point (ties: smaller index) within
/// `radius`, judged against the labels as they were before the pass.
InstanceMap knn_fill(const InstanceMap& map, const WorkingCloud& cloud, double radius);

}  // namespace ovmap
