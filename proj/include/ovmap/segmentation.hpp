#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ovmap/cloud.hpp"

namespace ovmap {

struct GraphEdge {
  std::uint32_t a = 0;  ///< a < b
  std::uint32_t b = 0;
  double weight = 0.0;
  bool operator==(const GraphEdge&) const = default;
};

/// Undirected simple graph over working-cloud indices. Edges are sorted by (a, b); an edge's
/// position in this list is its index for tie-breaking.
struct SegmentGraph {
  std::size_t node_count = 0;
  std::vector<GraphEdge> edges;
};

/// 1 - max(0, n_i . n_j)
double normal_edge_weight(const Point3& ni, const Point3& nj);

/// Symmetric k-NN graph: (i, j) is an edge when j is among the k_graph nearest neighbours of i
/// or vice versa. Requires normals. Throws DataError when the cloud has <= k_graph points.
SegmentGraph build_graph(const WorkingCloud& cloud, int k_graph);

struct SurfaceSegment {
  std::uint32_t id = 0;
  std::vector<std::uint32_t> points;  // sorted
};

/// Graph-based segmentation with the internal-difference merge criterion followed by a
/// minimum-size pass. Segments are numbered 0.. in order of their smallest point index.
std::vector<SurfaceSegment> felzenszwalb_segment(const SegmentGraph& g, double k_fz,
                                                 std::size_t min_size);

/// Per-point segment id for a partition of [0, point_count).
std::vector<std::uint32_t> segment_labels(std::span<const SurfaceSegment> segments,
                                          std::size_t point_count);

/// Inverse of segment_labels.
std::vector<SurfaceSegment> segments_from_labels(std::span<const std::uint32_t> labels);

}  // namespace ovmap
