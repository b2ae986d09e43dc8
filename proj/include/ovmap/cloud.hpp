#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ovmap/camera.hpp"
#include "ovmap/image.hpp"
#include "ovmap/kdtree.hpp"

namespace ovmap {

/// Voxel-downsampled scene cloud. All 3D masks are index sets over it.
struct WorkingCloud {
  std::vector<Point3> points;
  std::vector<Rgb> colors;                 // empty or one per point
  std::vector<Point3> normals;             // empty until normals are estimated
  std::vector<std::uint8_t> degenerate;    // per point, set when the normal is a fallback
  double voxel_size = 0.0;
  KdTree index;

  std::size_t size() const { return points.size(); }
  bool has_normals() const { return normals.size() == points.size() && !points.empty(); }
};

/// Integer voxel cell of `p` for cubic cells of edge `voxel`.
struct VoxelKey {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    auto h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349669ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

VoxelKey voxel_of(const Point3& p, double voxel);

/// One centroid per occupied voxel cell, in order of each cell's first occurrence in the input.
/// Colors, when given, are averaged per cell. Builds the spatial index.
/// Throws UsageError for voxel <= 0 and DataError for empty input.
WorkingCloud voxel_downsample(std::span<const Point3> points, double voxel,
                              std::span<const Rgb> colors = {});

/// Indices of the occupied-cell representatives of `points`, one per cell, first occurrence
/// order. Used to thin dense back-projections before snapping.
std::vector<std::uint32_t> voxel_unique(std::span<const Point3> points, double voxel);

/// Maps every point to its nearest cloud point within r_max (others are dropped) and returns
/// the sorted, deduplicated index set.
std::vector<std::uint32_t> snap_to_cloud(std::span<const Point3> pts, const WorkingCloud& cloud,
                                         double r_max);

struct NormalEstimate {
  std::vector<Point3> normals;
  std::vector<std::uint8_t> degenerate;
};

/// PCA normals from the k nearest neighbours (the point itself included), oriented towards the
/// nearest viewpoint. Neighbourhoods of rank < 2 get (0, 0, 1) with the degenerate flag set.
/// Without viewpoints the sign is chosen so the largest-magnitude component is positive.
NormalEstimate estimate_normals(const WorkingCloud& cloud, int k,
                                std::span<const Point3> viewpoints);

/// Convenience: estimate and store normals into `cloud`.
void attach_normals(WorkingCloud& cloud, int k, std::span<const Point3> viewpoints);

}  // namespace ovmap
