#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "ovmap/camera.hpp"
#include "ovmap/cloud.hpp"
#include "ovmap/image.hpp"
#include "ovmap/score.hpp"

namespace ovmap {

using GroupId = std::uint32_t;

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  bool operator==(const BoundingBox&) const = default;
};

/// The 2D observation an instance is best seen in.
struct BestView {
  std::uint32_t frame = 0;
  std::uint16_t mask_id = 0;
  std::uint32_t pixel_count = 0;
  BoundingBox bbox;
  bool operator==(const BestView&) const = default;
};

/// A 3D mask: a sorted, duplicate-free set of working-cloud indices.
struct InstanceMask3D {
  GroupId group_id = 0;
  std::vector<std::uint32_t> points;
  double score = 0.0;
  BestView best_view;
};

/// One time step of input.
struct PosedFrame {
  std::uint32_t index = 0;
  DepthImage depth;
  CameraIntrinsics intrinsics;
  Pose pose;
  MaskLabelImage masks;
  std::string color_path;
};

struct LiftConfig {
  double r_snap = 0.04;
  std::size_t min_mask_points = 25;
  /// Back-projected points are thinned to one per cell of this size before snapping (0 = off).
  double dedup_voxel = 0.005;
  double depth_scale = kDefaultDepthScale;
  ScoreWeights weights;
};

/// Hands out globally unique group ids; safe to share between threads.
class GroupIdCounter {
 public:
  explicit GroupIdCounter(GroupId first = 1) : next_(first) {}
  GroupId allocate() { return next_.fetch_add(1, std::memory_order_relaxed); }
  GroupId peek() const { return next_.load(std::memory_order_relaxed); }

 private:
  std::atomic<GroupId> next_;
};

/// Lifts every 2D mask of `frame` onto the cloud. Pixels with depth 0 are skipped; masks whose
/// snapped index set has fewer than min_mask_points points are dropped. Output is ordered by
/// mask id and ids are drawn from `ids` in that order.
std::vector<InstanceMask3D> lift_masks(const PosedFrame& frame, const WorkingCloud& cloud,
                                       const LiftConfig& cfg, GroupIdCounter& ids);

/// 0, stride, 2*stride, ... below total.
std::vector<std::uint32_t> select_frames(std::size_t total, std::size_t stride);

}  // namespace ovmap
