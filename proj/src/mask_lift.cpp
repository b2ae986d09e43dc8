#include "ovmap/mask_lift.hpp"

#include <algorithm>
#include <map>

#include "ovmap/errors.hpp"

namespace ovmap {

void ScoreWeights::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0) || !(alpha + beta > 0.0)) {
    throw UsageError("score weights must be nonnegative with a positive sum");
  }
}

double mask_score(std::size_t pixel_count, std::size_t point_count, std::size_t frame_pixels,
                  std::size_t cloud_points, const ScoreWeights& w) {
  if (!w.normalized) {
    return w.alpha * static_cast<double>(pixel_count) + w.beta * static_cast<double>(point_count);
  }
  if (frame_pixels == 0 || cloud_points == 0) {
    throw UsageError("mask_score: denominators must be positive");
  }
  return w.alpha * (static_cast<double>(pixel_count) / static_cast<double>(frame_pixels)) +
         w.beta * (static_cast<double>(point_count) / static_cast<double>(cloud_points));
}

std::vector<InstanceMask3D> lift_masks(const PosedFrame& frame, const WorkingCloud& cloud,
                                       const LiftConfig& cfg, GroupIdCounter& ids) {
  const auto& K = frame.intrinsics;
  if (frame.depth.width() != K.width || frame.depth.height() != K.height ||
      !frame.masks.same_shape(frame.depth)) {
    throw DataError("lift_masks: frame " + std::to_string(frame.index) +
                    " has mismatched image sizes");
  }

  struct Accum {
    std::uint32_t pixels = 0;
    BoundingBox bbox{INT32_MAX, INT32_MAX, -1, -1};
    std::vector<Point3> world;
  };
  std::map<std::uint16_t, Accum> per_mask;
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      const std::uint16_t id = frame.masks(u, v);
      if (id == 0) continue;
      Accum& a = per_mask[id];
      ++a.pixels;
      a.bbox.x0 = std::min(a.bbox.x0, u);
      a.bbox.y0 = std::min(a.bbox.y0, v);
      a.bbox.x1 = std::max(a.bbox.x1, u + 1);
      a.bbox.y1 = std::max(a.bbox.y1, v + 1);
      if (const auto p = back_project(u, v, frame.depth(u, v), K, frame.pose, cfg.depth_scale)) {
        a.world.push_back(*p);
      }
    }
  }

  std::vector<InstanceMask3D> out;
  for (auto& [id, a] : per_mask) {
    if (a.world.empty()) continue;
    const auto keep = voxel_unique(a.world, cfg.dedup_voxel);
    std::vector<Point3> thinned;
    thinned.reserve(keep.size());
    for (auto i : keep) thinned.push_back(a.world[i]);
    auto points = snap_to_cloud(thinned, cloud, cfg.r_snap);
    if (points.size() < cfg.min_mask_points || points.empty()) continue;

    InstanceMask3D m;
    m.points = std::move(points);
    m.score = mask_score(a.pixels, m.points.size(), K.pixel_count(), cloud.size(), cfg.weights);
    m.best_view = BestView{frame.index, id, a.pixels, a.bbox};
    out.push_back(std::move(m));
  }
  for (auto& m : out) m.group_id = ids.allocate();
  return out;
}

std::vector<std::uint32_t> select_frames(std::size_t total, std::size_t stride) {
  if (stride == 0) throw UsageError("select_frames: stride must be at least 1");
  std::vector<std::uint32_t> out;
  for (std::size_t t = 0; t < total; t += stride) out.push_back(static_cast<std::uint32_t>(t));
  return out;
}

}  // namespace ovmap
