#include "ovmap/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "ovmap/errors.hpp"

namespace ovmap {

VoxelKey voxel_of(const Point3& p, double voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}

WorkingCloud voxel_downsample(std::span<const Point3> points, double voxel,
                              std::span<const Rgb> colors) {
  if (!(voxel > 0.0)) throw UsageError("voxel_downsample: voxel size must be positive");
  if (points.empty()) throw DataError("voxel_downsample: empty point set");
  if (!colors.empty() && colors.size() != points.size()) {
    throw DataError("voxel_downsample: color count does not match point count");
  }

  std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> cell_of;
  cell_of.reserve(points.size() / 2 + 16);
  std::vector<Point3> sums;
  std::vector<std::array<std::uint64_t, 3>> color_sums;
  std::vector<std::uint32_t> counts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [it, inserted] =
        cell_of.try_emplace(voxel_of(points[i], voxel), static_cast<std::uint32_t>(sums.size()));
    if (inserted) {
      sums.emplace_back(Point3::Zero());
      counts.push_back(0);
      if (!colors.empty()) color_sums.push_back({0, 0, 0});
    }
    const auto c = it->second;
    sums[c] += points[i];
    ++counts[c];
    if (!colors.empty()) {
      color_sums[c][0] += colors[i].r;
      color_sums[c][1] += colors[i].g;
      color_sums[c][2] += colors[i].b;
    }
  }

  WorkingCloud cloud;
  cloud.voxel_size = voxel;
  cloud.points.resize(sums.size());
  for (std::size_t c = 0; c < sums.size(); ++c) {
    cloud.points[c] = sums[c] / static_cast<double>(counts[c]);
  }
  if (!colors.empty()) {
    cloud.colors.resize(sums.size());
    for (std::size_t c = 0; c < sums.size(); ++c) {
      const auto n = counts[c];
      cloud.colors[c] = {static_cast<std::uint8_t>((color_sums[c][0] + n / 2) / n),
                         static_cast<std::uint8_t>((color_sums[c][1] + n / 2) / n),
                         static_cast<std::uint8_t>((color_sums[c][2] + n / 2) / n)};
    }
  }
  cloud.index = KdTree(cloud.points);
  return cloud;
}

std::vector<std::uint32_t> voxel_unique(std::span<const Point3> points, double voxel) {
  std::vector<std::uint32_t> keep;
  if (!(voxel > 0.0)) {
    keep.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) keep[i] = static_cast<std::uint32_t>(i);
    return keep;
  }
  std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> seen;
  seen.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (seen.try_emplace(voxel_of(points[i], voxel), 0U).second) {
      keep.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return keep;
}

std::vector<std::uint32_t> snap_to_cloud(std::span<const Point3> pts, const WorkingCloud& cloud,
                                         double r_max) {
  if (!(r_max > 0.0)) throw UsageError("snap_to_cloud: r_max must be positive");
  std::vector<std::uint32_t> hits(pts.size(), UINT32_MAX);
  const auto n = static_cast<std::int64_t>(pts.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (std::int64_t i = 0; i < n; ++i) {
    if (const auto nb = cloud.index.nearest(pts[static_cast<std::size_t>(i)], r_max)) {
      hits[static_cast<std::size_t>(i)] = nb->index;
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  if (!hits.empty() && hits.back() == UINT32_MAX) hits.pop_back();
  return hits;
}

NormalEstimate estimate_normals(const WorkingCloud& cloud, int k,
                                std::span<const Point3> viewpoints) {
  if (k < 3) throw UsageError("estimate_normals: k must be at least 3");
  if (cloud.size() < static_cast<std::size_t>(k)) {
    throw DataError("estimate_normals: cloud has fewer points than k");
  }
  NormalEstimate out;
  out.normals.resize(cloud.size());
  out.degenerate.assign(cloud.size(), 0);
  const auto n = static_cast<std::int64_t>(cloud.size());

#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto nbrs = cloud.index.knn(cloud.points[i], static_cast<std::size_t>(k));
    Point3 mean = Point3::Zero();
    for (const auto& nb : nbrs) mean += cloud.points[nb.index];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& nb : nbrs) {
      const Point3 d = cloud.points[nb.index] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
    if (!(lambda(2) > 0.0) || lambda(1) <= 1e-9 * lambda(2)) {
      out.normals[i] = Point3(0, 0, 1);
      out.degenerate[i] = 1;
      continue;
    }
    Point3 normal = eig.eigenvectors().col(0).normalized();
    if (!viewpoints.empty()) {
      std::size_t best = 0;
      double best_d2 = (viewpoints[0] - cloud.points[i]).squaredNorm();
      for (std::size_t v = 1; v < viewpoints.size(); ++v) {
        const double d2 = (viewpoints[v] - cloud.points[i]).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = v;
        }
      }
      if (normal.dot(viewpoints[best] - cloud.points[i]) < 0.0) normal = -normal;
    } else {
      Eigen::Index axis = 0;
      normal.cwiseAbs().maxCoeff(&axis);
      if (normal(axis) < 0.0) normal = -normal;
    }
    out.normals[i] = normal;
  }
  return out;
}

void attach_normals(WorkingCloud& cloud, int k, std::span<const Point3> viewpoints) {
  auto est = estimate_normals(cloud, k, viewpoints);
  cloud.normals = std::move(est.normals);
  cloud.degenerate = std::move(est.degenerate);
}

}  // namespace ovmap
