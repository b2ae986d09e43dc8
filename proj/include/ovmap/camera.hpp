#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Core>

namespace ovmap {

using Point3 = Eigen::Vector3d;

/// Pinhole intrinsics plus image resolution.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws DataError unless fx, fy > 0 and the principal point lies inside the image.
  void validate() const;
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool operator==(const CameraIntrinsics&) const = default;
};

/// Rigid camera-to-world transform.
class Pose {
 public:
  Pose();
  /// Validates orthonormality (|det R - 1| and |R R^T - I| below 1e-6) and the last row.
  explicit Pose(const Eigen::Matrix4d& camera_to_world);

  static Pose from_row_major(std::span<const double, 16> values);
  static Pose from_rotation_translation(const Eigen::Matrix3d& rotation, const Point3& translation);

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Point3 translation() const { return m_.topRightCorner<3, 1>(); }

  Point3 camera_to_world(const Point3& p) const { return rotation() * p + translation(); }
  Point3 world_to_camera(const Point3& p) const {
    return rotation().transpose() * (p - translation());
  }

  std::array<double, 16> row_major() const;

 private:
  Eigen::Matrix4d m_;
};

/// A rounded pixel and its quantized depth.
struct PixelDepth {
  int u = 0;
  int v = 0;
  std::uint16_t depth = 0;
  bool operator==(const PixelDepth&) const = default;
};

/// World point of pixel (u, v) with raw depth `depth` (metres = depth / scale).
/// Returns nullopt for depth 0, which marks a missing measurement.
std::optional<Point3> back_project(double u, double v, std::uint16_t depth,
                                   const CameraIntrinsics& K, const Pose& T, double scale);

/// Inverse of back_project. Pixel coordinates are rounded half away from zero and depth is
/// round(z * scale). Points behind the camera, outside the image, or whose depth does not fit
/// in 16 bits are out of view.
std::optional<PixelDepth> project(const Point3& p, const CameraIntrinsics& K, const Pose& T,
                                  double scale);

/// Unquantized projection: (u, v, z) with z the camera-space depth in metres, or nullopt when
/// z <= 0. No bounds check.
std::optional<Eigen::Vector3d> project_continuous(const Point3& p, const CameraIntrinsics& K,
                                                  const Pose& T);

/// Unquantized back projection of (u, v) at camera-space depth z metres.
Point3 back_project_continuous(double u, double v, double z, const CameraIntrinsics& K,
                               const Pose& T);

}  // namespace ovmap
