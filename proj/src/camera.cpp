#include "ovmap/camera.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "ovmap/errors.hpp"

namespace ovmap {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw DataError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw DataError("intrinsics: image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw DataError("intrinsics: principal point outside the image");
  }
}

Pose::Pose() : m_(Eigen::Matrix4d::Identity()) {}

Pose::Pose(const Eigen::Matrix4d& camera_to_world) : m_(camera_to_world) {
  constexpr double kTol = 1e-6;
  const Eigen::Matrix3d r = rotation();
  if (!m_.allFinite()) throw DataError("pose: non-finite entries");
  if (std::abs(r.determinant() - 1.0) >= kTol) {
    std::ostringstream os;
    os << "pose: rotation determinant " << r.determinant() << " is not 1";
    throw DataError(os.str());
  }
  if (((r * r.transpose()) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >= kTol) {
    throw DataError("pose: rotation block is not orthonormal");
  }
  const Eigen::RowVector4d last = m_.row(3);
  if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() != 0.0) {
    throw DataError("pose: last row must be (0, 0, 0, 1)");
  }
}

Pose Pose::from_row_major(std::span<const double, 16> values) {
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = values[static_cast<std::size_t>(r * 4 + c)];
  }
  return Pose(m);
}

Pose Pose::from_rotation_translation(const Eigen::Matrix3d& rotation, const Point3& translation) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return Pose(m);
}

std::array<double, 16> Pose::row_major() const {
  std::array<double, 16> out{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out[static_cast<std::size_t>(r * 4 + c)] = m_(r, c);
  }
  return out;
}

Point3 back_project_continuous(double u, double v, double z, const CameraIntrinsics& K,
                               const Pose& T) {
  const Point3 cam((u - K.cx) * z / K.fx, (v - K.cy) * z / K.fy, z);
  return T.camera_to_world(cam);
}

std::optional<Point3> back_project(double u, double v, std::uint16_t depth,
                                   const CameraIntrinsics& K, const Pose& T, double scale) {
  if (depth == 0) return std::nullopt;
  return back_project_continuous(u, v, static_cast<double>(depth) / scale, K, T);
}

std::optional<Eigen::Vector3d> project_continuous(const Point3& p, const CameraIntrinsics& K,
                                                  const Pose& T) {
  const Point3 cam = T.world_to_camera(p);
  if (!(cam.z() > 0.0)) return std::nullopt;
  return Eigen::Vector3d(K.fx * cam.x() / cam.z() + K.cx, K.fy * cam.y() / cam.z() + K.cy,
                         cam.z());
}

std::optional<PixelDepth> project(const Point3& p, const CameraIntrinsics& K, const Pose& T,
                                  double scale) {
  const auto uvz = project_continuous(p, K, T);
  if (!uvz) return std::nullopt;
  // std::round rounds half away from zero.
  const double u = std::round((*uvz)(0));
  const double v = std::round((*uvz)(1));
  const double d = std::round((*uvz)(2) * scale);
  if (!(u >= 0.0 && u < K.width && v >= 0.0 && v < K.height)) return std::nullopt;
  if (!(d >= 1.0 && d <= std::numeric_limits<std::uint16_t>::max())) return std::nullopt;
  return PixelDepth{static_cast<int>(u), static_cast<int>(v), static_cast<std::uint16_t>(d)};
}

}  // namespace ovmap
