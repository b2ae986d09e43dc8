#pragma once

// Shared helpers for unit tests: seeded random generators and scratch directories.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "ovmap/camera.hpp"

namespace ovmap::test {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ovmap_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Pose random_pose(std::mt19937_64& rng, double max_translation = 2.0) {
  Eigen::Vector4d q(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1),
                    uniform(rng, -1, 1));
  if (q.norm() < 1e-3) q = {1, 0, 0, 0};
  q.normalize();
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  const Point3 t(uniform(rng, -max_translation, max_translation),
                 uniform(rng, -max_translation, max_translation),
                 uniform(rng, -max_translation, max_translation));
  return Pose::from_rotation_translation(quat.toRotationMatrix(), t);
}

inline CameraIntrinsics random_intrinsics(std::mt19937_64& rng) {
  CameraIntrinsics K;
  K.width = static_cast<int>(uniform(rng, 64, 1280));
  K.height = static_cast<int>(uniform(rng, 48, 960));
  K.fx = uniform(rng, 100, 1500);
  K.fy = uniform(rng, 100, 1500);
  K.cx = uniform(rng, 0, K.width - 1);
  K.cy = uniform(rng, 0, K.height - 1);
  return K;
}

}  // namespace ovmap::test
