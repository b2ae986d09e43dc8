#include <doctest.h>

#include <limits>
#include <random>

#include "ovmap/depth.hpp"
#include "ovmap/errors.hpp"
#include "test_util.hpp"

using namespace ovmap;

namespace {

WorkingCloud cloud_of(std::vector<Point3> pts) {
  WorkingCloud c;
  c.points = std::move(pts);
  return c;
}

DepthImage image(int w, int h, std::initializer_list<std::uint16_t> values) {
  DepthImage d(w, h);
  std::copy(values.begin(), values.end(), d.pixels().begin());
  return d;
}

}  // namespace

TEST_CASE("a single axis point renders one pixel") {
  const CameraIntrinsics K{100, 100, 32, 24, 64, 48};
  const auto d = render_synthetic_depth(cloud_of({{0, 0, 2}}), K, Pose(), 1000.0, {0, 0.0});
  std::size_t nonzero = 0;
  for (const auto v : d.pixels()) nonzero += v != 0;
  CHECK(nonzero == 1);
  CHECK(d(32, 24) == 2000);
}

TEST_CASE("nearest point wins the z-buffer") {
  const CameraIntrinsics K{100, 100, 32, 24, 64, 48};
  const auto d =
      render_synthetic_depth(cloud_of({{0, 0, 2}, {0, 0, 1}}), K, Pose(), 1000.0, {0, 0.0});
  CHECK(d(32, 24) == 1000);
}

TEST_CASE("a positive tolerance averages near contributors") {
  const CameraIntrinsics K{100, 100, 32, 24, 64, 48};
  const auto d = render_synthetic_depth(cloud_of({{0, 0, 1.0}, {0, 0, 1.004}, {0, 0, 3}}), K,
                                        Pose(), 1000.0, {0, 0.01});
  CHECK(d(32, 24) == 1002);
}

TEST_CASE("splatting equals a per-pixel brute-force rasterizer") {
  // Box scene: a floor patch and two box faces at different depths.
  std::mt19937_64 rng(21);
  std::vector<Point3> pts;
  for (int i = 0; i < 3000; ++i) {
    pts.emplace_back(test::uniform(rng, -1, 1), test::uniform(rng, -0.6, 0.6), 3.0);
  }
  for (int i = 0; i < 800; ++i) {
    pts.emplace_back(test::uniform(rng, -0.3, 0.1), test::uniform(rng, -0.2, 0.3), 2.0);
  }
  for (int i = 0; i < 800; ++i) {
    const double x = test::uniform(rng, 0.2, 0.6);
    pts.emplace_back(x, test::uniform(rng, -0.3, 0.1), 1.5 + 0.5 * x);
  }
  const CameraIntrinsics K{40, 40, 31.5, 23.5, 64, 48};
  const Pose T = Pose::from_rotation_translation(
      Eigen::AngleAxisd(0.05, Eigen::Vector3d::UnitY()).toRotationMatrix(), Point3(0.05, 0, -0.1));
  for (const int r : {0, 1, 2}) {
    const auto got = render_synthetic_depth(cloud_of(pts), K, T, 1000.0, {r, 0.0});
    DepthImage expect(64, 48);
    for (int v = 0; v < 48; ++v) {
      for (int u = 0; u < 64; ++u) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : pts) {
          const Point3 c = T.world_to_camera(p);
          if (c.z() <= 0) continue;
          const double pu = std::round(K.fx * c.x() / c.z() + K.cx);
          const double pv = std::round(K.fy * c.y() / c.z() + K.cy);
          if (pu < 0 || pu >= 64 || pv < 0 || pv >= 48) continue;
          if (std::abs(pu - u) <= r && std::abs(pv - v) <= r) best = std::min(best, c.z());
        }
        if (best < std::numeric_limits<double>::infinity()) {
          expect(u, v) = static_cast<std::uint16_t>(std::round(best * 1000.0));
        }
      }
    }
    CHECK(got == expect);
  }
}

TEST_CASE("supplement truth table") {
  const auto raw = image(4, 1, {0, 800, 800, 0});
  const auto syn = image(4, 1, {1200, 1000, 0, 0});
  CHECK(supplement_depth(raw, syn) == image(4, 1, {1200, 800, 0, 0}));
  CHECK(supplement_depth(raw, syn, {true}) == image(4, 1, {1200, 800, 800, 0}));
}

TEST_CASE("supplement properties") {
  std::mt19937_64 rng(8);
  DepthImage raw(32, 32), syn(32, 32), full(32, 32);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw.pixels()[i] = rng() % 3 == 0 ? 0 : static_cast<std::uint16_t>(1 + rng() % 5000);
    syn.pixels()[i] = rng() % 4 == 0 ? 0 : static_cast<std::uint16_t>(1 + rng() % 5000);
    full.pixels()[i] = static_cast<std::uint16_t>(1 + rng() % 5000);
  }
  CHECK(supplement_depth(full, full) == full);
  const auto out = supplement_depth(raw, syn);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto o = out.pixels()[i];
    if (o != 0) CHECK((raw.pixels()[i] != 0 || syn.pixels()[i] != 0));
    if (raw.pixels()[i] == 0) CHECK(o == syn.pixels()[i]);
  }
  CHECK_THROWS_AS(supplement_depth(DepthImage(2, 2), DepthImage(2, 3)), DataError);
}
