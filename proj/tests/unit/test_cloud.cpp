#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

#include "ovmap/cloud.hpp"
#include "ovmap/errors.hpp"
#include "test_util.hpp"

using namespace ovmap;

TEST_CASE("three points in one cell collapse to their centroid") {
  const std::vector<Point3> pts{{0.001, 0.002, 0.003}, {0.011, 0.004, 0.001}, {0.006, 0.015, 0.008}};
  const auto c = voxel_downsample(pts, 0.02);
  REQUIRE(c.size() == 1);
  CHECK((c.points[0] - Point3(0.006, 0.007, 0.004)).norm() < 1e-12);
}

TEST_CASE("a 10 cm lattice keeps every point at 2 cm") {
  std::vector<Point3> pts;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 5; ++k) pts.emplace_back(0.1 * i + 0.005, 0.1 * j + 0.005, 0.1 * k + 0.005);
  CHECK(voxel_downsample(pts, 0.02).size() == pts.size());
}

TEST_CASE("voxel count equals a distinct-cell census") {
  std::mt19937_64 rng(1);
  std::vector<Point3> pts;
  for (int i = 0; i < 100000; ++i) {
    pts.emplace_back(test::uniform(rng, 0, 1), test::uniform(rng, 0, 1), test::uniform(rng, 0, 1));
  }
  std::set<std::tuple<long, long, long>> cells;
  for (const auto& p : pts) {
    cells.emplace(static_cast<long>(std::floor(p.x() / 0.02)), static_cast<long>(std::floor(p.y() / 0.02)),
                  static_cast<long>(std::floor(p.z() / 0.02)));
  }
  const auto c = voxel_downsample(pts, 0.02);
  CHECK(c.size() == cells.size());
  CHECK(c.index.size() == c.size());
}

TEST_CASE("voxel downsampling is idempotent and averages colors") {
  std::mt19937_64 rng(2);
  std::vector<Point3> pts;
  std::vector<Rgb> colors;
  for (int i = 0; i < 5000; ++i) {
    pts.emplace_back(test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), test::uniform(rng, -0.2, 0.2));
    colors.push_back({static_cast<std::uint8_t>(i % 256), 10, 200});
  }
  const auto once = voxel_downsample(pts, 0.05, colors);
  REQUIRE(once.colors.size() == once.size());
  const auto twice = voxel_downsample(once.points, 0.05, once.colors);
  CHECK(twice.points == once.points);
  CHECK(twice.colors == once.colors);
}

TEST_CASE("voxel downsampling rejects bad input") {
  const std::vector<Point3> none;
  CHECK_THROWS_AS(voxel_downsample(none, 0.02), DataError);
  const std::vector<Point3> one{{0, 0, 0}};
  CHECK_THROWS_AS(voxel_downsample(one, 0.0), UsageError);
}

TEST_CASE("snapping examples") {
  const std::vector<Point3> cloud_pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto cloud = voxel_downsample(cloud_pts, 0.01);
  const std::vector<Point3> on{{1, 0, 0}};
  CHECK(snap_to_cloud(on, cloud, 0.04) == std::vector<std::uint32_t>{1});
  const std::vector<Point3> far{{5, 5, 5}};
  CHECK(snap_to_cloud(far, cloud, 0.04).empty());
  CHECK_THROWS_AS(snap_to_cloud(on, cloud, 0.0), UsageError);
}

TEST_CASE("snapping equals a linear-scan nearest neighbour") {
  std::mt19937_64 rng(3);
  std::vector<Point3> raw;
  for (int i = 0; i < 10000; ++i) {
    raw.emplace_back(test::uniform(rng, 0, 1), test::uniform(rng, 0, 1), test::uniform(rng, 0, 1));
  }
  const auto cloud = voxel_downsample(raw, 0.001);
  std::vector<Point3> queries;
  for (int i = 0; i < 1000; ++i) {
    queries.emplace_back(test::uniform(rng, -0.05, 1.05), test::uniform(rng, -0.05, 1.05),
                         test::uniform(rng, -0.05, 1.05));
  }
  const double r = 0.04;
  std::set<std::uint32_t> expect;
  for (const auto& q : queries) {
    double best = r * r;
    std::int64_t arg = -1;
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
      const double d = (cloud.points[i] - q).squaredNorm();
      if (d < best || (d == best && arg < 0)) {
        best = d;
        arg = i;
      }
    }
    if (arg >= 0) expect.insert(static_cast<std::uint32_t>(arg));
  }
  const auto got = snap_to_cloud(queries, cloud, r);
  CHECK(got == std::vector<std::uint32_t>(expect.begin(), expect.end()));
}

TEST_CASE("normals of a plane face the viewpoint above it") {
  std::vector<Point3> pts;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) pts.emplace_back(0.02 * i + 0.01, 0.02 * j + 0.01, 0.0);
  auto cloud = voxel_downsample(pts, 0.02);
  const std::vector<Point3> views{{0.2, 0.2, 2.0}};
  const auto est = estimate_normals(cloud, 30, views);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(est.degenerate[i] == 0);
    CHECK(est.normals[i].z() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sphere normals are radial") {
  std::mt19937_64 rng(4);
  std::vector<Point3> pts;
  std::normal_distribution<double> g;
  for (int i = 0; i < 20000; ++i) {
    Point3 p(g(rng), g(rng), g(rng));
    pts.push_back(0.5 * p.normalized());
  }
  auto cloud = voxel_downsample(pts, 0.02);
  std::vector<Point3> views;
  for (int k = 0; k < 12; ++k) {
    const double a = 2 * std::numbers::pi * k / 12;
    views.emplace_back(3 * std::cos(a), 3 * std::sin(a), 0.0);
  }
  views.emplace_back(0, 0, 3);
  views.emplace_back(0, 0, -3);
  const auto est = estimate_normals(cloud, 30, views);
  std::size_t good = 0;
  const double cos10 = std::cos(10.0 * std::numbers::pi / 180.0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(std::abs(est.normals[i].norm() - 1.0) < 1e-4);
    if (est.normals[i].dot(cloud.points[i].normalized()) > cos10) ++good;
  }
  CHECK(static_cast<double>(good) >= 0.95 * cloud.size());
}

TEST_CASE("collinear neighbourhoods are flagged") {
  std::vector<Point3> pts;
  for (int i = 0; i < 40; ++i) pts.emplace_back(0.03 * i, 0, 0);
  auto cloud = voxel_downsample(pts, 0.02);
  const auto est = estimate_normals(cloud, 10, {});
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(est.degenerate[i] == 1);
    CHECK(est.normals[i] == Point3(0, 0, 1));
  }
  CHECK_THROWS_AS(estimate_normals(cloud, 2, {}), UsageError);
  CHECK_THROWS_AS(estimate_normals(cloud, 100, {}), DataError);
}
