#include "ovmap/depth.hpp"

#include <cmath>
#include <limits>

#include "ovmap/errors.hpp"

namespace ovmap {

namespace {

std::uint16_t quantize(double z, double scale) {
  const double d = std::round(z * scale);
  if (!(d >= 1.0)) return 0;
  if (d > std::numeric_limits<std::uint16_t>::max()) return 0;
  return static_cast<std::uint16_t>(d);
}

}  // namespace

DepthImage render_synthetic_depth(const WorkingCloud& cloud, const CameraIntrinsics& K,
                                  const Pose& T, double scale, const SyntheticDepthConfig& cfg) {
  if (cfg.splat_radius < 0) throw UsageError("render_synthetic_depth: negative splat radius");
  if (cloud.points.empty()) throw DataError("render_synthetic_depth: empty cloud");

  struct Splat {
    int u, v;
    double z;
  };
  std::vector<Splat> splats;
  splats.reserve(cloud.size() / 2);
  for (const auto& p : cloud.points) {
    const auto px = project(p, K, T, scale);
    if (!px) continue;
    splats.push_back({px->u, px->v, T.world_to_camera(p).z()});
  }

  const double inf = std::numeric_limits<double>::infinity();
  Grid<double> zmin(K.width, K.height, inf);
  const int r = cfg.splat_radius;
  for (const auto& s : splats) {
    for (int v = s.v - r; v <= s.v + r; ++v) {
      for (int u = s.u - r; u <= s.u + r; ++u) {
        if (zmin.contains(u, v) && s.z < zmin(u, v)) zmin(u, v) = s.z;
      }
    }
  }

  DepthImage out(K.width, K.height, 0);
  if (cfg.z_buffer_tolerance > 0.0) {
    Grid<double> sum(K.width, K.height, 0.0);
    Grid<std::uint32_t> count(K.width, K.height, 0);
    for (const auto& s : splats) {
      for (int v = s.v - r; v <= s.v + r; ++v) {
        for (int u = s.u - r; u <= s.u + r; ++u) {
          if (zmin.contains(u, v) && s.z <= zmin(u, v) + cfg.z_buffer_tolerance) {
            sum(u, v) += s.z;
            ++count(u, v);
          }
        }
      }
    }
    for (int v = 0; v < K.height; ++v) {
      for (int u = 0; u < K.width; ++u) {
        if (count(u, v) > 0) out(u, v) = quantize(sum(u, v) / count(u, v), scale);
      }
    }
  } else {
    for (int v = 0; v < K.height; ++v) {
      for (int u = 0; u < K.width; ++u) {
        if (zmin(u, v) < inf) out(u, v) = quantize(zmin(u, v), scale);
      }
    }
  }
  return out;
}

DepthImage supplement_depth(const DepthImage& raw, const DepthImage& synth,
                            const SupplementOptions& opts) {
  if (!raw.same_shape(synth)) {
    throw DataError("supplement_depth: raw and synthetic depth differ in size");
  }
  DepthImage out(raw.width(), raw.height(), 0);
  const auto r = raw.pixels();
  const auto s = synth.pixels();
  auto o = out.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (r[i] == 0 || s[i] == 0) {
      o[i] = (s[i] == 0 && opts.prefer_raw_when_synth_missing) ? r[i] : s[i];
    } else {
      o[i] = r[i];
    }
  }
  return out;
}

}  // namespace ovmap
