#pragma once

#include "ovmap/camera.hpp"
#include "ovmap/cloud.hpp"
#include "ovmap/image.hpp"

namespace ovmap {

/// Parameters for rendering a depth image from the working cloud by point splatting.
struct SyntheticDepthConfig {
  int splat_radius = 1;             ///< pixels; each point covers a (2r+1)^2 square
  double z_buffer_tolerance = 0.0;  ///< metres; 0 keeps the nearest contributor only
};

/// Splats every in-view cloud point (per `project`) into a z-buffer. A covered pixel takes the
/// smallest camera-space depth among its contributors, or with a positive tolerance the mean of
/// contributors within `z_buffer_tolerance` of that minimum. Uncovered pixels are 0.
DepthImage render_synthetic_depth(const WorkingCloud& cloud, const CameraIntrinsics& K,
                                  const Pose& T, double scale,
                                  const SyntheticDepthConfig& cfg = {});

struct SupplementOptions {
  /// Keep raw depth where the synthetic image is empty instead of zeroing it.
  bool prefer_raw_when_synth_missing = false;
};

/// Per pixel: synth if raw == 0 or synth == 0, raw otherwise.
/// Throws DataError when the images differ in size.
DepthImage supplement_depth(const DepthImage& raw, const DepthImage& synth,
                            const SupplementOptions& opts = {});

}  // namespace ovmap
