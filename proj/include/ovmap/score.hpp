#pragma once

#include <cstddef>

namespace ovmap {

/// Weights of the view score: alpha on the mask's pixel share, beta on its point share.
struct ScoreWeights {
  double alpha = 1.0;
  double beta = 1.0;
  /// When false the weights apply to raw pixel and point counts.
  bool normalized = true;

  void validate() const;
};

/// alpha * pixel_count / frame_pixels + beta * point_count / cloud_points
/// (or alpha * pixel_count + beta * point_count when the weights are not normalized).
double mask_score(std::size_t pixel_count, std::size_t point_count, std::size_t frame_pixels,
                  std::size_t cloud_points, const ScoreWeights& w = {});

}  // namespace ovmap
