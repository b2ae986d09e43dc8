#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ovmap/instance.hpp"
#include "ovmap/kdtree.hpp"

namespace ovmap {

/// Per-point ground-truth instance ids over the working cloud (0 = unannotated).
struct GroundTruthMap {
  std::vector<std::uint32_t> labels;
};

/// |a ∩ b| / |a ∪ b| for sorted index sets. Throws UsageError when both are empty.
double instance_iou(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

struct ThresholdResult {
  int percent = 0;  ///< IoU threshold in percent
  double ap = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t num_gt = 0;
  std::vector<double> precision;  ///< per ranked prediction
  std::vector<double> recall;
};

struct APReport {
  double ap = 0.0;    ///< mean over 50:95:5
  double ap50 = 0.0;
  double ap25 = 0.0;
  std::vector<ThresholdResult> per_threshold;  ///< 25, then 50..95

  std::string to_json() const;
};

/// Thresholds evaluated, in percent.
std::vector<int> ap_thresholds();

/// Class-agnostic AP. Points unannotated in the ground truth are removed from every prediction
/// first (predictions left empty are dropped). Predictions are ranked by remaining size
/// descending, then id. At each threshold a prediction is a true positive when its best-IoU
/// unmatched ground-truth instance (ties: smaller id) reaches IoU >= threshold. AP is the mean
/// of the interpolated precision at recall 0, 0.01, ..., 1.
APReport evaluate(std::span<const InstanceId> pred, std::span<const std::uint32_t> gt);
APReport evaluate(const InstanceMap& pred, const GroundTruthMap& gt);

/// Carries labels from one cloud to another by nearest neighbour within max_dist (else 0).
std::vector<std::uint32_t> transfer_labels(const KdTree& source,
                                           std::span<const std::uint32_t> source_labels,
                                           std::span<const Point3> target, double max_dist);

/// PLY with an `instance_id` vertex property. Returns points and labels.
struct LabeledCloud {
  std::vector<Point3> points;
  std::vector<std::uint32_t> labels;
};
LabeledCloud read_labeled_ply(const std::filesystem::path& path);

/// JSON ground truth: an array of ids, or an object mapping point index strings to ids.
/// Points not listed are unannotated.
GroundTruthMap read_gt_json(const std::filesystem::path& path, std::size_t point_count);

}  // namespace ovmap
