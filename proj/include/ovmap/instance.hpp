#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ovmap/cloud.hpp"
#include "ovmap/mask_merge.hpp"
#include "ovmap/score.hpp"
#include "ovmap/segmentation.hpp"

namespace ovmap {

using InstanceId = std::uint32_t;

struct InstanceRecord {
  InstanceId id = 0;
  std::size_t point_count = 0;
  double score = 0.0;
  std::optional<BestView> best_view;
  std::optional<std::vector<float>> feature;
  std::optional<std::string> label;
};

/// Per-point instance ids over the working cloud (0 = unassigned) plus one record per id.
class InstanceMap {
 public:
  InstanceMap() = default;
  explicit InstanceMap(std::size_t point_count) : labels_(point_count, 0) {}

  std::span<const InstanceId> labels() const { return labels_; }
  std::vector<InstanceId>& mutable_labels() { return labels_; }
  std::size_t point_count() const { return labels_.size(); }

  /// Records sorted by id.
  const std::vector<InstanceRecord>& instances() const { return records_; }
  std::vector<InstanceRecord>& mutable_instances() { return records_; }

  const InstanceRecord* find(InstanceId id) const;
  InstanceRecord* find(InstanceId id);

  /// Inserts or replaces a record, keeping id order.
  void upsert(InstanceRecord record);

  /// Recomputes point counts from the labels and drops records that own no point.
  void recount();

  /// Throws InvariantError unless every nonzero label has a record and counts match.
  void check() const;

  /// Sorted point indices per instance, in record order.
  std::vector<std::vector<std::uint32_t>> members() const;

 private:
  std::vector<InstanceId> labels_;
  std::vector<InstanceRecord> records_;
};

/// Assigns each segment the group covering most of its points (ties: smaller group id; no
/// coverage: 0). Segments won by the same group form one instance whose id is the group id;
/// the record takes the group's score and best view.
InstanceMap dominant_vote(std::span<const SurfaceSegment> segments, const MaskSet& masks,
                          std::size_t point_count);

/// A best-view crop to embed for one instance.
struct CropRequest {
  InstanceId instance_id = 0;
  std::uint32_t frame = 0;
  std::uint16_t mask_id = 0;
  BoundingBox bbox;
  bool operator==(const CropRequest&) const = default;
};

/// Grows `box` by round(pad_fraction * extent) on every side, then clips it to the image.
BoundingBox pad_box(const BoundingBox& box, double pad_fraction, int width, int height);

/// One request per instance from its best view. Throws InvariantError when a record has none.
std::vector<CropRequest> export_crop_manifest(const InstanceMap& map, const CameraIntrinsics& K,
                                              double pad_fraction = 0.1);

void write_crop_manifest(std::ostream& out, std::span<const CropRequest> crops);
std::vector<CropRequest> read_crop_manifest(std::istream& in);

/// PLY with per-vertex int32 `instance_id` plus a JSON sidecar of instance records.
void write_instance_map(const std::filesystem::path& ply_path,
                        const std::filesystem::path& json_path, const WorkingCloud& cloud,
                        const InstanceMap& map);
std::string instance_records_json(const InstanceMap& map);

struct LoadedInstanceMap {
  std::vector<Point3> points;
  InstanceMap map;
};
/// Reads the PLY and, if `json_path` is non-empty, the sidecar records. Without a sidecar the
/// records carry only ids and counts.
LoadedInstanceMap read_instance_map(const std::filesystem::path& ply_path,
                                    const std::filesystem::path& json_path = {});

}  // namespace ovmap
