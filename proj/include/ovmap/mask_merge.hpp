#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "ovmap/mask_lift.hpp"

namespace ovmap {

struct MergeConfig {
  /// Two masks merge when their overlap ratio is strictly greater than this.
  double or_threshold = 0.3;
  /// Resolution used to thin back-projected points before they are snapped to the cloud.
  double dedup_voxel = 0.005;

  void validate() const;
};

/// Masks at one level of the merge hierarchy.
struct MaskSet {
  std::vector<InstanceMask3D> masks;
  std::uint32_t level = 0;
  /// Every group id ever absorbed into this set, mapped to the group currently holding it.
  std::map<GroupId, GroupId> parent;

  static MaskSet from_masks(std::vector<InstanceMask3D> masks);
  /// Current group of an original group id. Throws DataError for unknown ids.
  GroupId resolve(GroupId original) const;
  const InstanceMask3D* find(GroupId current) const;
};

/// |a ∩ b| for two sorted index sets.
std::size_t intersection_size(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// |a ∩ b| / max(|a|, |b|).
double overlap_ratio(const InstanceMask3D& a, const InstanceMask3D& b);

/// Unifies every cross pair (one mask from each side) whose overlap ratio exceeds the threshold,
/// closing transitively. A unified group takes the union of the points, the id of its largest
/// member (ties: smaller id), and the highest score with that member's best view.
/// Output masks are ordered by descending size, then id.
MaskSet merge_pair(const MaskSet& left, const MaskSet& right, const MergeConfig& cfg);

/// Pairwise merging of neighbours (2i, 2i+1) level by level until one set remains; an odd
/// trailing set is promoted unchanged. Group ids of the result are compacted to 1..G in
/// (descending size, id) order. `level_sizes`, when given, receives the set count per level.
MaskSet hierarchical_merge(std::vector<MaskSet> per_frame, const MergeConfig& cfg,
                           std::vector<std::size_t>* level_sizes = nullptr);

/// JSON-lines dump: one {group_id, point_indices, score, best_view} object per mask.
void write_masks_jsonl(std::ostream& out, std::span<const InstanceMask3D> masks);
std::vector<InstanceMask3D> read_masks_jsonl(std::istream& in);

}  // namespace ovmap
