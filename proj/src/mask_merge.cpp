#include "ovmap/mask_merge.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "ovmap/errors.hpp"
#include "ovmap/union_find.hpp"

namespace ovmap {

using nlohmann::ordered_json;

void MergeConfig::validate() const {
  if (!(or_threshold > 0.0 && or_threshold <= 1.0)) {
    throw UsageError("or_threshold must be in (0, 1]");
  }
  if (!(dedup_voxel >= 0.0)) throw UsageError("dedup_voxel must be nonnegative");
}

MaskSet MaskSet::from_masks(std::vector<InstanceMask3D> masks) {
  MaskSet s;
  for (const auto& m : masks) {
    if (!s.parent.emplace(m.group_id, m.group_id).second) {
      throw DataError("duplicate group id " + std::to_string(m.group_id) + " in mask set");
    }
  }
  s.masks = std::move(masks);
  return s;
}

GroupId MaskSet::resolve(GroupId original) const {
  const auto it = parent.find(original);
  if (it == parent.end()) throw DataError("unknown group id " + std::to_string(original));
  return it->second;
}

const InstanceMask3D* MaskSet::find(GroupId current) const {
  for (const auto& m : masks) {
    if (m.group_id == current) return &m;
  }
  return nullptr;
}

std::size_t intersection_size(std::span<const std::uint32_t> a,
                              std::span<const std::uint32_t> b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double overlap_ratio(const InstanceMask3D& a, const InstanceMask3D& b) {
  const std::size_t denom = std::max(a.points.size(), b.points.size());
  if (denom == 0) return 0.0;
  return static_cast<double>(intersection_size(a.points, b.points)) / static_cast<double>(denom);
}

namespace {

bool larger_first(const InstanceMask3D& a, const InstanceMask3D& b) {
  if (a.points.size() != b.points.size()) return a.points.size() > b.points.size();
  return a.group_id < b.group_id;
}

std::vector<std::uint32_t> evaluation_order(std::span<const InstanceMask3D> masks,
                                            std::uint32_t offset) {
  std::vector<std::uint32_t> order(masks.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return larger_first(masks[a], masks[b]);
  });
  for (auto& o : order) o += offset;
  return order;
}

}  // namespace

MaskSet merge_pair(const MaskSet& left, const MaskSet& right, const MergeConfig& cfg) {
  cfg.validate();
  std::vector<const InstanceMask3D*> all;
  all.reserve(left.masks.size() + right.masks.size());
  for (const auto& m : left.masks) all.push_back(&m);
  for (const auto& m : right.masks) all.push_back(&m);
  const auto nl = static_cast<std::uint32_t>(left.masks.size());

  DisjointSet ds(all.size());
  const auto lo = evaluation_order(left.masks, 0);
  const auto ro = evaluation_order(right.masks, nl);
  for (const auto a : lo) {
    const auto& ma = *all[a];
    for (const auto b : ro) {
      const auto& mb = *all[b];
      const auto small = std::min(ma.points.size(), mb.points.size());
      const auto large = std::max(ma.points.size(), mb.points.size());
      // |a ∩ b| <= min(|a|, |b|) bounds the ratio from above.
      if (static_cast<double>(small) / static_cast<double>(large) <= cfg.or_threshold) continue;
      if (overlap_ratio(ma, mb) > cfg.or_threshold) ds.unite(a, b);
    }
  }

  std::map<std::uint32_t, std::vector<std::uint32_t>> classes;
  for (std::uint32_t i = 0; i < all.size(); ++i) classes[ds.find(i)].push_back(i);

  MaskSet out;
  out.level = std::max(left.level, right.level) + 1;
  std::map<GroupId, GroupId> remap;
  for (auto& [root, members] : classes) {
    std::sort(members.begin(), members.end(), [&](std::uint32_t a, std::uint32_t b) {
      return larger_first(*all[a], *all[b]);
    });
    const InstanceMask3D& survivor = *all[members.front()];
    const InstanceMask3D* best = &survivor;
    for (const auto i : members) {
      if (all[i]->score > best->score) best = all[i];
    }
    InstanceMask3D merged;
    merged.group_id = survivor.group_id;
    merged.score = best->score;
    merged.best_view = best->best_view;
    if (members.size() == 1) {
      merged.points = survivor.points;
    } else {
      for (const auto i : members) {
        std::vector<std::uint32_t> u;
        u.reserve(merged.points.size() + all[i]->points.size());
        std::set_union(merged.points.begin(), merged.points.end(), all[i]->points.begin(),
                       all[i]->points.end(), std::back_inserter(u));
        merged.points = std::move(u);
      }
    }
    for (const auto i : members) remap[all[i]->group_id] = survivor.group_id;
    out.masks.push_back(std::move(merged));
  }
  std::sort(out.masks.begin(), out.masks.end(), larger_first);

  for (const auto* side : {&left, &right}) {
    for (const auto& [orig, cur] : side->parent) {
      const auto it = remap.find(cur);
      if (it == remap.end()) throw InvariantError("merge_pair: parent table references a lost group");
      if (!out.parent.emplace(orig, it->second).second) {
        throw DataError("merge_pair: group id " + std::to_string(orig) + " appears on both sides");
      }
    }
  }
  return out;
}

MaskSet hierarchical_merge(std::vector<MaskSet> per_frame, const MergeConfig& cfg,
                           std::vector<std::size_t>* level_sizes) {
  if (per_frame.empty()) throw UsageError("hierarchical_merge: no mask sets");
  cfg.validate();
  if (level_sizes) level_sizes->clear();

  std::vector<MaskSet> current = std::move(per_frame);
  while (current.size() > 1) {
    const std::size_t pairs = current.size() / 2;
    std::vector<MaskSet> next((current.size() + 1) / 2);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(pairs); ++p) {
      const auto i = static_cast<std::size_t>(p);
      next[i] = merge_pair(current[2 * i], current[2 * i + 1], cfg);
    }
    if (current.size() % 2 == 1) next.back() = std::move(current.back());
    current = std::move(next);
    if (level_sizes) level_sizes->push_back(current.size());
  }

  MaskSet result = std::move(current.front());
  std::sort(result.masks.begin(), result.masks.end(), larger_first);
  std::map<GroupId, GroupId> compact;
  for (std::size_t i = 0; i < result.masks.size(); ++i) {
    compact[result.masks[i].group_id] = static_cast<GroupId>(i + 1);
    result.masks[i].group_id = static_cast<GroupId>(i + 1);
  }
  for (auto& [orig, cur] : result.parent) {
    const auto it = compact.find(cur);
    if (it == compact.end()) throw InvariantError("hierarchical_merge: dangling parent entry");
    cur = it->second;
  }
  return result;
}

void write_masks_jsonl(std::ostream& out, std::span<const InstanceMask3D> masks) {
  for (const auto& m : masks) {
    ordered_json j;
    j["group_id"] = m.group_id;
    j["point_indices"] = m.points;
    j["score"] = m.score;
    j["best_view"] = {{"frame", m.best_view.frame},
                      {"mask_id", m.best_view.mask_id},
                      {"pixel_count", m.best_view.pixel_count},
                      {"bbox",
                       {m.best_view.bbox.x0, m.best_view.bbox.y0, m.best_view.bbox.x1,
                        m.best_view.bbox.y1}}};
    out << j.dump() << '\n';
  }
}

std::vector<InstanceMask3D> read_masks_jsonl(std::istream& in) {
  std::vector<InstanceMask3D> masks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      InstanceMask3D m;
      m.group_id = j.at("group_id").get<GroupId>();
      m.points = j.at("point_indices").get<std::vector<std::uint32_t>>();
      m.score = j.at("score").get<double>();
      const auto& bv = j.at("best_view");
      m.best_view.frame = bv.at("frame").get<std::uint32_t>();
      m.best_view.mask_id = bv.at("mask_id").get<std::uint16_t>();
      m.best_view.pixel_count = bv.at("pixel_count").get<std::uint32_t>();
      const auto box = bv.at("bbox").get<std::vector<int>>();
      if (box.size() != 4) throw DataError("bbox must have 4 entries");
      m.best_view.bbox = {box[0], box[1], box[2], box[3]};
      if (!std::is_sorted(m.points.begin(), m.points.end()) ||
          std::adjacent_find(m.points.begin(), m.points.end()) != m.points.end()) {
        throw DataError("point_indices must be sorted and unique");
      }
      masks.push_back(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("mask dump line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("mask dump line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return masks;
}

}  // namespace ovmap
