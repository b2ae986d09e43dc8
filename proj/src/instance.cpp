#include "ovmap/instance.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "ovmap/errors.hpp"
#include "ovmap/io.hpp"

namespace ovmap {

using nlohmann::ordered_json;

const InstanceRecord* InstanceMap::find(InstanceId id) const {
  const auto it = std::lower_bound(records_.begin(), records_.end(), id,
                                   [](const InstanceRecord& r, InstanceId v) { return r.id < v; });
  return (it != records_.end() && it->id == id) ? &*it : nullptr;
}

InstanceRecord* InstanceMap::find(InstanceId id) {
  return const_cast<InstanceRecord*>(std::as_const(*this).find(id));
}

void InstanceMap::upsert(InstanceRecord record) {
  const auto it = std::lower_bound(records_.begin(), records_.end(), record.id,
                                   [](const InstanceRecord& r, InstanceId v) { return r.id < v; });
  if (it != records_.end() && it->id == record.id) {
    *it = std::move(record);
  } else {
    records_.insert(it, std::move(record));
  }
}

void InstanceMap::recount() {
  std::map<InstanceId, std::size_t> counts;
  for (const auto id : labels_) {
    if (id != 0) ++counts[id];
  }
  std::vector<InstanceRecord> kept;
  for (auto& r : records_) {
    const auto it = counts.find(r.id);
    if (it == counts.end()) continue;
    r.point_count = it->second;
    kept.push_back(std::move(r));
  }
  records_ = std::move(kept);
}

void InstanceMap::check() const {
  std::map<InstanceId, std::size_t> counts;
  for (const auto id : labels_) {
    if (id != 0) ++counts[id];
  }
  for (const auto& [id, n] : counts) {
    const auto* r = find(id);
    if (!r) throw InvariantError("instance " + std::to_string(id) + " has no record");
    if (r->point_count != n) {
      throw InvariantError("instance " + std::to_string(id) + " point count mismatch");
    }
  }
  if (counts.size() != records_.size()) throw InvariantError("instance record without points");
}

std::vector<std::vector<std::uint32_t>> InstanceMap::members() const {
  std::vector<std::vector<std::uint32_t>> out(records_.size());
  std::map<InstanceId, std::size_t> slot;
  for (std::size_t i = 0; i < records_.size(); ++i) slot[records_[i].id] = i;
  for (std::uint32_t p = 0; p < labels_.size(); ++p) {
    if (labels_[p] == 0) continue;
    const auto it = slot.find(labels_[p]);
    if (it != slot.end()) out[it->second].push_back(p);
  }
  return out;
}

InstanceMap dominant_vote(std::span<const SurfaceSegment> segments, const MaskSet& masks,
                          std::size_t point_count) {
  // CSR membership: groups covering each point.
  std::vector<std::uint32_t> offsets(point_count + 1, 0);
  for (const auto& m : masks.masks) {
    for (const auto p : m.points) {
      if (p >= point_count) throw DataError("mask references point outside the cloud");
      ++offsets[p + 1];
    }
  }
  for (std::size_t i = 0; i < point_count; ++i) offsets[i + 1] += offsets[i];
  std::vector<GroupId> groups(offsets.back());
  {
    auto fill = offsets;
    for (const auto& m : masks.masks) {
      for (const auto p : m.points) groups[fill[p]++] = m.group_id;
    }
  }

  std::vector<GroupId> winner(segments.size(), 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t si = 0; si < static_cast<std::int64_t>(segments.size()); ++si) {
    const auto& seg = segments[static_cast<std::size_t>(si)];
    std::vector<GroupId> hits;
    for (const auto p : seg.points) {
      if (p >= point_count) continue;
      hits.insert(hits.end(), groups.begin() + offsets[p], groups.begin() + offsets[p + 1]);
    }
    std::sort(hits.begin(), hits.end());
    GroupId best = 0;
    std::size_t best_count = 0;
    for (std::size_t i = 0; i < hits.size();) {
      std::size_t j = i;
      while (j < hits.size() && hits[j] == hits[i]) ++j;
      // Ascending scan with strict '>' keeps the smaller id on ties.
      if (j - i > best_count) {
        best_count = j - i;
        best = hits[i];
      }
      i = j;
    }
    winner[static_cast<std::size_t>(si)] = best;
  }

  InstanceMap map(point_count);
  auto& labels = map.mutable_labels();
  for (std::size_t s = 0; s < segments.size(); ++s) {
    for (const auto p : segments[s].points) {
      if (p >= point_count) throw DataError("segment references point outside the cloud");
      labels[p] = winner[s];
    }
  }
  for (const auto& m : masks.masks) {
    InstanceRecord r;
    r.id = m.group_id;
    r.score = m.score;
    r.best_view = m.best_view;
    map.upsert(std::move(r));
  }
  map.recount();
  return map;
}

BoundingBox pad_box(const BoundingBox& box, double pad_fraction, int width, int height) {
  const int px = static_cast<int>(std::lround(pad_fraction * (box.x1 - box.x0)));
  const int py = static_cast<int>(std::lround(pad_fraction * (box.y1 - box.y0)));
  return {std::clamp(box.x0 - px, 0, width), std::clamp(box.y0 - py, 0, height),
          std::clamp(box.x1 + px, 0, width), std::clamp(box.y1 + py, 0, height)};
}

std::vector<CropRequest> export_crop_manifest(const InstanceMap& map, const CameraIntrinsics& K,
                                              double pad_fraction) {
  if (!(pad_fraction >= 0.0)) throw UsageError("pad fraction must be nonnegative");
  std::vector<CropRequest> out;
  out.reserve(map.instances().size());
  for (const auto& r : map.instances()) {
    if (!r.best_view) {
      throw InvariantError("instance " + std::to_string(r.id) + " has no best view");
    }
    out.push_back({r.id, r.best_view->frame, r.best_view->mask_id,
                   pad_box(r.best_view->bbox, pad_fraction, K.width, K.height)});
  }
  return out;
}

void write_crop_manifest(std::ostream& out, std::span<const CropRequest> crops) {
  for (const auto& c : crops) {
    ordered_json j;
    j["instance_id"] = c.instance_id;
    j["frame"] = c.frame;
    j["mask_id"] = c.mask_id;
    j["bbox"] = {c.bbox.x0, c.bbox.y0, c.bbox.x1, c.bbox.y1};
    out << j.dump() << '\n';
  }
}

std::vector<CropRequest> read_crop_manifest(std::istream& in) {
  std::vector<CropRequest> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CropRequest c;
      c.instance_id = j.at("instance_id").get<InstanceId>();
      c.frame = j.at("frame").get<std::uint32_t>();
      c.mask_id = j.at("mask_id").get<std::uint16_t>();
      const auto box = j.at("bbox").get<std::vector<int>>();
      if (box.size() != 4) throw DataError("bbox must have 4 entries");
      c.bbox = {box[0], box[1], box[2], box[3]};
      out.push_back(c);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("crop manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

ordered_json best_view_json(const BestView& bv) {
  ordered_json j;
  j["frame"] = bv.frame;
  j["mask_id"] = bv.mask_id;
  j["pixel_count"] = bv.pixel_count;
  j["bbox"] = {bv.bbox.x0, bv.bbox.y0, bv.bbox.x1, bv.bbox.y1};
  return j;
}

BestView best_view_from_json(const nlohmann::json& j) {
  BestView bv;
  bv.frame = j.at("frame").get<std::uint32_t>();
  bv.mask_id = j.at("mask_id").get<std::uint16_t>();
  bv.pixel_count = j.at("pixel_count").get<std::uint32_t>();
  const auto box = j.at("bbox").get<std::vector<int>>();
  if (box.size() != 4) throw DataError("bbox must have 4 entries");
  bv.bbox = {box[0], box[1], box[2], box[3]};
  return bv;
}

}  // namespace

std::string instance_records_json(const InstanceMap& map) {
  ordered_json doc;
  doc["point_count"] = map.point_count();
  ordered_json arr = ordered_json::array();
  for (const auto& r : map.instances()) {
    ordered_json j;
    j["instance_id"] = r.id;
    j["point_count"] = r.point_count;
    j["score"] = r.score;
    j["best_view"] = r.best_view ? best_view_json(*r.best_view) : ordered_json(nullptr);
    if (r.feature) j["feature"] = *r.feature;
    if (r.label) j["label"] = *r.label;
    arr.push_back(std::move(j));
  }
  doc["instances"] = std::move(arr);
  return doc.dump(2) + "\n";
}

void write_instance_map(const std::filesystem::path& ply_path,
                        const std::filesystem::path& json_path, const WorkingCloud& cloud,
                        const InstanceMap& map) {
  if (cloud.size() != map.point_count()) {
    throw InvariantError("write_instance_map: map and cloud sizes differ");
  }
  PlyVertexData ply;
  ply.points = cloud.points;
  auto& ids = ply.int_properties["instance_id"];
  ids.assign(map.labels().begin(), map.labels().end());
  write_ply(ply_path, ply);
  write_text_file(json_path, instance_records_json(map));
}

LoadedInstanceMap read_instance_map(const std::filesystem::path& ply_path,
                                    const std::filesystem::path& json_path) {
  auto ply = read_ply(ply_path);
  const auto it = ply.int_properties.find("instance_id");
  if (it == ply.int_properties.end()) {
    throw DataError(ply_path.string() + ": no instance_id vertex property");
  }
  LoadedInstanceMap out;
  out.points = std::move(ply.points);
  out.map = InstanceMap(out.points.size());
  auto& labels = out.map.mutable_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (it->second[i] < 0) throw DataError(ply_path.string() + ": negative instance id");
    labels[i] = static_cast<InstanceId>(it->second[i]);
  }
  if (!json_path.empty()) {
    try {
      const auto doc = nlohmann::json::parse(read_text_file(json_path));
      for (const auto& j : doc.at("instances")) {
        InstanceRecord r;
        r.id = j.at("instance_id").get<InstanceId>();
        r.score = j.at("score").get<double>();
        if (j.contains("best_view") && !j.at("best_view").is_null()) {
          r.best_view = best_view_from_json(j.at("best_view"));
        }
        if (j.contains("feature")) r.feature = j.at("feature").get<std::vector<float>>();
        if (j.contains("label")) r.label = j.at("label").get<std::string>();
        out.map.upsert(std::move(r));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(json_path.string() + ": " + e.what());
    }
  }
  // Ids present in the PLY but missing from the sidecar still get a bare record.
  for (const auto id : out.map.labels()) {
    if (id != 0 && !out.map.find(id)) out.map.upsert(InstanceRecord{id, 0, 0.0, {}, {}, {}});
  }
  out.map.recount();
  return out;
}

}  // namespace ovmap
