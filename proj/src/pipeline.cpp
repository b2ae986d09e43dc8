#include "ovmap/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ovmap/errors.hpp"
#include "ovmap/io.hpp"

namespace ovmap {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_string(DepthMode m) {
  switch (m) {
    case DepthMode::raw: return "raw";
    case DepthMode::synthetic: return "synthetic";
    case DepthMode::supplemented: return "supplemented";
  }
  return "?";
}

DepthMode depth_mode_from(const std::string& s) {
  if (s == "raw") return DepthMode::raw;
  if (s == "synthetic") return DepthMode::synthetic;
  if (s == "supplemented") return DepthMode::supplemented;
  throw UsageError("unknown depth mode '" + s + "' (raw, synthetic, supplemented)");
}

void PipelineConfig::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw UsageError(std::string(name) + " must be positive");
  };
  positive(voxel_size, "voxel_size");
  positive(r_snap, "r_snap");
  positive(k_fz, "k_fz");
  positive(depth_scale, "depth_scale");
  if (stride < 1) throw UsageError("stride must be at least 1");
  if (dedup_voxel < 0.0) throw UsageError("dedup_voxel must be nonnegative");
  if (normal_k < 3) throw UsageError("normal_k must be at least 3");
  if (k_graph < 1) throw UsageError("k_graph must be at least 1");
  if (splat_radius < 0) throw UsageError("splat_radius must be nonnegative");
  if (z_buffer_tolerance < 0.0) throw UsageError("z_buffer_tolerance must be nonnegative");
  if (crop_pad < 0.0) throw UsageError("crop_pad must be nonnegative");
  lift().weights.validate();
  merge().validate();
  post().validate();
}

std::string PipelineConfig::to_json() const {
  ordered_json j;
  j["voxel_size"] = voxel_size;
  j["stride"] = stride;
  j["r_snap"] = r_snap;
  j["min_mask_points"] = min_mask_points;
  j["or_threshold"] = or_threshold;
  j["dedup_voxel"] = dedup_voxel;
  j["normal_k"] = normal_k;
  j["k_graph"] = k_graph;
  j["k_fz"] = k_fz;
  j["min_size"] = min_size;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["raw_score_counts"] = raw_score_counts;
  j["dbscan_eps"] = dbscan_eps;
  j["dbscan_min_pts"] = dbscan_min_pts;
  j["min_instance_points"] = min_instance_points;
  j["knn_fill_radius"] = knn_fill_radius;
  j["postprocess"] = postprocess;
  j["depth_mode"] = to_string(depth_mode);
  j["splat_radius"] = splat_radius;
  j["z_buffer_tolerance"] = z_buffer_tolerance;
  j["prefer_raw_when_synth_missing"] = prefer_raw_when_synth_missing;
  j["depth_scale"] = depth_scale;
  j["crop_pad"] = crop_pad;
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text, const PipelineConfig& base) {
  PipelineConfig c = base;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw UsageError("pipeline config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
      if (k == "voxel_size") c.voxel_size = v.get<double>();
      else if (k == "stride") c.stride = v.get<std::size_t>();
      else if (k == "r_snap") c.r_snap = v.get<double>();
      else if (k == "min_mask_points") c.min_mask_points = v.get<std::size_t>();
      else if (k == "or_threshold") c.or_threshold = v.get<double>();
      else if (k == "dedup_voxel") c.dedup_voxel = v.get<double>();
      else if (k == "normal_k") c.normal_k = v.get<int>();
      else if (k == "k_graph") c.k_graph = v.get<int>();
      else if (k == "k_fz") c.k_fz = v.get<double>();
      else if (k == "min_size") c.min_size = v.get<std::size_t>();
      else if (k == "alpha") c.alpha = v.get<double>();
      else if (k == "beta") c.beta = v.get<double>();
      else if (k == "raw_score_counts") c.raw_score_counts = v.get<bool>();
      else if (k == "dbscan_eps") c.dbscan_eps = v.get<double>();
      else if (k == "dbscan_min_pts") c.dbscan_min_pts = v.get<std::size_t>();
      else if (k == "min_instance_points") c.min_instance_points = v.get<std::size_t>();
      else if (k == "knn_fill_radius") c.knn_fill_radius = v.get<double>();
      else if (k == "postprocess") c.postprocess = v.get<bool>();
      else if (k == "depth_mode") c.depth_mode = depth_mode_from(v.get<std::string>());
      else if (k == "splat_radius") c.splat_radius = v.get<int>();
      else if (k == "z_buffer_tolerance") c.z_buffer_tolerance = v.get<double>();
      else if (k == "prefer_raw_when_synth_missing") c.prefer_raw_when_synth_missing = v.get<bool>();
      else if (k == "depth_scale") c.depth_scale = v.get<double>();
      else if (k == "crop_pad") c.crop_pad = v.get<double>();
      else throw UsageError("unknown pipeline config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  return from_json(text, PipelineConfig{});
}

LiftConfig PipelineConfig::lift() const {
  LiftConfig l;
  l.r_snap = r_snap;
  l.min_mask_points = min_mask_points;
  l.dedup_voxel = dedup_voxel;
  l.depth_scale = depth_scale;
  l.weights = {alpha, beta, !raw_score_counts};
  return l;
}

MergeConfig PipelineConfig::merge() const { return {or_threshold, dedup_voxel}; }

PostprocessConfig PipelineConfig::post() const {
  return {dbscan_eps, dbscan_min_pts, min_instance_points, knn_fill_radius};
}

SyntheticDepthConfig PipelineConfig::synthetic() const {
  return {splat_radius, z_buffer_tolerance};
}

namespace {

fs::path numbered(const fs::path& dir, const char* prefix, std::size_t t, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%06zu%s", prefix, t, ext);
  return dir / name;
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw DataError("missing file " + p.string());
}

}  // namespace

fs::path SceneDirectory::depth_path(std::size_t t) const {
  return numbered(root / "depth", "depth", t, ".png");
}
fs::path SceneDirectory::pose_path(std::size_t t) const {
  return numbered(root / "pose", "pose", t, ".txt");
}
fs::path SceneDirectory::mask_path(std::size_t t) const {
  return numbered(root / "mask", "mask", t, ".png");
}
fs::path SceneDirectory::color_path(std::size_t t) const {
  return numbered(root / "color", "color", t, ".png");
}

SceneDirectory SceneDirectory::open(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError("scene directory " + root.string() + " not found");
  SceneDirectory s;
  s.root = root;
  require_file(root / "intrinsics.txt");
  s.intrinsics = read_intrinsics(root / "intrinsics.txt");
  require_file(s.cloud_path());

  // Count depth_NNNNNN.png files and insist they are exactly 0..T-1.
  std::size_t count = 0;
  std::size_t max_index = 0;
  if (fs::is_directory(root / "depth")) {
    for (const auto& e : fs::directory_iterator(root / "depth")) {
      const auto name = e.path().filename().string();
      unsigned long idx = 0;
      char tail[8] = {0};
      if (std::sscanf(name.c_str(), "depth_%6lu%7s", &idx, tail) == 2 &&
          std::string(tail) == ".png" && name.size() == 16) {
        ++count;
        max_index = std::max<std::size_t>(max_index, idx);
      }
    }
  }
  if (count == 0) throw DataError("no depth frames under " + (root / "depth").string());
  if (max_index + 1 != count) {
    for (std::size_t t = 0; t <= max_index; ++t) require_file(s.depth_path(t));
  }
  s.frame_count = count;
  for (std::size_t t = 0; t < count; ++t) {
    require_file(s.pose_path(t));
    require_file(s.mask_path(t));
  }
  return s;
}

Pose SceneDirectory::load_pose(std::size_t t) const { return read_pose(pose_path(t)); }

PosedFrame SceneDirectory::load_frame(std::size_t t) const {
  if (t >= frame_count) throw UsageError("frame " + std::to_string(t) + " out of range");
  PosedFrame f;
  f.index = static_cast<std::uint32_t>(t);
  f.intrinsics = intrinsics;
  f.depth = read_png16(depth_path(t));
  f.masks = read_png16(mask_path(t));
  f.pose = load_pose(t);
  if (fs::is_regular_file(color_path(t))) f.color_path = color_path(t).string();
  const auto check = [&](const Grid<std::uint16_t>& g, const fs::path& p) {
    if (g.width() != intrinsics.width || g.height() != intrinsics.height) {
      throw DataError(p.string() + ": image size does not match intrinsics");
    }
  };
  check(f.depth, depth_path(t));
  check(f.masks, mask_path(t));
  return f;
}

WorkingCloud load_working_cloud(const fs::path& ply, double voxel) {
  const auto data = read_ply(ply);
  if (data.points.empty()) throw DataError(ply.string() + ": no points");
  return voxel_downsample(data.points, voxel, data.colors);
}

DepthImage frame_depth(const PosedFrame& frame, const WorkingCloud& cloud,
                       const PipelineConfig& cfg) {
  if (cfg.depth_mode == DepthMode::raw) return frame.depth;
  auto synth = render_synthetic_depth(cloud, frame.intrinsics, frame.pose, cfg.depth_scale,
                                      cfg.synthetic());
  if (cfg.depth_mode == DepthMode::synthetic) return synth;
  return supplement_depth(frame.depth, synth, {cfg.prefer_raw_when_synth_missing});
}

PipelineResult run_pipeline(const SceneDirectory& scene, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult r;
  r.frames = select_frames(scene.frame_count, cfg.stride);

  r.cloud = with_stage("load", [&] { return load_working_cloud(scene.cloud_path(), cfg.voxel_size); });

  std::vector<Point3> viewpoints;
  for (const auto t : r.frames) {
    viewpoints.push_back(with_stage("load", [&] { return scene.load_pose(t); }).translation());
  }
  with_stage("normals", [&] { attach_normals(r.cloud, cfg.normal_k, viewpoints); });

  r.segments = with_stage("segment", [&] {
    const auto graph = build_graph(r.cloud, cfg.k_graph);
    return felzenszwalb_segment(graph, cfg.k_fz, cfg.min_size);
  });

  // Frames lift in parallel with frame-local ids; ids are then offset in frame order so the
  // numbering does not depend on scheduling.
  std::vector<std::vector<InstanceMask3D>> lifted(r.frames.size());
  const LiftConfig lift_cfg = cfg.lift();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(r.frames.size()); ++i) {
    try {
      const auto frame = with_stage("load", [&] { return scene.load_frame(r.frames[i]); });
      PosedFrame used = frame;
      used.depth = with_stage("depth", [&] { return frame_depth(frame, r.cloud, cfg); });
      GroupIdCounter local;
      lifted[static_cast<std::size_t>(i)] =
          with_stage("lift", [&] { return lift_masks(used, r.cloud, lift_cfg, local); });
    } catch (...) {
#pragma omp critical(ovmap_pipeline_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<MaskSet> per_frame;
  GroupId offset = 0;
  for (auto& masks : lifted) {
    GroupId used = 0;
    for (auto& m : masks) {
      used = std::max(used, m.group_id);
      m.group_id += offset;
    }
    offset += used;
    r.lifted_masks += masks.size();
    per_frame.push_back(MaskSet::from_masks(std::move(masks)));
  }

  r.merged = with_stage("merge", [&] {
    return hierarchical_merge(std::move(per_frame), cfg.merge(), &r.merge_level_sizes);
  });

  r.instances = with_stage("vote", [&] {
    return dominant_vote(r.segments, r.merged, r.cloud.size());
  });

  if (cfg.postprocess) {
    r.instances = with_stage("postprocess", [&] {
      auto m = split_and_filter(r.instances, r.cloud, cfg.post());
      return knn_fill(m, r.cloud, cfg.knn_fill_radius);
    });
  }
  with_stage("vote", [&] { r.instances.check(); });

  r.crops = with_stage("manifest", [&] {
    return export_crop_manifest(r.instances, scene.intrinsics, cfg.crop_pad);
  });
  return r;
}

void write_pipeline_outputs(const SceneDirectory& scene, const PipelineConfig& cfg,
                            const PipelineResult& result, const fs::path& out_dir,
                            bool dump_intermediate) {
  fs::create_directories(out_dir);
  std::vector<std::string> outputs{"instances.ply", "instances.json", "crops.jsonl"};
  write_instance_map(out_dir / "instances.ply", out_dir / "instances.json", result.cloud,
                     result.instances);
  {
    std::ofstream out(out_dir / "crops.jsonl", std::ios::binary);
    if (!out) throw DataError("cannot write " + (out_dir / "crops.jsonl").string());
    write_crop_manifest(out, result.crops);
  }
  if (dump_intermediate) {
    std::ofstream out(out_dir / "masks.jsonl", std::ios::binary);
    if (!out) throw DataError("cannot write " + (out_dir / "masks.jsonl").string());
    write_masks_jsonl(out, result.merged.masks);
    out.close();
    PlyVertexData seg;
    seg.points = result.cloud.points;
    const auto labels = segment_labels(result.segments, result.cloud.size());
    seg.int_properties["segment_id"].assign(labels.begin(), labels.end());
    write_ply(out_dir / "segments.ply", seg);
    outputs.push_back("masks.jsonl");
    outputs.push_back("segments.ply");
  }

  ordered_json manifest;
  manifest["config"] = ordered_json::parse(cfg.to_json());
  ordered_json inputs;
  const auto rel = [&](const fs::path& p) { return fs::relative(p, scene.root).generic_string(); };
  inputs[rel(scene.root / "intrinsics.txt")] = sha256_file(scene.root / "intrinsics.txt");
  inputs[rel(scene.cloud_path())] = sha256_file(scene.cloud_path());
  for (const auto t : result.frames) {
    for (const auto& p : {scene.depth_path(t), scene.pose_path(t), scene.mask_path(t)}) {
      inputs[rel(p)] = sha256_file(p);
    }
  }
  manifest["inputs"] = std::move(inputs);
  ordered_json outs;
  for (const auto& name : outputs) outs[name] = sha256_file(out_dir / name);
  manifest["outputs"] = std::move(outs);
  ordered_json stats;
  stats["frames_used"] = result.frames.size();
  stats["cloud_points"] = result.cloud.size();
  stats["surface_segments"] = result.segments.size();
  stats["lifted_masks"] = result.lifted_masks;
  stats["merged_groups"] = result.merged.masks.size();
  stats["merge_level_sizes"] = result.merge_level_sizes;
  stats["instances"] = result.instances.instances().size();
  manifest["stats"] = std::move(stats);
  write_text_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");
}

}  // namespace ovmap
