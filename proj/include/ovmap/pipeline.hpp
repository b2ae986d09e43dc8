#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ovmap/camera.hpp"
#include "ovmap/cloud.hpp"
#include "ovmap/depth.hpp"
#include "ovmap/instance.hpp"
#include "ovmap/mask_lift.hpp"
#include "ovmap/mask_merge.hpp"
#include "ovmap/postprocess.hpp"
#include "ovmap/segmentation.hpp"

namespace ovmap {

enum class DepthMode { raw, synthetic, supplemented };

std::string to_string(DepthMode m);
DepthMode depth_mode_from(const std::string& s);

struct PipelineConfig {
  double voxel_size = 0.02;
  std::size_t stride = 10;
  double r_snap = 0.04;
  std::size_t min_mask_points = 25;
  double or_threshold = 0.3;
  double dedup_voxel = 0.005;
  int normal_k = 30;
  int k_graph = 10;
  double k_fz = 0.05;
  std::size_t min_size = 50;
  double alpha = 1.0;
  double beta = 1.0;
  bool raw_score_counts = false;
  double dbscan_eps = 0.05;
  std::size_t dbscan_min_pts = 10;
  std::size_t min_instance_points = 50;
  double knn_fill_radius = 0.04;
  bool postprocess = true;
  DepthMode depth_mode = DepthMode::supplemented;
  int splat_radius = 1;
  double z_buffer_tolerance = 0.0;
  bool prefer_raw_when_synth_missing = false;
  double depth_scale = kDefaultDepthScale;
  double crop_pad = 0.1;

  /// Throws UsageError for out-of-range values.
  void validate() const;
  /// Keys are the field names.
  std::string to_json() const;
  /// Starts from `base` and overrides the keys present. Unknown keys are a UsageError.
  static PipelineConfig from_json(const std::string& text, const PipelineConfig& base);
  static PipelineConfig from_json(const std::string& text);

  LiftConfig lift() const;
  MergeConfig merge() const;
  PostprocessConfig post() const;
  SyntheticDepthConfig synthetic() const;
};

/// Indexed scene directory. Frames are 0..frame_count-1 with depth, pose and mask each present.
struct SceneDirectory {
  std::filesystem::path root;
  CameraIntrinsics intrinsics;
  std::size_t frame_count = 0;

  /// Throws DataError naming the first missing or inconsistent file.
  static SceneDirectory open(const std::filesystem::path& root);

  std::filesystem::path cloud_path() const { return root / "cloud.ply"; }
  std::filesystem::path depth_path(std::size_t t) const;
  std::filesystem::path pose_path(std::size_t t) const;
  std::filesystem::path mask_path(std::size_t t) const;
  std::filesystem::path color_path(std::size_t t) const;
  std::filesystem::path gt_path() const { return root / "gt_instances.ply"; }

  /// Raw depth, masks, pose and intrinsics for frame t. Image sizes must match the intrinsics.
  PosedFrame load_frame(std::size_t t) const;
  Pose load_pose(std::size_t t) const;
};

/// Loads cloud.ply and voxelizes it.
WorkingCloud load_working_cloud(const std::filesystem::path& ply, double voxel);

/// The depth image the lifting stage uses for `frame` under `mode`.
DepthImage frame_depth(const PosedFrame& frame, const WorkingCloud& cloud,
                       const PipelineConfig& cfg);

struct PipelineResult {
  WorkingCloud cloud;
  std::vector<SurfaceSegment> segments;
  MaskSet merged;
  InstanceMap instances;
  std::vector<CropRequest> crops;
  std::vector<std::uint32_t> frames;
  std::size_t lifted_masks = 0;
  std::vector<std::size_t> merge_level_sizes;
};

/// Runs every stage in memory.
PipelineResult run_pipeline(const SceneDirectory& scene, const PipelineConfig& cfg);

/// Writes instances.ply, instances.json, crops.jsonl and run_manifest.json (config and SHA-256
/// of inputs and outputs) into out_dir. With `dump_intermediate`, masks.jsonl and segments.ply
/// are written as well.
void write_pipeline_outputs(const SceneDirectory& scene, const PipelineConfig& cfg,
                            const PipelineResult& result, const std::filesystem::path& out_dir,
                            bool dump_intermediate = false);

}  // namespace ovmap
