#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ovmap/camera.hpp"
#include "ovmap/features.hpp"
#include "ovmap/image.hpp"

namespace ovmap {

/// Seeded generator with platform-independent uniform and normal draws.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}
  /// [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class PrimitiveType { box, sphere, cylinder };
enum class DropoutMode {
  pixel,  ///< each reflective-object pixel drops independently
  patch,  ///< a fixed vertical wedge of each reflective object drops in every view
};

struct SceneSpec {
  std::uint64_t seed = 0;
  double room_size = 5.0;        ///< square floor edge, metres
  double placement_radius = 1.6; ///< objects lie within this distance of the centre
  int min_objects = 8;
  int max_objects = 15;
  std::vector<PrimitiveType> primitives{PrimitiveType::box, PrimitiveType::sphere,
                                        PrimitiveType::cylinder};
  double reflective_probability = 0.0;
  double dropout_fraction = 0.0;
  DropoutMode dropout_mode = DropoutMode::pixel;
  int frame_count = 60;
  double orbit_radius = 3.0;
  double orbit_height = 1.9;
  double height_variation = 0.3;
  int image_width = 320;
  int image_height = 240;
  double focal = 250.0;
  double rotation_jitter_deg = 0.0;
  double translation_jitter = 0.0;
  int mask_erosion = 0;
  double cloud_voxel = 0.02;
  int class_count = 8;
  std::uint32_t feature_dim = 16;

  void validate() const;
  std::string to_json() const;
  static SceneSpec from_json(const std::string& text);
};

std::string to_string(PrimitiveType t);
std::string to_string(DropoutMode m);

struct SceneObject {
  PrimitiveType type = PrimitiveType::box;
  Point3 base{0, 0, 0};          ///< centre of the footprint on the floor
  double yaw = 0.0;              ///< boxes only
  Eigen::Vector3d half_extent{0, 0, 0};  ///< box half sizes; sphere/cylinder use x as radius
  double height = 0.0;           ///< cylinder height
  std::uint32_t class_id = 0;
  bool reflective = false;
  double dropout_phase = 0.0;    ///< start angle of the patch-mode wedge
  Rgb color;

  double footprint_radius() const;
};

/// Floor plane height. Objects rest on it.
inline constexpr double kFloorZ = -0.01;

/// Vocabulary used to name the object classes.
std::string class_name(std::uint32_t class_id);

struct SynthScene {
  SceneSpec spec;
  CameraIntrinsics intrinsics;
  std::vector<SceneObject> objects;
  std::vector<Pose> poses;  ///< true camera poses

  /// Hit surface ids: 0 = nothing, 1..n = object, n + 1 = floor.
  std::uint32_t floor_surface() const { return static_cast<std::uint32_t>(objects.size()) + 1; }
};

/// Places objects and cameras. Throws UsageError for an invalid spec and DataError when the
/// objects cannot be placed without overlap.
SynthScene layout_scene(const SceneSpec& spec);

struct RayHit {
  double t = 0.0;
  std::uint32_t surface = 0;
  Point3 point{0, 0, 0};
};

/// Nearest intersection of origin + t * dir (t > 0) with the scene.
std::optional<RayHit> cast_ray(const SynthScene& scene, const Point3& origin,
                               const Eigen::Vector3d& dir);

struct RenderedFrame {
  DepthImage exact_depth;
  DepthImage raw_depth;           ///< exact depth after dropout
  Grid<std::uint32_t> surfaces;   ///< hit surface per pixel
  MaskLabelImage masks;           ///< surface ids, eroded when requested
  RgbImage color;
  Pose written_pose;              ///< true pose after jitter
};

RenderedFrame render_frame(const SynthScene& scene, std::uint32_t t);

struct GeneratedScene {
  SynthScene scene;
  std::size_t cloud_points = 0;
};

/// Writes the scene directory: intrinsics.txt, cloud.ply, depth/, pose/, mask/, color/,
/// gt_instances.ply, spec.json and queries.ovft.
GeneratedScene generate(const SceneSpec& spec, const std::filesystem::path& out_dir);

/// One-hot class vector plus isotropic noise of scale noise_sigma, normalized, for every nonzero
/// id in `labels` (ascending). Throws UsageError if dim is below the class count and DataError
/// for ids without a class.
std::vector<FeatureRecord> synth_features(std::span<const std::uint32_t> labels,
                                          const std::map<std::uint32_t, std::uint32_t>& class_of,
                                          double noise_sigma, std::uint32_t dim,
                                          std::uint64_t seed);

/// One-hot query per class, labelled with class_name.
QuerySet class_queries(std::uint32_t class_count, std::uint32_t dim);

/// Object class per ground-truth id, read back from spec.json.
std::map<std::uint32_t, std::uint32_t> read_object_classes(const std::filesystem::path& spec_json);

}  // namespace ovmap
