#include "ovmap/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <unordered_map>

#include <Eigen/Geometry>
#include <json.hpp>

#include "ovmap/cloud.hpp"
#include "ovmap/errors.hpp"
#include "ovmap/io.hpp"

namespace ovmap {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::int64_t SynthRng::integer(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return std::min(hi, lo + static_cast<std::int64_t>(uniform() * span));
}

double SynthRng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::string to_string(PrimitiveType t) {
  switch (t) {
    case PrimitiveType::box: return "box";
    case PrimitiveType::sphere: return "sphere";
    case PrimitiveType::cylinder: return "cylinder";
  }
  return "?";
}

std::string to_string(DropoutMode m) { return m == DropoutMode::pixel ? "pixel" : "patch"; }

namespace {

PrimitiveType primitive_from(const std::string& s) {
  if (s == "box") return PrimitiveType::box;
  if (s == "sphere") return PrimitiveType::sphere;
  if (s == "cylinder") return PrimitiveType::cylinder;
  throw UsageError("unknown primitive '" + s + "'");
}

DropoutMode dropout_from(const std::string& s) {
  if (s == "pixel") return DropoutMode::pixel;
  if (s == "patch") return DropoutMode::patch;
  throw UsageError("unknown dropout mode '" + s + "'");
}

constexpr const char* kClassNames[] = {"chair", "table", "lamp",  "bin",   "plant",  "monitor",
                                       "box",   "ball",  "vase",  "stool", "speaker", "kettle"};
constexpr std::uint32_t kClassNameCount = sizeof kClassNames / sizeof kClassNames[0];

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Pose look_at(const Point3& eye, const Point3& target) {
  const Eigen::Vector3d f = (target - eye).normalized();
  const Eigen::Vector3d r = f.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d d = f.cross(r);
  Eigen::Matrix3d R;
  R.col(0) = r;
  R.col(1) = d;
  R.col(2) = f;
  return Pose::from_rotation_translation(R, eye);
}

// Smallest t > eps of a*t^2 + 2*b*t + c = 0.
std::optional<double> smallest_root(double a, double b, double c) {
  constexpr double eps = 1e-9;
  const double disc = b * b - a * c;
  if (disc < 0.0 || a == 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  const double t0 = (-b - s) / a;
  if (t0 > eps) return t0;
  const double t1 = (-b + s) / a;
  if (t1 > eps) return t1;
  return std::nullopt;
}

std::optional<double> hit_object(const SceneObject& o, const Point3& origin,
                                 const Eigen::Vector3d& dir) {
  constexpr double eps = 1e-9;
  switch (o.type) {
    case PrimitiveType::sphere: {
      const double r = o.half_extent.x();
      const Point3 c = o.base + Eigen::Vector3d(0, 0, r);
      const Eigen::Vector3d oc = origin - c;
      return smallest_root(dir.dot(dir), oc.dot(dir), oc.dot(oc) - r * r);
    }
    case PrimitiveType::box: {
      // Ray in the box frame: rotate by -yaw about the vertical through the box centre.
      const Point3 c = o.base + Eigen::Vector3d(0, 0, o.half_extent.z());
      const double cs = std::cos(o.yaw);
      const double sn = std::sin(o.yaw);
      const Eigen::Vector3d p = origin - c;
      const Eigen::Vector3d lo(cs * p.x() + sn * p.y(), -sn * p.x() + cs * p.y(), p.z());
      const Eigen::Vector3d ld(cs * dir.x() + sn * dir.y(), -sn * dir.x() + cs * dir.y(),
                               dir.z());
      double tmin = -std::numeric_limits<double>::infinity();
      double tmax = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        const double h = o.half_extent[k];
        if (std::abs(ld[k]) < 1e-15) {
          if (lo[k] < -h || lo[k] > h) return std::nullopt;
          continue;
        }
        double t0 = (-h - lo[k]) / ld[k];
        double t1 = (h - lo[k]) / ld[k];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
      }
      if (tmin > tmax) return std::nullopt;
      if (tmin > eps) return tmin;
      if (tmax > eps) return tmax;
      return std::nullopt;
    }
    case PrimitiveType::cylinder: {
      const double r = o.half_extent.x();
      const double z0 = o.base.z();
      const double z1 = z0 + o.height;
      std::optional<double> best;
      const auto consider = [&](double t) {
        if (t > eps && (!best || t < *best)) best = t;
      };
      const double ox = origin.x() - o.base.x();
      const double oy = origin.y() - o.base.y();
      const double a = dir.x() * dir.x() + dir.y() * dir.y();
      if (a > 0.0) {
        const double b = ox * dir.x() + oy * dir.y();
        const double c = ox * ox + oy * oy - r * r;
        const double disc = b * b - a * c;
        if (disc >= 0.0) {
          const double s = std::sqrt(disc);
          for (const double t : {(-b - s) / a, (-b + s) / a}) {
            const double z = origin.z() + t * dir.z();
            if (z >= z0 && z <= z1) consider(t);
          }
        }
      }
      if (dir.z() != 0.0) {
        for (const double zc : {z0, z1}) {
          const double t = (zc - origin.z()) / dir.z();
          const double x = ox + t * dir.x();
          const double y = oy + t * dir.y();
          if (x * x + y * y <= r * r) consider(t);
        }
      }
      return best;
    }
  }
  return std::nullopt;
}

// Azimuth of a surface point about the object's vertical axis, in [0, 2pi).
double azimuth(const SceneObject& o, const Point3& p) {
  double a = std::atan2(p.y() - o.base.y(), p.x() - o.base.x()) - o.dropout_phase;
  a = std::fmod(a, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

Rgb color_of(const SynthScene& scene, std::uint32_t surface) {
  if (surface == 0) return {0, 0, 0};
  if (surface == scene.floor_surface()) return {128, 128, 120};
  return scene.objects[surface - 1].color;
}

}  // namespace

std::string class_name(std::uint32_t class_id) {
  if (class_id < kClassNameCount) return kClassNames[class_id];
  return "class_" + std::to_string(class_id);
}

double SceneObject::footprint_radius() const {
  if (type == PrimitiveType::box) {
    return std::hypot(half_extent.x(), half_extent.y());
  }
  return half_extent.x();
}

void SceneSpec::validate() const {
  if (min_objects < 1 || max_objects < min_objects) {
    throw UsageError("object count range must satisfy 1 <= min <= max");
  }
  if (primitives.empty()) throw UsageError("no primitive types enabled");
  if (!(room_size > 0.0) || !(placement_radius > 0.0) || placement_radius * 2 > room_size) {
    throw UsageError("placement radius must be positive and fit in the room");
  }
  if (!(reflective_probability >= 0.0 && reflective_probability <= 1.0)) {
    throw UsageError("reflective probability must lie in [0, 1]");
  }
  if (!(dropout_fraction >= 0.0 && dropout_fraction <= 1.0)) {
    throw UsageError("dropout fraction must lie in [0, 1]");
  }
  if (frame_count < 1) throw UsageError("frame count must be positive");
  if (!(orbit_radius > placement_radius)) throw UsageError("orbit must enclose the objects");
  if (image_width < 2 || image_height < 2 || !(focal > 0.0)) {
    throw UsageError("invalid image size or focal length");
  }
  if (rotation_jitter_deg < 0.0 || translation_jitter < 0.0 || mask_erosion < 0) {
    throw UsageError("jitter and erosion must be nonnegative");
  }
  if (!(cloud_voxel > 0.0)) throw UsageError("cloud voxel must be positive");
  if (class_count < 1) throw UsageError("class count must be positive");
  if (feature_dim < static_cast<std::uint32_t>(class_count)) {
    throw UsageError("feature dimension must be at least the class count");
  }
}

std::string SceneSpec::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["room_size"] = room_size;
  j["placement_radius"] = placement_radius;
  j["min_objects"] = min_objects;
  j["max_objects"] = max_objects;
  auto prims = ordered_json::array();
  for (const auto p : primitives) prims.push_back(to_string(p));
  j["primitives"] = prims;
  j["reflective_probability"] = reflective_probability;
  j["dropout_fraction"] = dropout_fraction;
  j["dropout_mode"] = to_string(dropout_mode);
  j["frame_count"] = frame_count;
  j["orbit_radius"] = orbit_radius;
  j["orbit_height"] = orbit_height;
  j["height_variation"] = height_variation;
  j["image_width"] = image_width;
  j["image_height"] = image_height;
  j["focal"] = focal;
  j["rotation_jitter_deg"] = rotation_jitter_deg;
  j["translation_jitter"] = translation_jitter;
  j["mask_erosion"] = mask_erosion;
  j["cloud_voxel"] = cloud_voxel;
  j["class_count"] = class_count;
  j["feature_dim"] = feature_dim;
  return j.dump(2);
}

SceneSpec SceneSpec::from_json(const std::string& text) {
  SceneSpec s;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.contains("spec")) j = j.at("spec");
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "room_size") s.room_size = v.get<double>();
      else if (key == "placement_radius") s.placement_radius = v.get<double>();
      else if (key == "min_objects") s.min_objects = v.get<int>();
      else if (key == "max_objects") s.max_objects = v.get<int>();
      else if (key == "primitives") {
        s.primitives.clear();
        for (const auto& p : v) s.primitives.push_back(primitive_from(p.get<std::string>()));
      } else if (key == "reflective_probability") s.reflective_probability = v.get<double>();
      else if (key == "dropout_fraction") s.dropout_fraction = v.get<double>();
      else if (key == "dropout_mode") s.dropout_mode = dropout_from(v.get<std::string>());
      else if (key == "frame_count") s.frame_count = v.get<int>();
      else if (key == "orbit_radius") s.orbit_radius = v.get<double>();
      else if (key == "orbit_height") s.orbit_height = v.get<double>();
      else if (key == "height_variation") s.height_variation = v.get<double>();
      else if (key == "image_width") s.image_width = v.get<int>();
      else if (key == "image_height") s.image_height = v.get<int>();
      else if (key == "focal") s.focal = v.get<double>();
      else if (key == "rotation_jitter_deg") s.rotation_jitter_deg = v.get<double>();
      else if (key == "translation_jitter") s.translation_jitter = v.get<double>();
      else if (key == "mask_erosion") s.mask_erosion = v.get<int>();
      else if (key == "cloud_voxel") s.cloud_voxel = v.get<double>();
      else if (key == "class_count") s.class_count = v.get<int>();
      else if (key == "feature_dim") s.feature_dim = v.get<std::uint32_t>();
      else throw UsageError("unknown scene spec key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("scene spec: ") + e.what());
  }
  s.validate();
  return s;
}

SynthScene layout_scene(const SceneSpec& spec) {
  spec.validate();
  SynthScene scene;
  scene.spec = spec;
  scene.intrinsics = {spec.focal,
                      spec.focal,
                      spec.image_width / 2.0,
                      spec.image_height / 2.0,
                      spec.image_width,
                      spec.image_height};

  SynthRng rng(mix(spec.seed, 1));
  const auto n = static_cast<int>(rng.integer(spec.min_objects, spec.max_objects));
  constexpr double kGap = 0.1;
  constexpr int kAttempts = 2000;
  for (int i = 0; i < n; ++i) {
    SceneObject o;
    o.type = spec.primitives[static_cast<std::size_t>(
        rng.integer(0, static_cast<std::int64_t>(spec.primitives.size()) - 1))];
    switch (o.type) {
      case PrimitiveType::box:
        o.half_extent = {rng.uniform(0.1, 0.22), rng.uniform(0.1, 0.22), rng.uniform(0.1, 0.25)};
        o.yaw = rng.uniform(0.0, std::numbers::pi);
        break;
      case PrimitiveType::sphere:
        o.half_extent = {rng.uniform(0.1, 0.2), 0, 0};
        break;
      case PrimitiveType::cylinder:
        o.half_extent = {rng.uniform(0.1, 0.18), 0, 0};
        o.height = rng.uniform(0.2, 0.55);
        break;
    }
    o.class_id = static_cast<std::uint32_t>(rng.integer(0, spec.class_count - 1));
    o.reflective = rng.uniform() < spec.reflective_probability;
    o.dropout_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    o.color = {static_cast<std::uint8_t>(rng.integer(30, 255)),
               static_cast<std::uint8_t>(rng.integer(30, 255)),
               static_cast<std::uint8_t>(rng.integer(30, 255))};
    const double fr = o.footprint_radius();
    bool placed = false;
    for (int a = 0; a < kAttempts && !placed; ++a) {
      const double reach = spec.placement_radius - fr;
      if (reach <= 0.0) break;
      const double x = rng.uniform(-reach, reach);
      const double y = rng.uniform(-reach, reach);
      if (std::hypot(x, y) > reach) continue;
      placed = true;
      for (const auto& other : scene.objects) {
        const double d = std::hypot(x - other.base.x(), y - other.base.y());
        if (d < fr + other.footprint_radius() + kGap) {
          placed = false;
          break;
        }
      }
      if (placed) o.base = {x, y, kFloorZ};
    }
    if (!placed) {
      throw DataError("could not place object " + std::to_string(i + 1) + " without overlap");
    }
    scene.objects.push_back(o);
  }

  const Point3 target(0, 0, 0.15);
  for (int t = 0; t < spec.frame_count; ++t) {
    const double ang = 2.0 * std::numbers::pi * t / spec.frame_count;
    const double h = spec.orbit_height + spec.height_variation * std::sin(2.0 * ang);
    const Point3 eye(spec.orbit_radius * std::cos(ang), spec.orbit_radius * std::sin(ang), h);
    scene.poses.push_back(look_at(eye, target));
  }
  return scene;
}

std::optional<RayHit> cast_ray(const SynthScene& scene, const Point3& origin,
                               const Eigen::Vector3d& dir) {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto t = hit_object(scene.objects[i], origin, dir);
    if (t && (!best || *t < best->t)) best = RayHit{*t, static_cast<std::uint32_t>(i + 1), {}};
  }
  if (dir.z() < 0.0) {
    const double t = (kFloorZ - origin.z()) / dir.z();
    const Point3 p = origin + t * dir;
    const double half = scene.spec.room_size / 2.0;
    if (t > 1e-9 && std::abs(p.x()) <= half && std::abs(p.y()) <= half &&
        (!best || t < best->t)) {
      best = RayHit{t, scene.floor_surface(), {}};
    }
  }
  if (best) best->point = origin + best->t * dir;
  return best;
}

RenderedFrame render_frame(const SynthScene& scene, std::uint32_t t) {
  if (t >= scene.poses.size()) throw UsageError("frame index out of range");
  const auto& K = scene.intrinsics;
  const Pose& T = scene.poses[t];
  const Eigen::Matrix3d R = T.rotation();
  const Point3 eye = T.translation();
  const int W = K.width;
  const int H = K.height;

  RenderedFrame f{DepthImage(W, H), DepthImage(W, H), Grid<std::uint32_t>(W, H),
                  MaskLabelImage(W, H), RgbImage(W, H), T};
  SynthRng rng(mix(scene.spec.seed, 1000 + t));
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      // Camera-frame direction with unit z, so the hit parameter equals camera depth.
      const Eigen::Vector3d dc((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
      const auto hit = cast_ray(scene, eye, R * dc);
      if (!hit) continue;
      const double mm = std::round(hit->t * 1000.0);
      if (mm < 1.0 || mm > 65535.0) continue;
      const auto d = static_cast<std::uint16_t>(mm);
      f.exact_depth(u, v) = d;
      f.surfaces(u, v) = hit->surface;
      f.color(u, v) = color_of(scene, hit->surface);
      bool dropped = false;
      if (hit->surface != scene.floor_surface()) {
        const auto& o = scene.objects[hit->surface - 1];
        if (o.reflective && scene.spec.dropout_fraction > 0.0) {
          if (scene.spec.dropout_mode == DropoutMode::pixel) {
            dropped = rng.uniform() < scene.spec.dropout_fraction;
          } else {
            dropped = azimuth(o, hit->point) < 2.0 * std::numbers::pi * scene.spec.dropout_fraction;
          }
        }
      }
      f.raw_depth(u, v) = dropped ? 0 : d;
    }
  }

  const int e = scene.spec.mask_erosion;
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const std::uint32_t s = f.surfaces(u, v);
      bool keep = s != 0;
      for (int dv = -e; dv <= e && keep; ++dv) {
        for (int du = -e; du <= e && keep; ++du) {
          const int uu = u + du;
          const int vv = v + dv;
          if (uu < 0 || vv < 0 || uu >= W || vv >= H) continue;
          keep = f.surfaces(uu, vv) == s;
        }
      }
      f.masks(u, v) = keep ? static_cast<std::uint16_t>(s) : 0;
    }
  }

  if (scene.spec.rotation_jitter_deg > 0.0 || scene.spec.translation_jitter > 0.0) {
    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-12) axis = Eigen::Vector3d::UnitZ();
    const double angle = rng.normal() * scene.spec.rotation_jitter_deg * std::numbers::pi / 180.0;
    const Eigen::Matrix3d Rj = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    const Eigen::Vector3d dt(rng.normal(), rng.normal(), rng.normal());
    // Re-orthonormalize so the written pose passes validation after the product.
    Eigen::Matrix3d Rw = Rj * R;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(Rw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Rw = svd.matrixU() * svd.matrixV().transpose();
    f.written_pose =
        Pose::from_rotation_translation(Rw, eye + scene.spec.translation_jitter * dt);
  }
  return f;
}

GeneratedScene generate(const SceneSpec& spec, const fs::path& out_dir) {
  const SynthScene scene = layout_scene(spec);
  const std::size_t n_objects = scene.objects.size();
  if (scene.objects.size() + 1 > 65535) throw UsageError("too many objects for 16-bit masks");

  fs::create_directories(out_dir / "depth");
  fs::create_directories(out_dir / "pose");
  fs::create_directories(out_dir / "mask");
  fs::create_directories(out_dir / "color");
  write_intrinsics(out_dir / "intrinsics.txt", scene.intrinsics);

  std::vector<RenderedFrame> frames(scene.poses.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(frames.size()); ++t) {
    frames[static_cast<std::size_t>(t)] = render_frame(scene, static_cast<std::uint32_t>(t));
  }

  // Surface hits from every frame, binned into cells; each cell keeps the centroid and its
  // majority surface (ties: smaller surface id).
  struct Cell {
    Eigen::Vector3d sum{0, 0, 0};
    std::size_t count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> votes;
  };
  std::vector<Cell> cells;
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> cell_of;
  char name[32];
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& f = frames[t];
    const auto& T = scene.poses[t];
    for (int v = 0; v < scene.intrinsics.height; ++v) {
      for (int u = 0; u < scene.intrinsics.width; ++u) {
        const std::uint32_t s = f.surfaces(u, v);
        if (s == 0) continue;
        const Eigen::Vector3d dc((u - scene.intrinsics.cx) / scene.intrinsics.fx,
                                 (v - scene.intrinsics.cy) / scene.intrinsics.fy, 1.0);
        const auto hit = cast_ray(scene, T.translation(), T.rotation() * dc);
        if (!hit) continue;
        const VoxelKey key = voxel_of(hit->point, spec.cloud_voxel);
        auto [it, fresh] = cell_of.try_emplace(key, cells.size());
        if (fresh) cells.emplace_back();
        Cell& c = cells[it->second];
        c.sum += hit->point;
        ++c.count;
        auto vote = std::find_if(c.votes.begin(), c.votes.end(),
                                 [&](const auto& p) { return p.first == s; });
        if (vote == c.votes.end()) {
          c.votes.emplace_back(s, 1);
        } else {
          ++vote->second;
        }
      }
    }
    std::snprintf(name, sizeof name, "depth_%06zu.png", t);
    write_png16(out_dir / "depth" / name, f.raw_depth);
    std::snprintf(name, sizeof name, "mask_%06zu.png", t);
    write_png16(out_dir / "mask" / name, f.masks);
    std::snprintf(name, sizeof name, "color_%06zu.png", t);
    write_png_rgb(out_dir / "color" / name, f.color);
    std::snprintf(name, sizeof name, "pose_%06zu.txt", t);
    write_pose(out_dir / "pose" / name, f.written_pose);
  }

  PlyVertexData cloud;
  PlyVertexData gt;
  auto& ids = gt.int_properties["instance_id"];
  for (const auto& c : cells) {
    std::uint32_t best = 0;
    std::uint32_t best_n = 0;
    for (const auto& [s, k] : c.votes) {
      if (k > best_n || (k == best_n && s < best)) {
        best = s;
        best_n = k;
      }
    }
    const Point3 p = c.sum / static_cast<double>(c.count);
    cloud.points.push_back(p);
    cloud.colors.push_back(color_of(scene, best));
    gt.points.push_back(p);
    ids.push_back(best == scene.floor_surface() ? 0 : best);
  }
  write_ply(out_dir / "cloud.ply", cloud);
  write_ply(out_dir / "gt_instances.ply", gt);

  ordered_json doc;
  doc["spec"] = ordered_json::parse(spec.to_json());
  auto objs = ordered_json::array();
  for (std::size_t i = 0; i < n_objects; ++i) {
    const auto& o = scene.objects[i];
    ordered_json j;
    j["instance_id"] = i + 1;
    j["type"] = to_string(o.type);
    j["class_id"] = o.class_id;
    j["class_name"] = class_name(o.class_id);
    j["base"] = {o.base.x(), o.base.y(), o.base.z()};
    j["yaw"] = o.yaw;
    j["half_extent"] = {o.half_extent.x(), o.half_extent.y(), o.half_extent.z()};
    j["height"] = o.height;
    j["reflective"] = o.reflective;
    j["color"] = {o.color.r, o.color.g, o.color.b};
    objs.push_back(std::move(j));
  }
  doc["objects"] = std::move(objs);
  write_text_file(out_dir / "spec.json", doc.dump(2) + "\n");

  FeatureFile queries;
  queries.dim = spec.feature_dim;
  for (auto& q : class_queries(static_cast<std::uint32_t>(spec.class_count), spec.feature_dim)) {
    queries.records.push_back({QueryKey{std::move(q.label)}, std::move(q.vector)});
  }
  write_features(out_dir / "queries.ovft", queries);

  return {scene, cells.size()};
}

std::vector<FeatureRecord> synth_features(std::span<const std::uint32_t> labels,
                                          const std::map<std::uint32_t, std::uint32_t>& class_of,
                                          double noise_sigma, std::uint32_t dim,
                                          std::uint64_t seed) {
  if (noise_sigma < 0.0) throw UsageError("noise sigma must be nonnegative");
  for (const auto& [id, cls] : class_of) {
    if (cls >= dim) throw UsageError("feature dimension must exceed every class id");
  }
  std::vector<std::uint32_t> ids(labels.begin(), labels.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  SynthRng rng(mix(seed, 7));
  std::vector<FeatureRecord> out;
  for (const auto id : ids) {
    if (id == 0) continue;
    const auto it = class_of.find(id);
    if (it == class_of.end()) throw DataError("no class for instance " + std::to_string(id));
    std::vector<float> v(dim, 0.0f);
    std::vector<double> acc(dim, 0.0);
    acc[it->second] = 1.0;
    if (noise_sigma > 0.0) {
      for (auto& x : acc) x += noise_sigma * rng.normal();
    }
    double norm = 0.0;
    for (const auto x : acc) norm += x * x;
    norm = std::sqrt(norm);
    for (std::uint32_t k = 0; k < dim; ++k) v[k] = static_cast<float>(acc[k] / norm);
    out.push_back({InstanceKey{id}, std::move(v)});
  }
  return out;
}

QuerySet class_queries(std::uint32_t class_count, std::uint32_t dim) {
  if (dim < class_count) throw UsageError("feature dimension must be at least the class count");
  QuerySet qs;
  for (std::uint32_t c = 0; c < class_count; ++c) {
    std::vector<float> v(dim, 0.0f);
    v[c] = 1.0f;
    qs.push_back({class_name(c), std::move(v)});
  }
  return qs;
}

std::map<std::uint32_t, std::uint32_t> read_object_classes(const fs::path& spec_json) {
  std::map<std::uint32_t, std::uint32_t> out;
  try {
    const auto doc = nlohmann::json::parse(read_text_file(spec_json));
    for (const auto& o : doc.at("objects")) {
      out[o.at("instance_id").get<std::uint32_t>()] = o.at("class_id").get<std::uint32_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(spec_json.string() + ": " + e.what());
  }
  return out;
}

}  // namespace ovmap
