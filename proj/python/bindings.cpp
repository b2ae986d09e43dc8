#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "ovmap/camera.hpp"
#include "ovmap/cloud.hpp"
#include "ovmap/depth.hpp"
#include "ovmap/errors.hpp"
#include "ovmap/evaluation.hpp"
#include "ovmap/features.hpp"
#include "ovmap/io.hpp"
#include "ovmap/mask_merge.hpp"
#include "ovmap/parallel.hpp"
#include "ovmap/pipeline.hpp"
#include "ovmap/postprocess.hpp"
#include "ovmap/scene_synth.hpp"
#include "ovmap/segmentation.hpp"

namespace py = pybind11;
using namespace ovmap;

namespace {

using PointArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using DepthArray = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;

std::vector<Point3> to_points(const PointArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw UsageError("points must have shape (N, 3)");
  std::vector<Point3> out(static_cast<std::size_t>(a.shape(0)));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = {r(i, 0), r(i, 1), r(i, 2)};
  return out;
}

PointArray from_points(const std::vector<Point3>& pts) {
  PointArray a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < 3; ++k) w(i, k) = pts[i][k];
  }
  return a;
}

DepthImage to_depth(const DepthArray& a) {
  if (a.ndim() != 2) throw UsageError("depth must be a 2D array");
  DepthImage d(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), d.pixels().begin());
  return d;
}

DepthArray from_depth(const DepthImage& d) {
  DepthArray a({static_cast<py::ssize_t>(d.height()), static_cast<py::ssize_t>(d.width())});
  std::copy(d.pixels().begin(), d.pixels().end(), a.mutable_data());
  return a;
}

Pose to_pose(const Eigen::Matrix4d& m) { return Pose(m); }

py::object json_to_py(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_ovmap, m) {
  m.doc() = "Open-vocabulary 3D instance mapping core";

  static py::exception<UsageError> usage_exc(m, "UsageError", PyExc_ValueError);
  static py::exception<DataError> data_exc(m, "DataError", PyExc_RuntimeError);
  static py::exception<InvariantError> invariant_exc(m, "InvariantError", PyExc_AssertionError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const UsageError& e) {
      PyErr_SetString(usage_exc.ptr(), e.what());
    } catch (const DataError& e) {
      PyErr_SetString(data_exc.ptr(), e.what());
    } catch (const InvariantError& e) {
      PyErr_SetString(invariant_exc.ptr(), e.what());
    }
  });

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int w, int h) {
             CameraIntrinsics K{fx, fy, cx, cy, w, h};
             K.validate();
             return K;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"))
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height)
      .def("__repr__", [](const CameraIntrinsics& K) {
        return "CameraIntrinsics(fx=" + std::to_string(K.fx) + ", fy=" + std::to_string(K.fy) +
               ", cx=" + std::to_string(K.cx) + ", cy=" + std::to_string(K.cy) +
               ", width=" + std::to_string(K.width) + ", height=" + std::to_string(K.height) + ")";
      });

  m.def(
      "back_project",
      [](double u, double v, std::uint16_t d, const CameraIntrinsics& K,
         const Eigen::Matrix4d& pose, double scale) -> std::optional<Eigen::Vector3d> {
        return back_project(u, v, d, K, to_pose(pose), scale);
      },
      py::arg("u"), py::arg("v"), py::arg("depth"), py::arg("K"),
      py::arg("pose") = Eigen::Matrix4d::Identity().eval(), py::arg("scale") = kDefaultDepthScale,
      "World point of a pixel with raw depth, or None for depth 0.");

  m.def(
      "project",
      [](const Eigen::Vector3d& p, const CameraIntrinsics& K, const Eigen::Matrix4d& pose,
         double scale) -> std::optional<std::tuple<int, int, std::uint16_t>> {
        const auto px = project(p, K, to_pose(pose), scale);
        if (!px) return std::nullopt;
        return std::make_tuple(px->u, px->v, px->depth);
      },
      py::arg("point"), py::arg("K"), py::arg("pose") = Eigen::Matrix4d::Identity().eval(),
      py::arg("scale") = kDefaultDepthScale, "(u, v, depth) or None when out of view.");

  m.def(
      "voxel_downsample",
      [](const PointArray& pts, double voxel) {
        return from_points(voxel_downsample(to_points(pts), voxel).points);
      },
      py::arg("points"), py::arg("voxel"));

  m.def(
      "render_synthetic_depth",
      [](const PointArray& pts, const CameraIntrinsics& K, const Eigen::Matrix4d& pose,
         double scale, int splat_radius, double tolerance) {
        WorkingCloud c;
        c.points = to_points(pts);
        return from_depth(render_synthetic_depth(c, K, to_pose(pose), scale,
                                                 {splat_radius, tolerance}));
      },
      py::arg("points"), py::arg("K"), py::arg("pose") = Eigen::Matrix4d::Identity().eval(),
      py::arg("scale") = kDefaultDepthScale, py::arg("splat_radius") = 1,
      py::arg("z_buffer_tolerance") = 0.0);

  m.def(
      "supplement_depth",
      [](const DepthArray& raw, const DepthArray& synth, bool prefer_raw) {
        return from_depth(supplement_depth(to_depth(raw), to_depth(synth), {prefer_raw}));
      },
      py::arg("raw"), py::arg("synth"), py::arg("prefer_raw_when_synth_missing") = false);

  m.def("select_frames", &select_frames, py::arg("total"), py::arg("stride"));

  m.def(
      "mask_score",
      [](std::size_t pixels, std::size_t points, std::size_t frame_pixels,
         std::size_t cloud_points, double alpha, double beta, bool normalized) {
        return mask_score(pixels, points, frame_pixels, cloud_points, {alpha, beta, normalized});
      },
      py::arg("pixel_count"), py::arg("point_count"), py::arg("frame_pixels"),
      py::arg("cloud_points"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
      py::arg("normalized") = true);

  m.def(
      "overlap_ratio",
      [](std::vector<std::uint32_t> a, std::vector<std::uint32_t> b) {
        InstanceMask3D ma, mb;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        ma.points = std::move(a);
        mb.points = std::move(b);
        return overlap_ratio(ma, mb);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "hierarchical_merge",
      [](const std::vector<std::vector<std::vector<std::uint32_t>>>& frames, double threshold) {
        std::vector<MaskSet> sets;
        GroupId next = 1;
        for (const auto& f : frames) {
          std::vector<InstanceMask3D> masks;
          for (auto pts : f) {
            std::sort(pts.begin(), pts.end());
            pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
            InstanceMask3D mk;
            mk.group_id = next++;
            mk.points = std::move(pts);
            masks.push_back(std::move(mk));
          }
          sets.push_back(MaskSet::from_masks(std::move(masks)));
        }
        MergeConfig cfg;
        cfg.or_threshold = threshold;
        const auto merged = hierarchical_merge(std::move(sets), cfg);
        std::vector<std::vector<std::uint32_t>> out;
        for (const auto& mk : merged.masks) out.push_back(mk.points);
        return out;
      },
      py::arg("frames"), py::arg("or_threshold") = 0.3,
      "Merges per-frame lists of index sets; returns the merged sets largest first.");

  m.def(
      "felzenszwalb_segment",
      [](std::size_t n, const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges,
         double k, std::size_t min_size) {
        SegmentGraph g;
        g.node_count = n;
        for (const auto& [a, b, w] : edges) {
          g.edges.push_back({std::min(a, b), std::max(a, b), w});
        }
        std::vector<std::vector<std::uint32_t>> out;
        for (auto& s : felzenszwalb_segment(g, k, min_size)) out.push_back(std::move(s.points));
        return out;
      },
      py::arg("node_count"), py::arg("edges"), py::arg("k"), py::arg("min_size") = 1,
      "Edges are (a, b, weight); their list position breaks weight ties.");

  m.def(
      "dbscan",
      [](const PointArray& pts, double eps, std::size_t min_pts) {
        const auto labels = dbscan(to_points(pts), eps, min_pts);
        return py::array_t<std::int32_t>(static_cast<py::ssize_t>(labels.size()), labels.data());
      },
      py::arg("points"), py::arg("eps"), py::arg("min_pts"));

  m.def(
      "instance_iou",
      [](std::vector<std::uint32_t> a, std::vector<std::uint32_t> b) {
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return instance_iou(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "evaluate",
      [](const std::vector<std::uint32_t>& pred, const std::vector<std::uint32_t>& gt) {
        return json_to_py(evaluate(pred, gt).to_json());
      },
      py::arg("pred"), py::arg("gt"), "Per-point instance ids; returns the AP report as a dict.");

  m.def(
      "write_features",
      [](const std::filesystem::path& path, const std::vector<std::uint32_t>& ids,
         const std::vector<std::vector<float>>& vectors) {
        if (ids.size() != vectors.size()) throw UsageError("ids and vectors differ in length");
        FeatureFile f;
        f.dim = vectors.empty() ? 0 : static_cast<std::uint32_t>(vectors[0].size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
          f.records.push_back({InstanceKey{ids[i]}, vectors[i]});
        }
        write_features(path, f);
      },
      py::arg("path"), py::arg("instance_ids"), py::arg("vectors"),
      "Writes instance-keyed records.");

  m.def(
      "read_features",
      [](const std::filesystem::path& path) {
        const auto f = read_features(path);
        py::list out;
        for (const auto& r : f.records) {
          py::dict d;
          std::visit(
              [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, InstanceKey>) {
                  d["kind"] = "instance";
                  d["instance_id"] = k.id;
                } else if constexpr (std::is_same_v<K, FrameMaskKey>) {
                  d["kind"] = "frame_mask";
                  d["frame"] = k.frame;
                  d["mask_id"] = k.mask_id;
                } else {
                  d["kind"] = "query";
                  d["label"] = k.label;
                }
              },
              r.key);
          d["vector"] = r.vector;
          out.append(d);
        }
        return out;
      },
      py::arg("path"));

  m.def(
      "generate_scene",
      [](const std::filesystem::path& out, const std::string& spec_json) {
        const auto spec = spec_json.empty() ? SceneSpec{} : SceneSpec::from_json(spec_json);
        py::gil_scoped_release release;
        const auto g = generate(spec, out);
        return std::make_tuple(g.scene.objects.size(), g.cloud_points);
      },
      py::arg("out_dir"), py::arg("spec_json") = "",
      "Writes a synthetic scene; returns (object count, cloud points).");

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& scene_dir, const std::filesystem::path& out_dir,
         const std::string& config_json) {
        const auto cfg =
            config_json.empty() ? PipelineConfig{} : PipelineConfig::from_json(config_json);
        std::string manifest;
        {
          py::gil_scoped_release release;
          const auto scene = SceneDirectory::open(scene_dir);
          const auto result = run_pipeline(scene, cfg);
          write_pipeline_outputs(scene, cfg, result, out_dir);
        }
        return json_to_py(read_text_file(out_dir / "run_manifest.json"));
      },
      py::arg("scene_dir"), py::arg("out_dir"), py::arg("config_json") = "",
      "Runs every stage and writes the outputs; returns the run manifest.");

  m.def("set_thread_limit", &set_thread_limit, py::arg("threads"));
}
