// Command-line front end: scene synthesis, the full pipeline, stage-level tools, query and eval.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ovmap/depth.hpp"
#include "ovmap/errors.hpp"
#include "ovmap/evaluation.hpp"
#include "ovmap/features.hpp"
#include "ovmap/instance.hpp"
#include "ovmap/io.hpp"
#include "ovmap/mask_merge.hpp"
#include "ovmap/parallel.hpp"
#include "ovmap/pipeline.hpp"
#include "ovmap/postprocess.hpp"
#include "ovmap/scene_synth.hpp"
#include "ovmap/segmentation.hpp"

namespace fs = std::filesystem;
using namespace ovmap;
using nlohmann::ordered_json;

namespace {

// Pipeline flags are applied on top of an optional config file, so each flag only takes effect
// when it was actually given.
class ConfigFlags {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& flag, std::function<T&(PipelineConfig&)> field,
           const std::string& help) {
    auto value = std::make_shared<T>(field(defaults_));
    CLI::Option* opt;
    if constexpr (std::is_same_v<T, bool>) {
      opt = app->add_flag(flag, *value, help);
    } else {
      opt = app->add_option(flag, *value, help)->capture_default_str();
    }
    appliers_.push_back([opt, value, field](PipelineConfig& c) {
      if (opt->count() > 0) field(c) = *value;
    });
  }

  void add_depth_mode(CLI::App* app) {
    auto value = std::make_shared<std::string>("supplemented");
    auto* opt = app->add_option("--depth-mode", *value, "raw, synthetic or supplemented")
                    ->check(CLI::IsMember({"raw", "synthetic", "supplemented"}))
                    ->capture_default_str();
    appliers_.push_back([opt, value](PipelineConfig& c) {
      if (opt->count() > 0) c.depth_mode = depth_mode_from(*value);
    });
  }

  PipelineConfig resolve(const std::string& config_file) const {
    PipelineConfig c;
    if (!config_file.empty()) c = PipelineConfig::from_json(read_text_file(config_file));
    for (const auto& f : appliers_) f(c);
    c.validate();
    return c;
  }

 private:
  PipelineConfig defaults_;
  std::vector<std::function<void(PipelineConfig&)>> appliers_;
};

#define FIELD(T, name) std::function<T&(PipelineConfig&)>([](PipelineConfig& c) -> T& { return c.name; })

void add_geometry_flags(CLI::App* app, ConfigFlags& f) {
  f.add<double>(app, "--voxel-size", FIELD(double, voxel_size), "working cloud voxel edge (m)");
  f.add<double>(app, "--depth-scale", FIELD(double, depth_scale), "depth units per metre");
}

void add_lift_flags(CLI::App* app, ConfigFlags& f) {
  f.add<double>(app, "--r-snap", FIELD(double, r_snap), "snap radius (m)");
  f.add<std::size_t>(app, "--min-mask-points", FIELD(std::size_t, min_mask_points),
                     "drop lifted masks smaller than this");
  f.add<double>(app, "--dedup-voxel", FIELD(double, dedup_voxel),
                "thinning cell for back-projected points (m, 0 = off)");
  f.add<double>(app, "--alpha", FIELD(double, alpha), "score weight on pixel share");
  f.add<double>(app, "--beta", FIELD(double, beta), "score weight on point share");
  f.add<bool>(app, "--raw-score-counts", FIELD(bool, raw_score_counts),
              "weight raw counts instead of shares");
  f.add_depth_mode(app);
  f.add<int>(app, "--splat-radius", FIELD(int, splat_radius), "synthetic depth splat (px)");
  f.add<double>(app, "--z-buffer-tolerance", FIELD(double, z_buffer_tolerance),
                "synthetic depth averaging band (m)");
  f.add<bool>(app, "--prefer-raw-when-synth-missing", FIELD(bool, prefer_raw_when_synth_missing),
              "keep raw depth where the synthetic render is empty");
}

void add_segment_flags(CLI::App* app, ConfigFlags& f) {
  f.add<int>(app, "--normal-k", FIELD(int, normal_k), "neighbours for normal estimation");
  f.add<int>(app, "--k-graph", FIELD(int, k_graph), "neighbours per node in the segment graph");
  f.add<double>(app, "--k-fz", FIELD(double, k_fz), "graph segmentation scale");
  f.add<std::size_t>(app, "--min-size", FIELD(std::size_t, min_size), "minimum segment size");
}

void add_post_flags(CLI::App* app, ConfigFlags& f) {
  f.add<double>(app, "--dbscan-eps", FIELD(double, dbscan_eps), "DBSCAN radius (m)");
  f.add<std::size_t>(app, "--dbscan-min-pts", FIELD(std::size_t, dbscan_min_pts),
                     "DBSCAN core threshold");
  f.add<std::size_t>(app, "--min-instance-points", FIELD(std::size_t, min_instance_points),
                     "minimum size of split-off instances");
  f.add<double>(app, "--knn-fill-radius", FIELD(double, knn_fill_radius),
                "label fill radius (m)");
}

void add_all_flags(CLI::App* app, ConfigFlags& f) {
  add_geometry_flags(app, f);
  add_lift_flags(app, f);
  add_segment_flags(app, f);
  add_post_flags(app, f);
  f.add<std::size_t>(app, "--stride", FIELD(std::size_t, stride), "use every n-th frame");
  f.add<double>(app, "--or-threshold", FIELD(double, or_threshold), "merge overlap ratio");
  f.add<bool>(app, "--postprocess", FIELD(bool, postprocess), "run split/filter and fill");
  f.add<double>(app, "--crop-pad", FIELD(double, crop_pad), "crop padding per side (fraction)");
}

#undef FIELD

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

fs::path sidecar_of(const fs::path& ply) {
  auto p = ply;
  return p.replace_extension(".json");
}

// Instance maps written by other tools (e.g. ground truth) may come without records.
fs::path existing_sidecar(const fs::path& ply) {
  const auto p = sidecar_of(ply);
  return fs::exists(p) ? p : fs::path{};
}

WorkingCloud cloud_from_points(std::vector<Point3> points) {
  WorkingCloud c;
  c.points = std::move(points);
  c.index = KdTree(c.points);
  return c;
}

// --- subcommands -----------------------------------------------------------------------------

struct SynthArgs {
  SceneSpec spec;
  std::string out;
  std::string config;
  std::vector<std::string> primitives;
  std::string dropout_mode = "pixel";
  double feature_noise = 0.0;
};

void run_synth(SynthArgs& a, CLI::App* app) {
  SceneSpec spec = a.spec;
  if (!a.config.empty()) spec = SceneSpec::from_json(read_text_file(a.config));
  // Flags given explicitly win over the config file.
  const SceneSpec& flags = a.spec;
  const auto given = [&](const char* name) { return app->get_option(name)->count() > 0; };
  if (given("--seed")) spec.seed = flags.seed;
  if (given("--min-objects")) spec.min_objects = flags.min_objects;
  if (given("--max-objects")) spec.max_objects = flags.max_objects;
  if (given("--frames")) spec.frame_count = flags.frame_count;
  if (given("--reflective-probability")) spec.reflective_probability = flags.reflective_probability;
  if (given("--dropout")) spec.dropout_fraction = flags.dropout_fraction;
  if (given("--dropout-mode")) spec.dropout_mode = a.dropout_mode == "patch" ? DropoutMode::patch : DropoutMode::pixel;
  if (given("--orbit-radius")) spec.orbit_radius = flags.orbit_radius;
  if (given("--orbit-height")) spec.orbit_height = flags.orbit_height;
  if (given("--image-width")) spec.image_width = flags.image_width;
  if (given("--image-height")) spec.image_height = flags.image_height;
  if (given("--focal")) spec.focal = flags.focal;
  if (given("--rotation-jitter-deg")) spec.rotation_jitter_deg = flags.rotation_jitter_deg;
  if (given("--translation-jitter")) spec.translation_jitter = flags.translation_jitter;
  if (given("--mask-erosion")) spec.mask_erosion = flags.mask_erosion;
  if (given("--cloud-voxel")) spec.cloud_voxel = flags.cloud_voxel;
  if (given("--class-count")) spec.class_count = flags.class_count;
  if (given("--feature-dim")) spec.feature_dim = flags.feature_dim;
  if (given("--primitives")) {
    spec.primitives.clear();
    for (const auto& p : a.primitives) {
      spec.primitives.push_back(SceneSpec::from_json("{\"primitives\":[\"" + p + "\"]}").primitives[0]);
    }
  }
  const auto g = generate(spec, a.out);

  // Ground-truth instance features so `query` can be exercised without an extractor.
  const auto gt = read_labeled_ply(fs::path(a.out) / "gt_instances.ply");
  const auto classes = read_object_classes(fs::path(a.out) / "spec.json");
  FeatureFile ff;
  ff.dim = spec.feature_dim;
  ff.records = synth_features(gt.labels, classes, a.feature_noise, spec.feature_dim, spec.seed);
  write_features(fs::path(a.out) / "gt_features.ovft", ff);

  ordered_json j;
  j["out"] = a.out;
  j["objects"] = g.scene.objects.size();
  j["frames"] = g.scene.poses.size();
  j["cloud_points"] = g.cloud_points;
  std::cout << j.dump() << '\n';
}

int run_pipeline_cmd(const std::string& scene_dir, const std::string& out, const PipelineConfig& cfg,
                     bool dump) {
  const auto scene = SceneDirectory::open(scene_dir);
  const auto result = run_pipeline(scene, cfg);
  write_pipeline_outputs(scene, cfg, result, out, dump);
  ordered_json j;
  j["out"] = out;
  j["frames_used"] = result.frames.size();
  j["cloud_points"] = result.cloud.size();
  j["segments"] = result.segments.size();
  j["lifted_masks"] = result.lifted_masks;
  j["merged_groups"] = result.merged.masks.size();
  j["instances"] = result.instances.instances().size();
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-vocabulary 3D instance mapping from posed RGB-D frames and 2D masks"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap on parallel workers (0 = all cores)");

  // synth
  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene directory");
  synth->add_option("--out", sa.out, "output directory")->required();
  synth->add_option("--config", sa.config, "scene spec JSON");
  synth->add_option("--seed", sa.spec.seed, "random seed")->capture_default_str();
  synth->add_option("--min-objects", sa.spec.min_objects)->capture_default_str();
  synth->add_option("--max-objects", sa.spec.max_objects)->capture_default_str();
  synth->add_option("--frames", sa.spec.frame_count)->capture_default_str();
  synth->add_option("--primitives", sa.primitives, "box, sphere, cylinder");
  synth->add_option("--reflective-probability", sa.spec.reflective_probability)->capture_default_str();
  synth->add_option("--dropout", sa.spec.dropout_fraction, "depth dropout on reflective objects")
      ->capture_default_str();
  synth->add_option("--dropout-mode", sa.dropout_mode)->check(CLI::IsMember({"pixel", "patch"}))
      ->capture_default_str();
  synth->add_option("--orbit-radius", sa.spec.orbit_radius)->capture_default_str();
  synth->add_option("--orbit-height", sa.spec.orbit_height)->capture_default_str();
  synth->add_option("--image-width", sa.spec.image_width)->capture_default_str();
  synth->add_option("--image-height", sa.spec.image_height)->capture_default_str();
  synth->add_option("--focal", sa.spec.focal)->capture_default_str();
  synth->add_option("--rotation-jitter-deg", sa.spec.rotation_jitter_deg)->capture_default_str();
  synth->add_option("--translation-jitter", sa.spec.translation_jitter)->capture_default_str();
  synth->add_option("--mask-erosion", sa.spec.mask_erosion)->capture_default_str();
  synth->add_option("--cloud-voxel", sa.spec.cloud_voxel)->capture_default_str();
  synth->add_option("--class-count", sa.spec.class_count)->capture_default_str();
  synth->add_option("--feature-dim", sa.spec.feature_dim)->capture_default_str();
  synth->add_option("--feature-noise", sa.feature_noise, "noise of gt_features.ovft")
      ->capture_default_str();

  // pipeline
  ConfigFlags pipe_flags;
  std::string pipe_scene, pipe_out, pipe_config;
  bool pipe_dump = false;
  auto* pipe = app.add_subcommand("pipeline", "run every stage on a scene directory");
  pipe->add_option("--scene", pipe_scene, "scene directory")->required();
  pipe->add_option("--out", pipe_out, "output directory")->required();
  pipe->add_option("--config", pipe_config, "pipeline config JSON");
  pipe->add_flag("--dump-intermediate", pipe_dump, "also write masks.jsonl and segments.ply");
  add_all_flags(pipe, pipe_flags);

  // render-depth
  ConfigFlags rd_flags;
  std::string rd_cloud, rd_intr, rd_pose, rd_out;
  auto* rd = app.add_subcommand("render-depth", "splat the working cloud into a depth image");
  rd->add_option("--cloud", rd_cloud)->required();
  rd->add_option("--intrinsics", rd_intr)->required();
  rd->add_option("--pose", rd_pose)->required();
  rd->add_option("--out", rd_out, "16-bit PNG")->required();
  add_geometry_flags(rd, rd_flags);
  rd_flags.add<int>(rd, "--splat-radius",
                    std::function<int&(PipelineConfig&)>([](PipelineConfig& c) -> int& { return c.splat_radius; }),
                    "splat half size (px)");
  rd_flags.add<double>(rd, "--z-buffer-tolerance",
                       std::function<double&(PipelineConfig&)>(
                           [](PipelineConfig& c) -> double& { return c.z_buffer_tolerance; }),
                       "averaging band (m)");

  // supplement
  std::string sp_raw, sp_synth, sp_out;
  bool sp_prefer = false;
  auto* sp = app.add_subcommand("supplement", "combine raw and synthetic depth");
  sp->add_option("--raw", sp_raw)->required();
  sp->add_option("--synth", sp_synth)->required();
  sp->add_option("--out", sp_out)->required();
  sp->add_flag("--prefer-raw-when-synth-missing", sp_prefer);

  // lift
  ConfigFlags lf_flags;
  std::string lf_scene, lf_out, lf_config;
  std::size_t lf_frame = 0;
  GroupId lf_first = 1;
  auto* lf = app.add_subcommand("lift", "lift one frame's 2D masks onto the working cloud");
  lf->add_option("--scene", lf_scene)->required();
  lf->add_option("--frame", lf_frame)->required();
  lf->add_option("--out", lf_out, "masks JSON lines")->required();
  lf->add_option("--first-id", lf_first, "first group id")->capture_default_str();
  lf->add_option("--config", lf_config);
  add_geometry_flags(lf, lf_flags);
  add_lift_flags(lf, lf_flags);

  // merge
  std::vector<std::string> mg_in;
  std::string mg_out;
  double mg_thr = MergeConfig{}.or_threshold;
  auto* mg = app.add_subcommand("merge", "hierarchically merge per-frame mask files");
  mg->add_option("--in", mg_in, "one masks file per frame, in frame order")->required();
  mg->add_option("--out", mg_out)->required();
  mg->add_option("--or-threshold", mg_thr)->capture_default_str();

  // segment
  ConfigFlags sg_flags;
  std::string sg_scene, sg_out, sg_config;
  auto* sg = app.add_subcommand("segment", "normal-based graph segmentation of the working cloud");
  sg->add_option("--scene", sg_scene)->required();
  sg->add_option("--out", sg_out, "PLY with segment_id")->required();
  sg->add_option("--config", sg_config);
  add_geometry_flags(sg, sg_flags);
  add_segment_flags(sg, sg_flags);
  sg_flags.add<std::size_t>(sg, "--stride",
                            std::function<std::size_t&(PipelineConfig&)>(
                                [](PipelineConfig& c) -> std::size_t& { return c.stride; }),
                            "frames whose cameras orient normals");

  // vote
  std::string vt_segments, vt_masks, vt_out;
  auto* vt = app.add_subcommand("vote", "assign each surface segment its dominant mask group");
  vt->add_option("--segments", vt_segments, "PLY with segment_id")->required();
  vt->add_option("--masks", vt_masks, "merged masks JSON lines")->required();
  vt->add_option("--out", vt_out, "instance PLY; the sidecar JSON sits next to it")->required();

  // postprocess
  ConfigFlags pp_flags;
  std::string pp_in, pp_out;
  auto* pp = app.add_subcommand("postprocess", "split disconnected instances and fill gaps");
  pp->add_option("--instances", pp_in, "instance PLY with sidecar JSON")->required();
  pp->add_option("--out", pp_out, "instance PLY")->required();
  add_post_flags(pp, pp_flags);

  // query
  std::string q_inst, q_feat, q_queries, q_manifest, q_out;
  std::size_t q_top = 5;
  auto* qc = app.add_subcommand("query", "rank instances against labelled query vectors");
  qc->add_option("--instances", q_inst, "instance PLY with sidecar JSON")->required();
  qc->add_option("--features", q_feat, "instance feature file")->required();
  qc->add_option("--queries", q_queries, "labelled query file")->required();
  qc->add_option("--manifest", q_manifest, "crop manifest for frame+mask keys");
  qc->add_option("--top-k", q_top)->capture_default_str();
  qc->add_option("--out", q_out, "also write the labelled instance map here (PLY)");

  // eval
  std::string ev_pred, ev_gt, ev_gt_json, ev_out;
  double ev_radius = 0.02;
  auto* ev = app.add_subcommand("eval", "class-agnostic AP against ground truth");
  ev->add_option("--pred", ev_pred, "instance PLY")->required();
  auto* gt_ply_opt = ev->add_option("--gt", ev_gt, "PLY with instance_id");
  auto* gt_json_opt = ev->add_option("--gt-json", ev_gt_json, "JSON point index -> id");
  gt_ply_opt->excludes(gt_json_opt);
  ev->add_option("--transfer-radius", ev_radius, "label transfer radius when clouds differ (m)")
      ->capture_default_str();
  ev->add_option("--out", ev_out, "report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (threads < 0) throw UsageError("--threads must be nonnegative");
    set_thread_limit(threads);

    if (*synth) {
      run_synth(sa, synth);
    } else if (*pipe) {
      return run_pipeline_cmd(pipe_scene, pipe_out, pipe_flags.resolve(pipe_config), pipe_dump);
    } else if (*rd) {
      const auto cfg = rd_flags.resolve("");
      const auto cloud = load_working_cloud(rd_cloud, cfg.voxel_size);
      const auto K = read_intrinsics(rd_intr);
      const auto T = read_pose(rd_pose);
      write_png16(rd_out, render_synthetic_depth(cloud, K, T, cfg.depth_scale, cfg.synthetic()));
    } else if (*sp) {
      write_png16(sp_out, supplement_depth(read_png16(sp_raw), read_png16(sp_synth), {sp_prefer}));
    } else if (*lf) {
      const auto cfg = lf_flags.resolve(lf_config);
      const auto scene = SceneDirectory::open(lf_scene);
      const auto cloud = load_working_cloud(scene.cloud_path(), cfg.voxel_size);
      auto frame = scene.load_frame(lf_frame);
      frame.depth = frame_depth(frame, cloud, cfg);
      GroupIdCounter ids(lf_first);
      const auto masks = lift_masks(frame, cloud, cfg.lift(), ids);
      auto out = open_out(lf_out);
      write_masks_jsonl(out, masks);
    } else if (*mg) {
      std::vector<MaskSet> sets;
      for (const auto& p : mg_in) {
        auto in = open_in(p);
        sets.push_back(MaskSet::from_masks(read_masks_jsonl(in)));
      }
      MergeConfig mc;
      mc.or_threshold = mg_thr;
      const auto merged = hierarchical_merge(std::move(sets), mc);
      auto out = open_out(mg_out);
      write_masks_jsonl(out, merged.masks);
    } else if (*sg) {
      const auto cfg = sg_flags.resolve(sg_config);
      const auto scene = SceneDirectory::open(sg_scene);
      auto cloud = load_working_cloud(scene.cloud_path(), cfg.voxel_size);
      std::vector<Point3> views;
      for (const auto t : select_frames(scene.frame_count, cfg.stride)) {
        views.push_back(scene.load_pose(t).translation());
      }
      attach_normals(cloud, cfg.normal_k, views);
      const auto segs = felzenszwalb_segment(build_graph(cloud, cfg.k_graph), cfg.k_fz, cfg.min_size);
      PlyVertexData ply;
      ply.points = cloud.points;
      const auto labels = segment_labels(segs, cloud.size());
      ply.int_properties["segment_id"].assign(labels.begin(), labels.end());
      write_ply(sg_out, ply);
    } else if (*vt) {
      auto ply = read_ply(vt_segments);
      const auto it = ply.int_properties.find("segment_id");
      if (it == ply.int_properties.end()) throw DataError(vt_segments + ": no segment_id property");
      std::vector<std::uint32_t> labels;
      for (const auto v : it->second) {
        if (v < 0) throw DataError(vt_segments + ": negative segment id");
        labels.push_back(static_cast<std::uint32_t>(v));
      }
      auto in = open_in(vt_masks);
      MaskSet masks = MaskSet::from_masks(read_masks_jsonl(in));
      const auto map = dominant_vote(segments_from_labels(labels), masks, labels.size());
      write_instance_map(vt_out, sidecar_of(vt_out), cloud_from_points(std::move(ply.points)), map);
    } else if (*pp) {
      const auto cfg = pp_flags.resolve("");
      auto loaded = read_instance_map(pp_in, existing_sidecar(pp_in));
      const auto cloud = cloud_from_points(std::move(loaded.points));
      auto map = split_and_filter(loaded.map, cloud, cfg.post());
      map = knn_fill(map, cloud, cfg.knn_fill_radius);
      write_instance_map(pp_out, sidecar_of(pp_out), cloud, map);
    } else if (*qc) {
      auto loaded = read_instance_map(q_inst, existing_sidecar(q_inst));
      std::vector<CropRequest> manifest;
      if (!q_manifest.empty()) {
        auto in = open_in(q_manifest);
        manifest = read_crop_manifest(in);
      }
      const auto feats = read_features(fs::path(q_feat));
      auto map = attach_features(loaded.map, feats.records, manifest,
                                 [](const std::string& w) { std::cerr << "warning: " << w << '\n'; });
      const auto qs = query_set_from(read_features(fs::path(q_queries)));
      if (qs.empty()) throw DataError(q_queries + ": no query records");
      map = label_instances(map, qs);
      ordered_json j;
      auto arr = ordered_json::array();
      for (const auto& q : qs) {
        ordered_json e;
        e["label"] = q.label;
        auto hits = ordered_json::array();
        for (const auto& h : query(map, q.vector, q_top)) {
          hits.push_back({{"instance_id", h.instance_id}, {"score", h.score}});
        }
        e["matches"] = std::move(hits);
        arr.push_back(std::move(e));
      }
      j["queries"] = std::move(arr);
      ordered_json labels = ordered_json::object();
      for (const auto& r : map.instances()) {
        if (r.label) labels[std::to_string(r.id)] = *r.label;
      }
      j["labels"] = std::move(labels);
      std::cout << j.dump(2) << '\n';
      if (!q_out.empty()) {
        write_instance_map(q_out, sidecar_of(q_out), cloud_from_points(std::move(loaded.points)), map);
      }
    } else if (*ev) {
      const auto pred = read_labeled_ply(ev_pred);
      std::vector<std::uint32_t> gt;
      if (!ev_gt.empty()) {
        const auto g = read_labeled_ply(ev_gt);
        bool same = g.points.size() == pred.points.size();
        for (std::size_t i = 0; same && i < g.points.size(); ++i) {
          same = (g.points[i] - pred.points[i]).squaredNorm() <= 1e-12;
        }
        gt = same ? g.labels
                  : transfer_labels(KdTree(g.points), g.labels, pred.points, ev_radius);
      } else if (!ev_gt_json.empty()) {
        gt = read_gt_json(ev_gt_json, pred.points.size()).labels;
      } else {
        throw UsageError("eval needs --gt or --gt-json");
      }
      const auto report = evaluate(pred.labels, gt).to_json();
      std::cout << report;
      if (!ev_out.empty()) write_text_file(ev_out, report);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
