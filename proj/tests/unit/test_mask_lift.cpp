#include <doctest.h>

#include <algorithm>

#include "ovmap/errors.hpp"
#include "ovmap/evaluation.hpp"
#include "ovmap/io.hpp"
#include "ovmap/mask_lift.hpp"
#include "ovmap/pipeline.hpp"
#include "ovmap/scene_synth.hpp"
#include "test_util.hpp"

using namespace ovmap;

TEST_CASE("frame selection") {
  CHECK(select_frames(25, 10) == std::vector<std::uint32_t>{0, 10, 20});
  CHECK(select_frames(4, 1) == std::vector<std::uint32_t>{0, 1, 2, 3});
  CHECK(select_frames(0, 10).empty());
  CHECK_THROWS_AS(select_frames(5, 0), UsageError);
}

TEST_CASE("view score") {
  CHECK(mask_score(500, 200, 1000, 1000) == doctest::Approx(0.7));
  CHECK(mask_score(0, 0, 1000, 1000) == 0.0);
  CHECK(mask_score(500, 200, 1000, 1000, {1.0, 0.0, true}) == doctest::Approx(0.5));
  CHECK(mask_score(500, 200, 1000, 1000, {1.0, 1.0, false}) == 700.0);
  // With beta = 0 the score ranks views exactly as their pixel counts do.
  const ScoreWeights w{1.0, 0.0, true};
  CHECK(mask_score(300, 9000, 1000, 10000, w) < mask_score(301, 1, 1000, 10000, w));
  CHECK_THROWS_AS((ScoreWeights{-1.0, 1.0, true}.validate()), UsageError);
}

namespace {

struct LiftFixture {
  SceneDirectory scene;
  WorkingCloud cloud;
  std::vector<std::uint32_t> gt;

  explicit LiftFixture(const SceneSpec& spec, const std::string& name) {
    const auto dir = test::scratch_dir(name);
    generate(spec, dir);
    scene = SceneDirectory::open(dir);
    cloud = load_working_cloud(scene.cloud_path(), 0.02);
    const auto labeled = read_labeled_ply(scene.gt_path());
    gt = transfer_labels(KdTree(labeled.points), labeled.labels, cloud.points, 1e-6);
  }
};

SceneSpec small_spec(int objects, PrimitiveType type) {
  SceneSpec s;
  s.seed = 5;
  s.min_objects = s.max_objects = objects;
  s.primitives = {type};
  s.frame_count = 4;
  return s;
}

}  // namespace

TEST_CASE("a box mask lifts onto that box's cloud points") {
  const LiftFixture fx(small_spec(1, PrimitiveType::box), "lift_box");
  const auto frame = fx.scene.load_frame(0);
  GroupIdCounter ids;
  const auto masks = lift_masks(frame, fx.cloud, LiftConfig{}, ids);
  const auto it = std::find_if(masks.begin(), masks.end(),
                               [](const auto& m) { return m.best_view.mask_id == 1; });
  REQUIRE(it != masks.end());
  std::size_t on_box = 0;
  for (const auto p : it->points) on_box += fx.gt[p] == 1;
  // Pixels along the base can snap to floor points within r_snap.
  CHECK(on_box >= 0.97 * static_cast<double>(it->points.size()));
  CHECK(it->best_view.frame == 0);
  CHECK(it->score > 0.0);
  CHECK(std::is_sorted(it->points.begin(), it->points.end()));
}

TEST_CASE("masks without depth produce nothing") {
  const LiftFixture fx(small_spec(1, PrimitiveType::box), "lift_nodepth");
  auto frame = fx.scene.load_frame(0);
  std::fill(frame.depth.pixels().begin(), frame.depth.pixels().end(), 0);
  GroupIdCounter ids;
  CHECK(lift_masks(frame, fx.cloud, LiftConfig{}, ids).empty());
  CHECK(ids.peek() == 1);
}

TEST_CASE("separate objects lift to disjoint index sets with unique ids") {
  const LiftFixture fx(small_spec(3, PrimitiveType::sphere), "lift_disjoint");
  GroupIdCounter ids;
  std::vector<InstanceMask3D> all;
  for (std::size_t t = 0; t < fx.scene.frame_count; ++t) {
    const auto frame = fx.scene.load_frame(t);
    auto masks = lift_masks(frame, fx.cloud, LiftConfig{}, ids);
    for (std::size_t i = 0; i < masks.size(); ++i) {
      for (std::size_t j = i + 1; j < masks.size(); ++j) {
        std::vector<std::uint32_t> both;
        std::set_intersection(masks[i].points.begin(), masks[i].points.end(),
                              masks[j].points.begin(), masks[j].points.end(),
                              std::back_inserter(both));
        // Objects touch only the floor mask, whose id is the last one.
        if (masks[i].best_view.mask_id <= 3 && masks[j].best_view.mask_id <= 3) {
          CHECK(both.empty());
        }
      }
    }
    all.insert(all.end(), masks.begin(), masks.end());
  }
  std::vector<GroupId> gids;
  for (const auto& m : all) gids.push_back(m.group_id);
  std::sort(gids.begin(), gids.end());
  CHECK(std::adjacent_find(gids.begin(), gids.end()) == gids.end());
}

TEST_CASE("mismatched frame images are rejected") {
  PosedFrame f;
  f.intrinsics = {10, 10, 4, 4, 8, 8};
  f.depth = DepthImage(8, 8);
  f.masks = MaskLabelImage(8, 7);
  WorkingCloud c;
  GroupIdCounter ids;
  CHECK_THROWS_AS(lift_masks(f, c, LiftConfig{}, ids), DataError);
}
