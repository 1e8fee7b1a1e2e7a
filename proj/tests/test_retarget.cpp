#include <doctest.h>

#include "retarget/error.hpp"
#include "retarget/preprocess.hpp"
#include "retarget/retarget.hpp"
#include "retarget/text_io.hpp"
#include "retarget/triplets.hpp"
#include "test_util.hpp"

using namespace retarget;
using retarget::testing::line_episode;
using retarget::testing::TempDir;

namespace {

Episode prepared(const std::string& id, std::size_t steps = 30) {
  PreprocessConfig pc;
  pc.target.mean.x() = 0.30;
  pc.target.stddev.x() = 0.06;
  const Episode src = line_episode(id, steps);
  return preprocess_episode(src, compute_axis_stats({src}), pc);
}

}  // namespace

TEST_CASE("gripper mapping hits the keyframes exactly") {
  const HandKeyframes k = default_hand_keyframes("right");
  CHECK(map_gripper(1.0, k) == k.open);
  CHECK(map_gripper(0.0, k) == k.closed);
  const JointVector mid = map_gripper(0.5, k);
  CHECK(mid.values.isApprox(0.5 * (k.open.values + k.closed.values)));
  CHECK_THROWS_AS(map_gripper(1.2, k), ValidationError);
}

TEST_CASE("resampling keeps the time span and interpolates linearly") {
  Episode ep = line_episode("r", 21);  // 20 Hz over 1 s
  ep.frequency = 20.0;
  const Episode same = resample_episode(ep, 20.0);
  CHECK(same == ep);
  const Episode up = resample_episode(ep, 40.0);
  REQUIRE(up.steps.size() == 41);
  CHECK(up.frequency == 40.0);
  CHECK(up.metadata.at("resampled_from_hz") == "20");
  const auto& a = ep.steps[3].left_wrist.position();
  const auto& b = ep.steps[4].left_wrist.position();
  CHECK((up.steps[7].left_wrist.position() - 0.5 * (a + b)).norm() < 1e-12);
  CHECK(up.steps[7].left_grip == doctest::Approx(0.5 * (ep.steps[3].left_grip + ep.steps[4].left_grip)));
}

TEST_CASE("retargeting refuses unpreprocessed input") {
  HoldPolicy hold;
  CHECK_THROWS_AS(retarget_episode(line_episode("raw"), hold, RetargetConfig{}), ValidationError);
}

TEST_CASE("retargeted episodes carry provenance and one action per control tick") {
  HoldPolicy hold;
  RetargetConfig cfg;
  const Episode ep = prepared("p");
  const RetargetedEpisode r = retarget_episode(ep, hold, cfg);
  CHECK(r.episode_id == "p");
  CHECK(r.language == ep.language);
  CHECK(r.source_embodiment == "test-arm");
  CHECK(r.embodiment == "humanoid-dual-arm-7dof");
  REQUIRE(r.steps.size() == ep.steps.size());
  for (const auto& s : r.steps) {
    CHECK(s.action.left_arm.values.size() == 7);
    CHECK(s.action.right_hand.values.size() == 7);
    CHECK(within_ranges(s.action.command));
    CHECK(pose_error(s.realized.left, s.goal.left).position == doctest::Approx(s.left_residual.position));
  }
  CHECK(r.steps.front().action.left_hand == map_gripper(ep.steps.front().left_grip, cfg.left_hand));
  CHECK(retarget_episode(ep, hold, cfg) == r);
}

TEST_CASE("batch retargeting is sorted and matches single episodes") {
  HoldPolicy hold;
  RetargetConfig cfg;
  const std::vector<Episode> eps{prepared("b"), prepared("a"), prepared("c", 25)};
  const auto reps = retarget_episodes(eps, hold, cfg);
  REQUIRE(reps.size() == 3);
  CHECK(reps[0].episode_id == "a");
  CHECK(reps[2].episode_id == "c");
  CHECK(reps[0] == retarget_episode(eps[1], hold, cfg));
}

TEST_CASE("triplet files round-trip with a consistent manifest") {
  HoldPolicy hold;
  const auto reps = retarget_episodes({prepared("x"), prepared("y", 22)}, hold, RetargetConfig{});
  TempDir dir("triplets");
  const auto manifest_path = export_triplets(reps, dir.path / "t.jsonl");
  CHECK(manifest_path == manifest_path_for(dir.path / "t.jsonl"));
  const auto back = read_triplets(dir.path / "t.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back == reps);
  const TripletManifest m = manifest_from_json(read_text_file(manifest_path));
  CHECK(m == make_manifest(reps));
  CHECK(m.episodes == 2);
  CHECK(m.steps == 52);
  CHECK(m.both.count == 104);
  CHECK(m.task_episodes.at("reach/cube") == 2);
  double mean = 0.0;
  for (const auto& r : reps)
    for (const auto& s : r.steps) mean += s.left_residual.position;
  CHECK(m.left.position_mean == doctest::Approx(mean / 52.0));
}
