#include <doctest.h>

#include <cmath>

#include "retarget/parallel.hpp"
#include "retarget/simulator.hpp"
#include "test_util.hpp"

using namespace retarget;
using retarget::testing::line_episode;

TEST_CASE("heuristic commands negate the displacement and pass the height") {
  PrivilegedInfo p{0.6, 0.3, -0.2, 0.4};
  const LowerBodyCommand c = heuristic_commands(p);
  CHECK(c.vx == -0.3);
  CHECK(c.vy == 0.2);
  CHECK(c.vyaw == -0.4);
  CHECK(c.h == 0.6);
  p = {2.0, -5.0, 5.0, -3.0};
  const LowerBodyCommand k = heuristic_commands(p);
  CHECK(k.vx == 1.2);
  CHECK(k.vy == -0.5);
  CHECK(k.vyaw == 1.0);
  CHECK(k.h == 1.25);
  CHECK(within_ranges(k));
}

TEST_CASE("command ranges") {
  CHECK(kCommandRanges.vx.lo == -0.8);
  CHECK(kCommandRanges.vx.hi == 1.2);
  CHECK(kCommandRanges.vy.lo == -0.5);
  CHECK(kCommandRanges.vy.hi == 0.5);
  CHECK(kCommandRanges.vyaw.lo == -1.0);
  CHECK(kCommandRanges.vyaw.hi == 1.0);
  CHECK(kCommandRanges.h.lo == 0.15);
  CHECK(kCommandRanges.h.hi == 1.25);
  CHECK(clip({0.0, 0.0, 0.0, 0.0}).h == 0.15);
}

TEST_CASE("worker velocity lag has the closed form of a first-order system") {
  WorkerModel m;
  m.noise_std.setZero();
  Rng rng(1);
  BaseState s;
  s.vx = 0.4;
  const LowerBodyCommand cmd{1.0, -0.2, 0.3, 0.75};
  for (int n = 1; n <= 30; ++n) {
    s = worker_step(s, cmd, m, rng);
    const double a = std::exp(-n * m.dt / m.tau_v);
    CHECK(s.vx == doctest::Approx(1.0 + (0.4 - 1.0) * a).epsilon(1e-12));
    CHECK(s.vy == doctest::Approx(-0.2 * (1.0 - a)).epsilon(1e-12));
  }
}

TEST_CASE("worker integrates in the body frame and rate-limits height") {
  WorkerModel m;
  m.noise_std.setZero();
  m.tau_v = 1e-9;  // immediate response
  Rng rng(1);
  BaseState s;
  s.yaw = 1.5707963267948966;
  s = worker_step(s, {1.0, 0.0, 0.0, 1.25}, m, rng);
  CHECK(s.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.y == doctest::Approx(m.dt));
  CHECK(s.h == doctest::Approx(0.75 + m.height_rate * m.dt));
  CHECK(s.h_rate == doctest::Approx(m.height_rate));
}

TEST_CASE("manager state expresses goals in the base frame") {
  BaseState b;
  b.x = 1.0;
  b.y = 2.0;
  b.yaw = 0.5;
  b.h = 0.8;
  const Pose local_l = Pose::from_axis_angle(Vec3::UnitY(), -1.2, Vec3(0.3, 0.2, 0.1));
  const Pose local_r = Pose::from_translation(Vec3(0.35, -0.2, 0.05));
  const WristGoal g{b.pose() * local_l, b.pose() * local_r};
  const ManagerState s = make_manager_state(g, b);
  CHECK((s.left().position() - local_l.position()).norm() < 1e-14);
  CHECK(rotation_angle(s.left().orientation(), local_l.orientation()) < 1e-7);
  CHECK((s.right().position() - local_r.position()).norm() < 1e-14);
  CHECK(s.height() == 0.8);
}

TEST_CASE("goal streams place wrists at the body pose") {
  Episode ep = line_episode("stream");
  for (auto& st : ep.steps) st.body = PlanarPose{0.5 * st.t, 0.0, 0.0};
  const GoalStream g = make_goal_stream(ep);
  REQUIRE(g.size() == ep.steps.size());
  CHECK_FALSE(g.is_static);
  const auto& last = ep.steps.back();
  CHECK(g.goals.back().left.position().x() == doctest::Approx(last.left_wrist.position().x() + 0.5 * last.t));
}

TEST_CASE("vector env rollouts do not depend on the thread count") {
  std::vector<GoalStream> pool;
  for (int i = 0; i < 5; ++i) pool.push_back(make_goal_stream(line_episode("p" + std::to_string(i), 50, 0.3 + 0.02 * i)));
  SimConfig cfg;
  HoldPolicy hold;
  auto run = [&](std::size_t threads) {
    set_thread_count(threads);
    VectorEnv env(cfg, pool, 6, 42);
    RolloutBatch a = env.rollout(hold, 30);
    RolloutBatch b = env.rollout(hold, 30);
    return std::make_pair(std::move(a), std::move(b));
  };
  const auto one = run(1);
  const auto three = run(3);
  set_thread_count(0);
  REQUIRE(one.first.records.size() == 6 * 30);
  for (std::size_t i = 0; i < one.first.records.size(); ++i) {
    CHECK(one.first.records[i].state == three.first.records[i].state);
    CHECK(one.second.records[i].target == three.second.records[i].target);
  }
  CHECK(one.second.wraps == three.second.wraps);
  // 50-step streams are exhausted within 60 steps, so each env wraps once at least.
  CHECK(one.second.wraps.size() >= 6);
}

TEST_CASE("executed commands are always inside the ranges") {
  std::vector<GoalStream> pool{make_goal_stream(line_episode("z"))};
  ZeroPolicy zero;
  VectorEnv env(SimConfig{}, pool, 2, 7);
  const RolloutBatch b = env.rollout(zero, 10);
  for (const auto& r : b.records) {
    CHECK(within_ranges(r.executed));
    CHECK(r.executed.h == 0.15);
    CHECK(within_ranges(r.target));
  }
}

TEST_CASE("track_stream is deterministic per seed") {
  const GoalStream g = make_goal_stream(line_episode("t"));
  HoldPolicy hold;
  const StreamTrace a = track_stream(SimConfig{}, hold, g, 5);
  const StreamTrace b = track_stream(SimConfig{}, hold, g, 5);
  REQUIRE(a.base.size() == g.size());
  for (std::size_t i = 0; i < a.base.size(); ++i) CHECK(a.base[i] == b.base[i]);
  CHECK(track_stream(SimConfig{}, hold, g, 5, 10).base.size() == 10);
}
