#include <doctest.h>

#include <cmath>

#include <set>

#include "retarget/dagger.hpp"
#include "retarget/error.hpp"
#include "retarget/report.hpp"
#include "test_util.hpp"

using namespace retarget;
using retarget::testing::line_episode;

namespace {

std::vector<GoalStream> pool(std::size_t n) {
  std::vector<GoalStream> out;
  for (std::size_t i = 0; i < n; ++i) {
    Episode ep = line_episode("s" + std::to_string(i), 30, 0.3 + 0.01 * static_cast<double>(i));
    if (i % 2 == 1)
      for (auto& st : ep.steps) st.body = PlanarPose{0.2 * st.t, 0.0, 0.05 * st.t};
    out.push_back(make_goal_stream(ep));
  }
  return out;
}

TrainerConfig tiny(TrainMode mode) {
  TrainerConfig c;
  c.mode = mode;
  c.envs = 2;
  c.steps = 5;
  c.iterations = 12;
  c.period = 3;
  c.hidden = {8};
  c.da_batch = 16;
  c.validation_episodes = 2;
  c.validation_every = 4;
  c.validation_steps = 8;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("mode names round-trip") {
  for (TrainMode m : {TrainMode::kHarmonized, TrainMode::kOnline, TrainMode::kOnlineDagger, TrainMode::kStandardDagger})
    CHECK(train_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(train_mode_from_string("dagger"), ValidationError);
}

TEST_CASE("aggregation schedule per mode") {
  TrainerConfig c = tiny(TrainMode::kHarmonized);
  CHECK(c.effective_period() == 3);
  CHECK(c.aggregates_at(0));
  CHECK_FALSE(c.aggregates_at(1));
  CHECK(c.aggregates_at(9));
  c.mode = TrainMode::kOnline;
  CHECK_FALSE(c.aggregates_at(0));
  CHECK(c.rollout_step());
  CHECK_FALSE(c.uses_dataset());
  c.mode = TrainMode::kStandardDagger;
  CHECK(c.aggregates_at(5));
  CHECK_FALSE(c.rollout_step());
  c.mode = TrainMode::kOnlineDagger;
  CHECK(c.aggregates_at(5));
  CHECK(c.rollout_step());
}

TEST_CASE("dataset size follows the storage law") {
  const auto p = pool(6);
  const SimConfig sim;
  const std::size_t per_batch = 2 * 5;
  const auto h = train_manager(tiny(TrainMode::kHarmonized), p, sim);
  CHECK(h.log.aggregation_events() == 4);  // iterations 0, 3, 6, 9
  CHECK(h.log.iterations.back().dataset_size == 4 * per_batch);
  const auto s = train_manager(tiny(TrainMode::kStandardDagger), p, sim);
  CHECK(s.log.aggregation_events() == 12);
  CHECK(s.log.iterations.back().dataset_size == 12 * per_batch);
  const auto o = train_manager(tiny(TrainMode::kOnline), p, sim);
  CHECK(o.log.aggregation_events() == 0);
  CHECK(o.log.iterations.back().dataset_size == 0);
  for (const auto& r : o.log.iterations) CHECK_FALSE(r.l_da.has_value());
  for (const auto& r : h.log.iterations) CHECK(r.l_da.has_value() == (r.iteration % 3 == 0));
}

TEST_CASE("harmonized with period 1 is online DAgger") {
  const auto p = pool(6);
  TrainerConfig a = tiny(TrainMode::kHarmonized);
  a.period = 1;
  const auto ra = train_manager(a, p, SimConfig{});
  const auto rb = train_manager(tiny(TrainMode::kOnlineDagger), p, SimConfig{});
  CHECK(ra.policy.net().params() == rb.policy.net().params());
  for (std::size_t i = 0; i < ra.log.iterations.size(); ++i) {
    CHECK(ra.log.iterations[i].l_rollout == rb.log.iterations[i].l_rollout);
    CHECK(ra.log.iterations[i].l_da == rb.log.iterations[i].l_da);
  }
}

TEST_CASE("training is reproducible and validates on the configured cadence") {
  const auto p = pool(6);
  const TrainerConfig c = tiny(TrainMode::kHarmonized);
  const auto a = train_manager(c, p, SimConfig{});
  const auto b = train_manager(c, p, SimConfig{});
  CHECK(a.policy.net().params() == b.policy.net().params());
  std::vector<std::size_t> validated;
  for (const auto& r : a.log.iterations)
    if (r.validation) validated.push_back(r.iteration);
  CHECK(validated == std::vector<std::size_t>{3, 7, 11});
  CHECK(a.log.validation_episodes == 2);
  CHECK(a.log.train_episodes == 4);
  CHECK(a.log.initial.all.steps == 2 * 8);
}

TEST_CASE("held-out split is disjoint and seeded") {
  const StreamSplit s = split_streams(pool(10), 3, 5);
  CHECK(s.validation.size() == 3);
  CHECK(s.train.size() == 7);
  std::set<std::string> ids;
  for (const auto& g : s.train) ids.insert(g.id);
  for (const auto& g : s.validation) CHECK_FALSE(ids.contains(g.id));
  const StreamSplit t = split_streams(pool(10), 3, 5);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.validation[i].id == t.validation[i].id);
  const StreamSplit small = split_streams(pool(2), 3, 5);
  CHECK(small.train.size() == 2);
  CHECK(small.validation.size() == 2);
}

TEST_CASE("L_DA is the exact dataset mean") {
  const auto p = pool(4);
  VectorEnv env(SimConfig{}, p, 3, 1);
  HoldPolicy hold;
  AggregatedDataset d;
  aggregate(d, env.rollout(hold, 4));
  aggregate(d, env.rollout(hold, 4));
  REQUIRE(d.size() == 24);
  Rng rng(2);
  const ManagerNet net({8}, rng);
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    LowerBodyCommand out;
    net.act(std::span(&d.state(i), 1), std::span(&out, 1));
    sum += command_loss(out, d.label(i));
  }
  CHECK(da_loss(net, d) == doctest::Approx(sum / 24.0).epsilon(1e-12));
}

TEST_CASE("invalid trainer settings are rejected before work starts") {
  TrainerConfig c = tiny(TrainMode::kHarmonized);
  c.period = 0;
  CHECK_THROWS_AS(train_manager(c, pool(3), SimConfig{}), ValidationError);
  c = tiny(TrainMode::kHarmonized);
  c.weights.w << 0, 0, 0, 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("a non-finite loss aborts with a runtime failure") {
  auto p = pool(3);
  for (auto& s : p) s.goal_height.assign(s.goal_height.size(), std::nan(""));
  CHECK_THROWS_AS(train_manager(tiny(TrainMode::kOnline), p, SimConfig{}), RuntimeFailure);
}

TEST_CASE("log CSV and run summary") {
  const TrainerConfig c = tiny(TrainMode::kHarmonized);
  const auto r = train_manager(c, pool(6), SimConfig{});
  const std::string csv = train_log_csv(r.log);
  CHECK(csv.rfind("iteration,l_rollout,l_da,dataset_size,e_p_cm", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  const ManagerRunSummary s = summarize_run(c, r.log);
  CHECK(s.dataset_size == 40);
  CHECK(s.aggregation_events == 4);
  const ManagerRunSummary back = run_summary_from_json(run_summary_json(s, false));
  CHECK(back.dataset_size == 40);
  CHECK(back.wall_seconds == 0.0);
  CHECK(run_summary_json(s, false) == run_summary_json(summarize_run(c, train_manager(c, pool(6), SimConfig{}).log), false));
}
