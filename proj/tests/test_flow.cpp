#include <doctest.h>

#include <cmath>

#include "retarget/archive.hpp"
#include "retarget/error.hpp"
#include "retarget/flow.hpp"
#include "retarget/preprocess.hpp"
#include "test_util.hpp"

using namespace retarget;
using retarget::testing::line_episode;

namespace {

// Field that returns the true target for one fixed (batch, noise) pair.
class OracleField final : public FlowField {
 public:
  OracleField(const FlowBatch& b, const FlowNoise& n, int h, int a) : target_(n.eps - b.chunks), h_(h), a_(a) {}
  int horizon() const override { return h_; }
  int action_dim() const override { return a_; }
  Eigen::MatrixXd velocity(const Eigen::MatrixXd&, const Eigen::MatrixXd&, std::span<const int>,
                           std::span<const double>) const override {
    return target_;
  }

 private:
  Eigen::MatrixXd target_;
  int h_, a_;
};

// Exact conditional field for a single datapoint x: v = (noised - x) / (1 - tau).
class PointField final : public FlowField {
 public:
  PointField(Eigen::VectorXd x, int h, int a) : x_(std::move(x)), h_(h), a_(a) {}
  int horizon() const override { return h_; }
  int action_dim() const override { return a_; }
  Eigen::MatrixXd velocity(const Eigen::MatrixXd& noised, const Eigen::MatrixXd&, std::span<const int>,
                           std::span<const double> taus) const override {
    Eigen::MatrixXd v = noised.colwise() - x_;
    for (Eigen::Index c = 0; c < v.cols(); ++c) v.col(c) /= (1.0 - taus[static_cast<std::size_t>(c)]);
    return v;
  }

 private:
  Eigen::VectorXd x_;
  int h_, a_;
};

FlowSpec toy_spec() {
  FlowSpec s;
  s.horizon = 3;
  s.action_dim = 6;
  s.state_dim = 2;
  s.embed_dim = 2;
  s.hidden = {10, 10};
  return s;
}

FlowDataset toy_dataset(const FlowSpec& spec, Rng& rng) {
  FlowDataset d;
  d.tasks = {"a", "b"};
  d.actions = Normalizer::identity(spec.action_dim);
  d.states = Normalizer::identity(spec.state_dim);
  for (int e = 0; e < 3; ++e) {
    Eigen::MatrixXd a(spec.action_dim, 8), s(spec.state_dim, 8);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
    d.episode_actions.push_back(a);
    d.episode_states.push_back(s);
    d.episode_task.push_back(e % 2);
    for (std::size_t t = 0; t < 8; ++t) d.windows.emplace_back(e, t);
  }
  return d;
}

}  // namespace

TEST_CASE("noised chunk interpolates between noise and data") {
  ActionChunk a = ActionChunk::Constant(2, 3, 2.0), eps = ActionChunk::Constant(2, 3, -1.0);
  CHECK(noised_chunk(a, eps, 0.0) == eps);
  CHECK(noised_chunk(a, eps, 1.0) == a);
  CHECK(noised_chunk(a, eps, 0.25)(1, 2) == doctest::Approx(0.25 * 2.0 + 0.75 * -1.0));
}

TEST_CASE("normalizer pins constant dimensions and inverts exactly enough") {
  Eigen::MatrixXd x(2, 4);
  x << 1, 2, 3, 4, 5, 5, 5, 5;
  const Normalizer n = Normalizer::fit(x);
  CHECK(n.mean()[0] == 2.5);
  CHECK(n.stddev()[0] == doctest::Approx(std::sqrt(1.25)));
  CHECK(n.stddev()[1] == 1.0);
  const Eigen::VectorXd v = x.col(2);
  CHECK((n.denormalize(n.normalize(v)) - v).norm() < 1e-15);
  CHECK_THROWS_AS(n.normalize(Eigen::VectorXd::Zero(3)), ValidationError);
}

TEST_CASE("chunks flatten column-major") {
  ActionChunk c(2, 3);
  c << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd f = flatten_chunk(c);
  CHECK(f[1] == 4.0);
  CHECK(f[2] == 2.0);
  CHECK(unflatten_chunk(f, 2, 3) == c);
}

TEST_CASE("an oracle velocity field has zero loss") {
  Rng rng(1);
  FlowBatch b;
  b.chunks = Eigen::MatrixXd::Random(12, 5);
  b.states = Eigen::MatrixXd::Random(2, 5);
  b.tasks = {0, 0, 1, 1, 0};
  const FlowNoise noise = draw_flow_noise(5, 12, rng);
  const OracleField oracle(b, noise, 3, 4);
  CHECK(fm_loss(oracle, b, noise) == 0.0);
}

TEST_CASE("noise draws: every tau first, then eps column by column") {
  Rng a(5), b(5);
  const FlowNoise n = draw_flow_noise(3, 4, a);
  for (int i = 0; i < 3; ++i) CHECK(n.tau[static_cast<std::size_t>(i)] == b.uniform());
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 4; ++r) CHECK(n.eps(r, c) == b.normal());
}

TEST_CASE("Euler sampling with the exact field recovers a single datapoint") {
  const int h = 16, a = 32;
  Rng rng(2);
  Eigen::VectorXd x(h * a);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-0.5, 0.5);
  // Keep the command columns inside their ranges so clamping is a no-op.
  ActionChunk target = unflatten_chunk(x, h, a);
  for (int r = 0; r < h; ++r) target(r, a - 1) = 0.7;
  const PointField field(flatten_chunk(target), h, a);
  for (int steps : {1, 4, 10}) {
    const ActionChunk s = sample_chunk(field, Normalizer::identity(a), Eigen::VectorXd::Zero(2), 0, steps, rng);
    CHECK((s - target).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sampled chunks have the chunk shape and clamped command columns") {
  const int h = 16, a = 32;
  const PointField wild(Eigen::VectorXd::Constant(h * a, 50.0), h, a);
  Rng rng(3);
  const ActionChunk s = sample_chunk(wild, Normalizer::identity(a), Eigen::VectorXd::Zero(2), 0, 4, rng);
  CHECK(s.rows() == 16);
  CHECK(s.cols() == 32);
  for (int r = 0; r < h; ++r) {
    CHECK(s(r, 28) == 1.2);
    CHECK(s(r, 29) == 0.5);
    CHECK(s(r, 30) == 1.0);
    CHECK(s(r, 31) == 1.25);
    CHECK(s(r, 0) == doctest::Approx(50.0));
  }
}

TEST_CASE("flow model gradient matches central differences") {
  const FlowSpec spec = toy_spec();
  Rng rng(4);
  FlowModel m(spec, {"a", "b"}, Normalizer::identity(6), Normalizer::identity(2), rng);
  FlowBatch b;
  b.chunks = Eigen::MatrixXd::Random(18, 3);
  b.states = Eigen::MatrixXd::Random(2, 3);
  b.tasks = {0, 1, 1};
  const FlowNoise noise = draw_flow_noise(3, 18, rng);
  const FlowModel::LossGrad g = m.loss_and_grad(b, noise);
  CHECK(g.loss == doctest::Approx(fm_loss(m, b, noise)).epsilon(1e-14));
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < m.net().parameter_count(); i += 7) {
    FlowModel p = m, q = m;
    p.net().mutable_params()[i] += h;
    q.net().mutable_params()[i] -= h;
    const double fd = (fm_loss(p, b, noise) - fm_loss(q, b, noise)) / (2 * h);
    CHECK(std::abs(fd - g.net_grad[i]) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
  for (Eigen::Index i = 0; i < m.embedding().size(); ++i) {
    FlowModel p = m, q = m;
    p.embedding().data()[i] += h;
    q.embedding().data()[i] -= h;
    const double fd = (fm_loss(p, b, noise) - fm_loss(q, b, noise)) / (2 * h);
    CHECK(std::abs(fd - g.embed_grad.data()[i]) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("flow training resumes bit-identically from a checkpoint archive") {
  const FlowSpec spec = toy_spec();
  Rng rng(5);
  const FlowDataset data = toy_dataset(spec, rng);
  FlowTrainConfig cfg;
  cfg.spec = spec;
  cfg.steps = 30;
  cfg.batch = 8;
  cfg.seed = 11;
  const FlowTrainingState straight = train_flow(data, cfg);
  REQUIRE(straight.losses.size() == 30);

  FlowTrainingState half = init_flow_training(data, cfg);
  continue_flow_training(half, data, cfg, 13);
  FlowTrainingState resumed = flow_state_from_archive(deserialize_archive(serialize_archive(flow_state_archive(half))));
  continue_flow_training(resumed, data, cfg, 30);
  CHECK(resumed.step == 30);
  CHECK(resumed.losses == straight.losses);
  CHECK(resumed.model.net().params() == straight.model.net().params());
  CHECK(resumed.model.embedding() == straight.model.embedding());

  const FlowModel back = flow_model_from_archive(flow_model_archive(straight.model));
  CHECK(back.net().params() == straight.model.net().params());
  CHECK(back.tasks() == straight.model.tasks());
  CHECK(back.action_normalizer().mean() == straight.model.action_normalizer().mean());
}

TEST_CASE("checkpoint hook fires on the configured cadence") {
  const FlowSpec spec = toy_spec();
  Rng rng(6);
  const FlowDataset data = toy_dataset(spec, rng);
  FlowTrainConfig cfg;
  cfg.spec = spec;
  cfg.steps = 25;
  cfg.batch = 4;
  cfg.checkpoint_every = 10;
  std::vector<std::size_t> at;
  FlowHooks hooks;
  hooks.on_checkpoint = [&](const FlowTrainingState& s) { at.push_back(s.step); };
  train_flow(data, cfg, hooks);
  CHECK(at == std::vector<std::size_t>{10, 20});
}

TEST_CASE("flow dataset windows and state pairing") {
  PreprocessConfig pc;
  pc.target.mean.x() = 0.30;
  pc.target.stddev.x() = 0.06;
  const Episode src = line_episode("fd", 20);
  const Episode ep = preprocess_episode(src, compute_axis_stats({src}), pc);
  HoldPolicy hold;
  const RetargetedEpisode rep = retarget_episode(ep, hold, RetargetConfig{});
  const FlowDataset d = make_flow_dataset({rep});
  CHECK(d.windows.size() == 20);
  CHECK(d.tasks == std::vector<std::string>{"reach the cube"});
  const Eigen::VectorXd s5 = d.states.denormalize(d.episode_states[0].col(5));
  CHECK((s5 - flow_state_vector(rep.steps[4])).norm() < 1e-12);
  const Eigen::VectorXd s0 = d.states.denormalize(d.episode_states[0].col(0));
  CHECK((s0 - flow_state_vector(rep.steps[0])).norm() < 1e-12);
  const std::size_t last = d.windows.size() - 1;
  const FlowBatch b = d.gather(std::span(&last, 1), 16);
  const ActionChunk c = unflatten_chunk(b.chunks.col(0), 16, 32);
  CHECK(c.row(15) == c.row(0));  // tail padded with the last action
  CHECK_THROWS_AS(make_flow_dataset({}), ValidationError);
}
