#include <benchmark/benchmark.h>

#include "retarget/dense_net.hpp"
#include "retarget/dtw.hpp"
#include "retarget/humanoid.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/rng.hpp"

using namespace retarget;

namespace {

Eigen::VectorXd random_q(const KinematicChain& chain, Rng& rng) {
  Eigen::VectorXd q(static_cast<Eigen::Index>(chain.dof()));
  for (std::size_t j = 0; j < chain.dof(); ++j)
    q[static_cast<Eigen::Index>(j)] = rng.uniform(chain.joints()[j].limits.lo, chain.joints()[j].limits.hi);
  return q;
}

void BM_ForwardKinematics(benchmark::State& state) {
  const HumanoidModel m = default_humanoid();
  Rng rng(1);
  const Eigen::VectorXd q = random_q(m.left_arm, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics(m.left_arm, q));
}
BENCHMARK(BM_ForwardKinematics);

// Cold solves from home; arg 0 = restarts.
void BM_ClikCold(benchmark::State& state) {
  const HumanoidModel m = default_humanoid();
  Rng rng(2);
  std::vector<Pose> targets;
  for (int i = 0; i < 64; ++i) targets.push_back(forward_kinematics(m.left_arm, random_q(m.left_arm, rng)));
  IkConfig cfg;
  cfg.restarts = static_cast<int>(state.range(0));
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(clik_solve(m.left_arm, targets[k++ % targets.size()], {m.left_arm.name(), m.left_home}, cfg));
  }
}
BENCHMARK(BM_ClikCold)->Arg(0)->Arg(8);

// Tracking a small perturbation from the previous solution, as the simulator does.
void BM_ClikWarm(benchmark::State& state) {
  const HumanoidModel m = default_humanoid();
  Rng rng(3);
  const Eigen::VectorXd q = random_q(m.left_arm, rng);
  Eigen::VectorXd q2 = q;
  for (Eigen::Index i = 0; i < q2.size(); ++i) q2[i] += 0.01 * rng.normal();
  const Pose target = forward_kinematics(m.left_arm, m.left_arm.clamp(q2));
  IkConfig cfg;
  cfg.restarts = 0;
  for (auto _ : state) benchmark::DoNotOptimize(clik_solve(m.left_arm, target, {m.left_arm.name(), q}, cfg));
}
BENCHMARK(BM_ClikWarm);

Eigen::MatrixXd walk(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd a(3, n);
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    p += 0.1 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    a.col(i) = p;
  }
  return a;
}

void BM_DtwExact(benchmark::State& state) {
  Rng rng(4);
  const Eigen::MatrixXd a = walk(state.range(0), rng), b = walk(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_exact(a, b).distance);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DtwExact)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_DtwFast(benchmark::State& state) {
  Rng rng(4);
  const Eigen::MatrixXd a = walk(state.range(0), rng), b = walk(state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_fast(a, b, 1).distance);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DtwFast)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

// Forward + backward of a manager-sized net; arg 0 = batch.
void BM_DenseNetStep(benchmark::State& state) {
  Rng rng(5);
  DenseNet net({15, 256, 256, 4}, {Activation::kElu, Activation::kElu, Activation::kIdentity}, rng);
  Eigen::MatrixXd x(15, state.range(0));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (auto _ : state) {
    ForwardCache cache;
    const Eigen::MatrixXd y = net.forward(x, cache);
    benchmark::DoNotOptimize(net_backward(net, cache, y).param_grad.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DenseNetStep)->Arg(64)->Arg(800)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
