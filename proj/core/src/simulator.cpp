#include "retarget/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "retarget/error.hpp"
#include "retarget/parallel.hpp"

namespace retarget {

LowerBodyCommand heuristic_commands(const PrivilegedInfo& p) {
  return clip({-p.dpx / kHeuristicHorizon, -p.dpy / kHeuristicHorizon, -p.dtheta / kHeuristicHorizon, p.goal_height});
}

namespace {

void put_pose(Eigen::Matrix<double, kManagerStateDim, 1>& f, int at, const Pose& p) {
  f.segment<3>(at) = p.position();
  const auto& q = p.orientation();
  f[at + 3] = q.w();
  f[at + 4] = q.x();
  f[at + 5] = q.y();
  f[at + 6] = q.z();
}

Pose get_pose(const Eigen::Matrix<double, kManagerStateDim, 1>& f, int at) {
  return {f.segment<3>(at), Quat(f[at + 3], f[at + 4], f[at + 5], f[at + 6])};
}

}  // namespace

Pose ManagerState::left() const { return get_pose(features, 0); }
Pose ManagerState::right() const { return get_pose(features, 7); }

ManagerState make_manager_state(const WristGoal& goal, const BaseState& base) {
  const Pose inv = base.pose().inverse();
  ManagerState s;
  put_pose(s.features, 0, inv * goal.left);
  put_pose(s.features, 7, inv * goal.right);
  s.features[14] = base.h;
  return s;
}

GoalStream make_goal_stream(const Episode& ep, double wrist_to_torso) {
  validate(ep);
  GoalStream g;
  g.id = ep.episode_id;
  g.dt = 1.0 / ep.frequency;
  g.is_static = ep.is_static();
  const auto n = ep.steps.size();
  g.goals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = ep.steps[i];
    const PlanarPose b = ep.body_at(i);
    const Pose body = Pose::planar(b.x, b.y, 0.0, b.yaw);
    g.goals.push_back({body * s.left_wrist, body * s.right_wrist});
    g.body.push_back(b);
    const double mid = 0.5 * (s.left_wrist.position().z() + s.right_wrist.position().z());
    g.goal_height.push_back(s.goal_height.value_or(std::clamp(mid - wrist_to_torso, kCommandRanges.h.lo, kCommandRanges.h.hi)));
    g.left_grip.push_back(s.left_grip);
    g.right_grip.push_back(s.right_grip);
  }
  return g;
}

PrivilegedInfo privileged_info(const GoalStream& stream, std::size_t step, const BaseState& base, double horizon) {
  const auto ahead = static_cast<std::size_t>(std::llround(horizon / stream.dt));
  const std::size_t idx = std::min(step + ahead, stream.size() - 1);
  const PlanarPose& ref = stream.body[idx];
  const double wx = base.x - ref.x, wy = base.y - ref.y;
  const double c = std::cos(base.yaw), s = std::sin(base.yaw);
  PrivilegedInfo p;
  p.goal_height = stream.goal_height[step];
  p.dpx = c * wx + s * wy;
  p.dpy = -s * wx + c * wy;
  p.dtheta = wrap_angle(base.yaw - ref.yaw);
  return p;
}

void HoldPolicy::act(std::span<const ManagerState> states, std::span<LowerBodyCommand> out) const {
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = {0.0, 0.0, 0.0, states[i].height()};
}

void ZeroPolicy::act(std::span<const ManagerState> states, std::span<LowerBodyCommand> out) const {
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = {0.0, 0.0, 0.0, 0.0};
}

void SimConfig::validate() const {
  worker.validate();
  if (!(horizon > 0.0)) throw ValidationError("sim: horizon must be positive");
  if (!(ik.step_scale > 0.0) || ik.max_iterations < 0 || !(ik.damping >= 0.0))
    throw ValidationError("sim: invalid IK configuration");
}

SimState reset_state(const SimConfig& cfg, const GoalStream& stream, std::size_t step, Rng rng) {
  SimState s{.base = {}, .q_left = cfg.model.left_home, .q_right = cfg.model.right_home, .rng = std::move(rng)};
  const PlanarPose& b = stream.body.at(step);
  s.base.x = b.x;
  s.base.y = b.y;
  s.base.yaw = wrap_angle(b.yaw);
  s.base.h = cfg.model.standing_height;
  return s;
}

WristGoal realized_wrists(const HumanoidModel& model, const BaseState& base, const Eigen::VectorXd& q_left,
                          const Eigen::VectorXd& q_right) {
  const Pose b = base.pose();
  return {b * model.left_mount * forward_kinematics(model.left_arm, q_left),
          b * model.right_mount * forward_kinematics(model.right_arm, q_right)};
}

namespace {

// Warm start from the previous solution; a failed warm attempt is retried from
// home and the better of the two kept, unless the target is out of reach.
IkResult solve_arm(const SimConfig& cfg, const KinematicChain& chain, const Pose& target, const Eigen::VectorXd& prev,
                   const Eigen::VectorXd& home) {
  if (!cfg.warm_start) return clik_solve(chain, target, {chain.name(), home}, cfg.ik);
  IkResult r = clik_solve(chain, target, {chain.name(), prev}, cfg.ik);
  if (r.converged || target.position().norm() > reach_bound(chain)) return r;
  IkResult cold = clik_solve(chain, target, {chain.name(), home}, cfg.ik);
  cold.iterations += r.iterations;
  const auto score = [](const IkResult& x) { return x.residual.position + x.residual.rotation; };
  if (cold.converged || score(cold) < score(r)) return cold;
  r.iterations = cold.iterations;
  return r;
}

}  // namespace

StepOutcome advance(const SimConfig& cfg, SimState& state, const WristGoal& goal, const LowerBodyCommand& raw) {
  StepOutcome out;
  out.command = clip(raw);
  state.base = worker_step(state.base, out.command, cfg.worker, state.rng);
  const Pose b = state.base.pose();
  const auto& m = cfg.model;
  const Pose left_target = (b * m.left_mount).inverse() * goal.left;
  const Pose right_target = (b * m.right_mount).inverse() * goal.right;
  out.left = solve_arm(cfg, m.left_arm, left_target, state.q_left, m.left_home);
  out.right = solve_arm(cfg, m.right_arm, right_target, state.q_right, m.right_home);
  state.q_left = out.left.q.values;
  state.q_right = out.right.q.values;
  out.executed = realized_wrists(m, state.base, state.q_left, state.q_right);
  return out;
}

VectorEnv::VectorEnv(SimConfig cfg, std::vector<GoalStream> pool, std::size_t n_envs, std::uint64_t seed)
    : cfg_(std::move(cfg)), pool_(std::move(pool)) {
  cfg_.validate();
  if (pool_.empty()) throw ValidationError("VectorEnv: empty goal pool");
  for (const auto& g : pool_)
    if (g.size() < 2) throw ValidationError("VectorEnv: goal stream '" + g.id + "' has fewer than 2 steps");
  if (n_envs == 0) throw ValidationError("VectorEnv: need at least one environment");
  const Rng root(seed);
  envs_.resize(n_envs);
  for (std::size_t e = 0; e < n_envs; ++e) {
    envs_[e].rng = root.split(2 * e);
    envs_[e].sim.rng = root.split(2 * e + 1);
    bind_random_segment(envs_[e]);
  }
}

void VectorEnv::bind_random_segment(Env& env) {
  env.stream = static_cast<std::size_t>(env.rng.below(pool_.size()));
  const auto& g = pool_[env.stream];
  env.cursor = static_cast<std::size_t>(env.rng.below(g.size() - 1));
  env.sim = reset_state(cfg_, g, env.cursor, std::move(env.sim.rng));
}

RolloutBatch VectorEnv::rollout(const ManagerPolicy& policy, std::size_t steps) {
  const std::size_t n = envs_.size();
  RolloutBatch batch;
  batch.envs = n;
  batch.steps = steps;
  batch.records.resize(n * steps);
  std::vector<ManagerState> states(n);
  std::vector<LowerBodyCommand> labels(n), commands(n);
  std::vector<std::vector<std::string>> wraps(n);

  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t e = 0; e < n; ++e) {
      const Env& env = envs_[e];
      const GoalStream& g = pool_[env.stream];
      states[e] = make_manager_state(g.goals[env.cursor], env.sim.base);
      labels[e] = heuristic_commands(privileged_info(g, env.cursor, env.sim.base, cfg_.horizon));
    }
    policy.act(states, commands);
    parallel_for(n, [&](std::size_t e) {
      Env& env = envs_[e];
      const GoalStream& g = pool_[env.stream];
      const WristGoal& goal = g.goals[env.cursor];
      const StepOutcome o = advance(cfg_, env.sim, goal, commands[e]);
      RolloutRecord& r = batch.records[e * steps + t];
      r.state = states[e];
      r.target = labels[e];
      r.executed = o.command;
      r.goal = goal;
      r.realized = o.executed;
      r.left_residual = pose_error(o.executed.left, goal.left);
      r.right_residual = pose_error(o.executed.right, goal.right);
      r.is_static = g.is_static;
      if (++env.cursor >= g.size()) {
        wraps[e].push_back("env " + std::to_string(e) + ": segment of '" + g.id + "' exhausted");
        bind_random_segment(env);
      }
    });
  }
  for (auto& w : wraps)
    for (auto& msg : w) batch.wraps.push_back(std::move(msg));
  return batch;
}

StreamTrace track_stream(const SimConfig& cfg, const ManagerPolicy& policy, const GoalStream& stream,
                         std::uint64_t seed, std::size_t max_steps) {
  const std::size_t n = max_steps == 0 ? stream.size() : std::min(max_steps, stream.size());
  SimState sim = reset_state(cfg, stream, 0, Rng(seed));
  StreamTrace tr;
  tr.commands.reserve(n);
  tr.realized.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const ManagerState s = make_manager_state(stream.goals[k], sim.base);
    LowerBodyCommand raw;
    policy.act(std::span(&s, 1), std::span(&raw, 1));
    const StepOutcome o = advance(cfg, sim, stream.goals[k], raw);
    tr.commands.push_back(o.command);
    tr.realized.push_back(o.executed);
    tr.left_residual.push_back(pose_error(o.executed.left, stream.goals[k].left));
    tr.right_residual.push_back(pose_error(o.executed.right, stream.goals[k].right));
    tr.base.push_back(sim.base);
    tr.q_left.push_back(sim.q_left);
    tr.q_right.push_back(sim.q_right);
  }
  return tr;
}

}  // namespace retarget
