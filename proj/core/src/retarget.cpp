#include "retarget/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "retarget/error.hpp"
#include "retarget/parallel.hpp"

namespace retarget {

JointVector map_gripper(double opening, const HandKeyframes& k) {
  if (!(opening >= 0.0 && opening <= 1.0))
    throw ValidationError("map_gripper: opening " + std::to_string(opening) + " outside [0, 1]");
  if (k.open.values.size() != k.closed.values.size())
    throw ValidationError("map_gripper: open and closed keyframes differ in size");
  JointVector out{k.open.chain, k.closed.values + opening * (k.open.values - k.closed.values)};
  if (opening == 1.0) out.values = k.open.values;
  if (opening == 0.0) out.values = k.closed.values;
  return out;
}

void RetargetConfig::validate() const {
  sim.validate();
  if (!(control_rate > 0.0)) throw ValidationError("retarget: control_rate must be positive");
  for (const HandKeyframes* k : {&left_hand, &right_hand}) {
    if (k->open.values.size() != k->closed.values.size() ||
        static_cast<Eigen::Index>(k->limits.size()) != k->open.values.size())
      throw ValidationError("retarget: hand keyframes and limits must have matching sizes");
    for (std::size_t j = 0; j < k->limits.size(); ++j) {
      const auto& l = k->limits[j];
      const auto in = [&](double v) { return v >= l.lo && v <= l.hi; };
      if (!in(k->open.values[static_cast<Eigen::Index>(j)]) || !in(k->closed.values[static_cast<Eigen::Index>(j)]))
        throw ValidationError("retarget: hand keyframe outside joint limits");
    }
  }
}

HierarchicalOutcome hierarchical_step(const RetargetConfig& cfg, SimState& state, const WristGoal& goal,
                                      double left_grip, double right_grip, const ManagerPolicy& manager) {
  const ManagerState s = make_manager_state(goal, state.base);
  LowerBodyCommand raw;
  manager.act(std::span(&s, 1), std::span(&raw, 1));
  HierarchicalOutcome out;
  out.step = advance(cfg.sim, state, goal, raw);
  out.action.left_arm = out.step.left.q;
  out.action.right_arm = out.step.right.q;
  out.action.left_hand = map_gripper(left_grip, cfg.left_hand);
  out.action.right_hand = map_gripper(right_grip, cfg.right_hand);
  out.action.command = out.step.command;
  return out;
}

TrackingMetrics RetargetedEpisode::summary() const {
  TrackingAccumulator acc;
  for (const auto& s : steps) acc.add(s.left_residual, s.right_residual);
  return acc.finish();
}

Episode resample_episode(const Episode& ep, double rate) {
  validate(ep);
  if (!(rate > 0.0)) throw ValidationError("resample_episode: rate must be positive");
  if (std::abs(ep.frequency - rate) < 1e-9) return ep;
  Episode out = ep;
  out.frequency = rate;
  out.steps.clear();
  const double t0 = ep.steps.front().t, t1 = ep.steps.back().t;
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) * rate + 1e-9)) + 1;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    while (seg + 2 < ep.steps.size() && ep.steps[seg + 1].t <= t) ++seg;
    const EpisodeStep& a = ep.steps[seg];
    const EpisodeStep& b = ep.steps[seg + 1];
    const double s = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    EpisodeStep st;
    st.t = t;
    st.left_wrist = interpolate(a.left_wrist, b.left_wrist, s);
    st.right_wrist = interpolate(a.right_wrist, b.right_wrist, s);
    st.left_grip = std::clamp(a.left_grip + s * (b.left_grip - a.left_grip), 0.0, 1.0);
    st.right_grip = std::clamp(a.right_grip + s * (b.right_grip - a.right_grip), 0.0, 1.0);
    if (a.body || b.body) {
      const PlanarPose pa = a.body.value_or(PlanarPose{}), pb = b.body.value_or(PlanarPose{});
      st.body = PlanarPose{pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y),
                           wrap_angle(pa.yaw + s * wrap_angle(pb.yaw - pa.yaw))};
    }
    if (a.goal_height && b.goal_height) st.goal_height = *a.goal_height + s * (*b.goal_height - *a.goal_height);
    out.steps.push_back(st);
  }
  if (out.steps.size() < 2) throw ValidationError("resample_episode: '" + ep.episode_id + "' too short to resample");
  std::ostringstream hz;
  hz << ep.frequency;
  out.metadata["resampled_from_hz"] = hz.str();
  return out;
}

RetargetedEpisode retarget_episode(const Episode& source, const ManagerPolicy& manager, const RetargetConfig& cfg) {
  if (!source.preprocessed())
    throw ValidationError("retarget: episode '" + source.episode_id +
                          "' is not preprocessed; run the preprocess stage first");
  const Episode ep = resample_episode(source, cfg.control_rate);
  const GoalStream stream = make_goal_stream(ep, cfg.sim.model.wrist_to_torso);
  SimState sim = reset_state(cfg.sim, stream, 0, Rng(mix_seed(cfg.seed ^ hash_string(ep.episode_id))));

  RetargetedEpisode out;
  out.episode_id = ep.episode_id;
  out.task_id = ep.task_id;
  out.language = ep.language;
  out.vision_refs = ep.vision_refs;
  out.source_embodiment = ep.embodiment;
  out.embodiment = cfg.embodiment;
  out.frequency = cfg.control_rate;
  out.steps.reserve(stream.size());
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const WristGoal& goal = stream.goals[k];
    HierarchicalOutcome h = hierarchical_step(cfg, sim, goal, stream.left_grip[k], stream.right_grip[k], manager);
    RetargetedStep st;
    st.t = ep.steps[k].t;
    st.action = std::move(h.action);
    st.goal = goal;
    st.realized = h.step.executed;
    st.base = sim.base;
    st.left_residual = pose_error(st.realized.left, goal.left);
    st.right_residual = pose_error(st.realized.right, goal.right);
    out.steps.push_back(std::move(st));
  }
  return out;
}

std::vector<RetargetedEpisode> retarget_episodes(const std::vector<Episode>& eps, const ManagerPolicy& manager,
                                                 const RetargetConfig& cfg) {
  cfg.validate();
  std::vector<RetargetedEpisode> out(eps.size());
  parallel_for(eps.size(), [&](std::size_t i) { out[i] = retarget_episode(eps[i], manager, cfg); });
  std::stable_sort(out.begin(), out.end(),
                   [](const RetargetedEpisode& a, const RetargetedEpisode& b) { return a.episode_id < b.episode_id; });
  return out;
}

}  // namespace retarget
