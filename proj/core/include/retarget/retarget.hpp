#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retarget/episode.hpp"
#include "retarget/humanoid.hpp"
#include "retarget/metrics.hpp"
#include "retarget/simulator.hpp"

namespace retarget {

/// Whole-body action of the target humanoid for one control tick.
struct WholeBodyAction {
  JointVector left_arm;
  JointVector right_arm;
  JointVector left_hand;
  JointVector right_hand;
  LowerBodyCommand command;  // clipped, as executed

  friend bool operator==(const WholeBodyAction&, const WholeBodyAction&) = default;
};

// Per-joint linear interpolation from the closed (0) to the open (1) posture.
JointVector map_gripper(double opening, const HandKeyframes& keyframes);

struct RetargetConfig {
  SimConfig sim;
  HandKeyframes left_hand = default_hand_keyframes("left");
  HandKeyframes right_hand = default_hand_keyframes("right");
  double control_rate = 20.0;  // Hz
  std::string embodiment = "humanoid-dual-arm-7dof";
  std::uint64_t seed = 0;

  void validate() const;
};

struct HierarchicalOutcome {
  WholeBodyAction action;
  StepOutcome step;
};

/// Manager -> clip -> worker tick -> per-arm CLIK (warm-started per the sim
/// config) -> hand mapping. Advances `state` in place.
HierarchicalOutcome hierarchical_step(const RetargetConfig& cfg, SimState& state, const WristGoal& goal,
                                      double left_grip, double right_grip, const ManagerPolicy& manager);

struct RetargetedStep {
  double t = 0.0;
  WholeBodyAction action;
  WristGoal goal;      // world frame
  WristGoal realized;  // world frame
  BaseState base;      // after the tick
  PoseError left_residual;
  PoseError right_residual;

  friend bool operator==(const RetargetedStep&, const RetargetedStep&) = default;
};

struct RetargetedEpisode {
  std::string episode_id;  // source episode
  std::string task_id;
  std::string language;
  std::vector<std::string> vision_refs;
  std::string source_embodiment;
  std::string embodiment;
  double frequency = 20.0;
  std::vector<RetargetedStep> steps;

  TrackingMetrics summary() const;

  friend bool operator==(const RetargetedEpisode&, const RetargetedEpisode&) = default;
};

/// Resamples to `rate` Hz on the grid t0 + k / rate, k = 0.. while inside the
/// source time span: linear position, slerp orientation, linear grips and
/// goal heights, wrapped-linear body yaw. Episodes already at `rate` are
/// returned unchanged.
Episode resample_episode(const Episode& ep, double rate);

/// Replays one preprocessed episode through the hierarchical model from a
/// fresh simulator state placed on the episode's initial body pose. Rejects
/// episodes without the preprocessed provenance flag.
RetargetedEpisode retarget_episode(const Episode& ep, const ManagerPolicy& manager, const RetargetConfig& cfg);

// Episode-parallel; output sorted by source episode id.
std::vector<RetargetedEpisode> retarget_episodes(const std::vector<Episode>& eps, const ManagerPolicy& manager,
                                                 const RetargetConfig& cfg);

}  // namespace retarget
