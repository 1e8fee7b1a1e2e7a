#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "retarget/command.hpp"
#include "retarget/episode.hpp"
#include "retarget/humanoid.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/worker.hpp"

namespace retarget {

// Planning horizon of the heuristic velocity targets.
inline constexpr double kHeuristicHorizon = 1.0;  // s

/// Simulator-only quantities used to label states.
struct PrivilegedInfo {
  double goal_height = 0.75;  // h*(t), m
  double dpx = 0.0;           // base displacement from the reference, in the current base frame, m
  double dpy = 0.0;
  double dtheta = 0.0;        // heading displacement, rad
};

// (-dp / horizon, -dtheta / horizon, h*) clipped to the command ranges.
LowerBodyCommand heuristic_commands(const PrivilegedInfo& priv);

struct WristGoal {
  Pose left;   // world frame
  Pose right;

  friend bool operator==(const WristGoal&, const WristGoal&) = default;
};

inline constexpr int kManagerStateDim = 15;

/// Wrist goals in the current base frame (position + quaternion each, w first)
/// followed by the current torso height.
struct ManagerState {
  Eigen::Matrix<double, kManagerStateDim, 1> features = Eigen::Matrix<double, kManagerStateDim, 1>::Zero();

  Pose left() const;
  Pose right() const;
  double height() const { return features[14]; }

  friend bool operator==(const ManagerState& a, const ManagerState& b) { return a.features == b.features; }
};

ManagerState make_manager_state(const WristGoal& goal, const BaseState& base);

/// World-frame goal sequence built from an (augmented) episode: each wrist goal
/// is the body-relative wrist pose placed at the body's planar pose.
struct GoalStream {
  std::string id;
  std::vector<WristGoal> goals;
  std::vector<double> goal_height;
  std::vector<PlanarPose> body;
  std::vector<double> left_grip, right_grip;
  double dt = 0.05;
  bool is_static = true;

  std::size_t size() const { return goals.size(); }
};

// Uses each step's goal_height when present, else mean wrist z minus
// `wrist_to_torso` clamped to the height range.
GoalStream make_goal_stream(const Episode& ep, double wrist_to_torso = 0.10);

PrivilegedInfo privileged_info(const GoalStream& stream, std::size_t step, const BaseState& base,
                               double horizon = kHeuristicHorizon);

/// Batched lower-body command source.
class ManagerPolicy {
 public:
  virtual ~ManagerPolicy() = default;
  virtual void act(std::span<const ManagerState> states, std::span<LowerBodyCommand> out) const = 0;
};

// Outputs (0, 0, 0, current torso height): stand still.
class HoldPolicy final : public ManagerPolicy {
 public:
  void act(std::span<const ManagerState> states, std::span<LowerBodyCommand> out) const override;
};

// Outputs all zeros (the height is raised to its lower clip bound on ingestion).
class ZeroPolicy final : public ManagerPolicy {
 public:
  void act(std::span<const ManagerState> states, std::span<LowerBodyCommand> out) const override;
};

struct SimConfig {
  HumanoidModel model = default_humanoid();
  WorkerModel worker;
  IkConfig ik{.restarts = 0};  // per-step tracking is warm-started
  double horizon = kHeuristicHorizon;
  bool warm_start = true;  // IK from the previous solution, falling back to home on failure

  void validate() const;
};

/// Single simulated humanoid.
struct SimState {
  BaseState base;
  Eigen::VectorXd q_left;
  Eigen::VectorXd q_right;
  Rng rng;
};

// Base on the body reference at `step`, standing height, arms at home.
SimState reset_state(const SimConfig& cfg, const GoalStream& stream, std::size_t step, Rng rng);

struct StepOutcome {
  LowerBodyCommand command;  // as executed (clipped)
  IkResult left;
  IkResult right;
  WristGoal executed;  // realized wrist poses in the world
};

// World wrist poses for the given base and arm joints.
WristGoal realized_wrists(const HumanoidModel& model, const BaseState& base, const Eigen::VectorXd& q_left,
                          const Eigen::VectorXd& q_right);

/// Command ingestion (the only place commands are clipped), worker tick, then
/// per-arm CLIK towards the goals expressed in the new base frame.
StepOutcome advance(const SimConfig& cfg, SimState& state, const WristGoal& goal, const LowerBodyCommand& raw);

struct RolloutRecord {
  ManagerState state;
  LowerBodyCommand target;    // heuristic label a*
  LowerBodyCommand executed;  // clipped policy command
  WristGoal goal;
  WristGoal realized;
  PoseError left_residual;
  PoseError right_residual;
  bool is_static = true;
};

struct RolloutBatch {
  std::size_t envs = 0;
  std::size_t steps = 0;
  std::vector<RolloutRecord> records;  // env-major, step-minor
  std::vector<std::string> wraps;      // one entry per segment exhaustion

  const RolloutRecord& at(std::size_t env, std::size_t step) const { return records[env * steps + step]; }
};

/// N persistent environments, each bound to a segment (stream, start offset)
/// of a shared goal pool. Exhausted segments are replaced by a freshly sampled
/// one. Each environment owns its random stream, so results do not depend on
/// how stepping is scheduled across threads.
class VectorEnv {
 public:
  VectorEnv(SimConfig cfg, std::vector<GoalStream> pool, std::size_t n_envs, std::uint64_t seed);

  RolloutBatch rollout(const ManagerPolicy& policy, std::size_t steps);

  std::size_t size() const { return envs_.size(); }
  const SimConfig& config() const { return cfg_; }

 private:
  struct Env {
    std::size_t stream = 0;
    std::size_t cursor = 0;
    SimState sim;
    Rng rng;
  };
  void bind_random_segment(Env& env);

  SimConfig cfg_;
  std::vector<GoalStream> pool_;
  std::vector<Env> envs_;
};

// Free-function form of VectorEnv::rollout.
inline RolloutBatch rollout(VectorEnv& envs, const ManagerPolicy& policy, std::size_t steps) {
  return envs.rollout(policy, steps);
}

struct StreamTrace {
  std::vector<LowerBodyCommand> commands;
  std::vector<WristGoal> realized;
  std::vector<PoseError> left_residual, right_residual;
  std::vector<BaseState> base;
  std::vector<Eigen::VectorXd> q_left, q_right;
};

/// Closed-loop tracking of a whole stream from a fresh reset (first
/// `max_steps` steps when nonzero). Used for validation and retargeting.
StreamTrace track_stream(const SimConfig& cfg, const ManagerPolicy& policy, const GoalStream& stream,
                         std::uint64_t seed, std::size_t max_steps = 0);

}  // namespace retarget
