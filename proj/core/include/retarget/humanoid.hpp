#pragma once

#include <string>

#include "retarget/kinematics.hpp"

namespace retarget {

/// Dual-arm upper body on a floating torso.
///
/// The torso ("base") frame sits at (x, y, h) with heading yaw. Each arm chain
/// is expressed in its own mount frame, placed in the base frame by `*_mount`.
struct HumanoidModel {
  KinematicChain left_arm;
  KinematicChain right_arm;
  Pose left_mount;
  Pose right_mount;
  Eigen::VectorXd left_home;
  Eigen::VectorXd right_home;
  // Vertical offset from the torso origin down from the wrist midline; the
  // heuristic height target is mean wrist z minus this value.
  double wrist_to_torso = 0.10;
  double standing_height = 0.75;

  // Wrist poses in the base frame at the home configuration.
  Pose left_home_wrist() const;
  Pose right_home_wrist() const;
};

// G1-like proportions: upper arm 0.30 m, forearm 0.28 m, shoulder span 0.30 m,
// 7 dof per arm with a spherical wrist.
HumanoidModel default_humanoid();

// 7-dof hand with an open and a closed posture.
struct HandKeyframes {
  JointVector open;
  JointVector closed;
  std::vector<JointLimits> limits;
};

HandKeyframes default_hand_keyframes(const std::string& side);

}  // namespace retarget
