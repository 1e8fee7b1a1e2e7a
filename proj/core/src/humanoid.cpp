#include "retarget/humanoid.hpp"

#include <numbers>

namespace retarget {

namespace {

KinematicChain make_arm(const std::string& side) {
  const bool left = side == "left";
  const double roll_lo = left ? -0.3 : -2.2;
  const double roll_hi = left ? 2.2 : 0.3;
  std::vector<Joint> joints{
      {side + "_shoulder_pitch", Vec3::UnitY(), Pose::identity(), {-3.0, 2.6}},
      {side + "_shoulder_roll", Vec3::UnitX(), Pose::identity(), {roll_lo, roll_hi}},
      {side + "_shoulder_yaw", Vec3::UnitZ(), Pose::identity(), {-2.6, 2.6}},
      {side + "_elbow", Vec3::UnitY(), Pose::from_translation(Vec3(0.0, 0.0, -0.30)), {-2.6, 0.1}},
      {side + "_wrist_roll", Vec3::UnitZ(), Pose::from_translation(Vec3(0.0, 0.0, -0.28)), {-1.97, 1.97}},
      {side + "_wrist_pitch", Vec3::UnitY(), Pose::identity(), {-1.6, 1.6}},
      {side + "_wrist_yaw", Vec3::UnitX(), Pose::identity(), {-1.6, 1.6}},
  };
  return KinematicChain(side + "_arm", std::move(joints));
}

Eigen::VectorXd arm_home() {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(7);
  q[3] = -std::numbers::pi / 2.0;
  return q;
}

}  // namespace

Pose HumanoidModel::left_home_wrist() const { return left_mount * forward_kinematics(left_arm, left_home); }
Pose HumanoidModel::right_home_wrist() const { return right_mount * forward_kinematics(right_arm, right_home); }

HumanoidModel default_humanoid() {
  return HumanoidModel{
      .left_arm = make_arm("left"),
      .right_arm = make_arm("right"),
      .left_mount = Pose::from_translation(Vec3(0.0, 0.15, 0.40)),
      .right_mount = Pose::from_translation(Vec3(0.0, -0.15, 0.40)),
      .left_home = arm_home(),
      .right_home = arm_home(),
  };
}

HandKeyframes default_hand_keyframes(const std::string& side) {
  // thumb (3), index (2), middle (2); right hand mirrors the thumb abduction.
  const double m = side == "right" ? -1.0 : 1.0;
  HandKeyframes k;
  k.limits = {{-1.05, 1.05}, {-0.72, 0.92}, {0.0, 1.74}, {-1.57, 0.0}, {-1.74, 0.0}, {-1.57, 0.0}, {-1.74, 0.0}};
  Eigen::VectorXd open = Eigen::VectorXd::Zero(7);
  Eigen::VectorXd closed(7);
  closed << 0.0, m * 0.6, 1.2, -1.2, -1.4, -1.2, -1.4;
  if (m < 0) k.limits[1] = {-0.92, 0.72};
  k.open = {side + "_hand", open};
  k.closed = {side + "_hand", closed};
  return k;
}

}  // namespace retarget
