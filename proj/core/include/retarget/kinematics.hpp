#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "retarget/pose.hpp"

namespace retarget {

struct JointLimits {
  double lo = 0.0;  // rad
  double hi = 0.0;  // rad
};

struct Joint {
  std::string name;
  Vec3 axis = Vec3::UnitZ();  // unit, in the joint's parent frame
  Pose offset;                // parent frame -> joint frame, before rotation
  JointLimits limits;
};

/// Serial chain of revolute joints. Immutable after construction.
///
/// FK is `offset_0 * R(axis_0, q_0) * offset_1 * ... * R(axis_n, q_n) * tool`.
class KinematicChain {
 public:
  KinematicChain(std::string name, std::vector<Joint> joints, Pose tool = Pose::identity());

  const std::string& name() const { return name_; }
  std::size_t dof() const { return joints_.size(); }
  const std::vector<Joint>& joints() const { return joints_; }
  const Pose& tool() const { return tool_; }

  // Middle of every joint range.
  Eigen::VectorXd neutral() const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& q) const;
  bool within_limits(const Eigen::VectorXd& q, double tol = 0.0) const;

 private:
  std::string name_;
  std::vector<Joint> joints_;
  Pose tool_;
};

/// Joint positions tagged with the chain they belong to.
struct JointVector {
  std::string chain;
  Eigen::VectorXd values;  // rad

  friend bool operator==(const JointVector& a, const JointVector& b) {
    return a.chain == b.chain && a.values.size() == b.values.size() && a.values == b.values;
  }
};

Pose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q);
inline Pose forward_kinematics(const KinematicChain& chain, const JointVector& q) {
  return forward_kinematics(chain, q.values);
}

// Upper bound on the distance from the chain base to the tool point: the sum
// of all link and tool translation lengths.
double reach_bound(const KinematicChain& chain);

// Geometric Jacobian (rows: linear velocity, angular velocity) of the tool
// frame in the chain base frame. Also returns the tool pose.
Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const KinematicChain& chain,
                                                  const Eigen::VectorXd& q, Pose* tool_pose = nullptr);

struct IkConfig {
  double damping = 1e-3;     // lambda; the normal matrix is J J^T + lambda^2 I
  double step_scale = 0.5;
  double pos_tol = 1e-4;     // m
  double rot_tol = 1e-3;     // rad
  int max_iterations = 200;
  // Give up early when the best residual has not improved by stall_tol
  // (m + rad) for stall_iterations consecutive iterations. 0 disables.
  int stall_iterations = 20;
  double stall_tol = 1e-7;
  // Extra attempts from fixed low-discrepancy seeds inside the joint box when
  // the attempt from q0 does not converge; the best attempt is returned.
  int restarts = 8;
};

struct IkResult {
  JointVector q;
  PoseError residual;
  bool converged = false;
  int iterations = 0;
};

/// Damped-least-squares closed-loop IK from q0 towards `target`. Joints held
/// at a limit and pushed outwards are dropped from the step.
///
/// Never throws for unreachable targets: the best iterate found (joint-clamped)
/// is returned with converged = false and its true residual.
IkResult clik_solve(const KinematicChain& chain, const Pose& target, const JointVector& q0,
                    const IkConfig& cfg = {});

}  // namespace retarget
