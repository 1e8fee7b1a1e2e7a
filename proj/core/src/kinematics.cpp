#include "retarget/kinematics.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "retarget/error.hpp"

namespace retarget {

KinematicChain::KinematicChain(std::string name, std::vector<Joint> joints, Pose tool)
    : name_(std::move(name)), joints_(std::move(joints)), tool_(tool) {
  if (joints_.empty()) throw ValidationError("chain '" + name_ + "' has no joints");
  for (auto& j : joints_) {
    const double n = j.axis.norm();
    if (!(std::abs(n - 1.0) < 1e-9))
      throw ValidationError("chain '" + name_ + "': joint '" + j.name + "' axis is not unit length");
    if (!(j.limits.lo < j.limits.hi))
      throw ValidationError("chain '" + name_ + "': joint '" + j.name + "' has lo >= hi");
  }
}

Eigen::VectorXd KinematicChain::neutral() const {
  Eigen::VectorXd q(dof());
  for (std::size_t i = 0; i < dof(); ++i) q[i] = 0.5 * (joints_[i].limits.lo + joints_[i].limits.hi);
  return q;
}

Eigen::VectorXd KinematicChain::clamp(const Eigen::VectorXd& q) const {
  Eigen::VectorXd r = q;
  for (std::size_t i = 0; i < dof(); ++i) r[i] = std::clamp(r[i], joints_[i].limits.lo, joints_[i].limits.hi);
  return r;
}

bool KinematicChain::within_limits(const Eigen::VectorXd& q, double tol) const {
  if (static_cast<std::size_t>(q.size()) != dof()) return false;
  for (std::size_t i = 0; i < dof(); ++i)
    if (q[i] < joints_[i].limits.lo - tol || q[i] > joints_[i].limits.hi + tol) return false;
  return true;
}

namespace {

void check_dof(const KinematicChain& chain, const Eigen::VectorXd& q) {
  if (static_cast<std::size_t>(q.size()) != chain.dof())
    throw ValidationError("chain '" + chain.name() + "' expects " + std::to_string(chain.dof()) +
                          " joint values, got " + std::to_string(q.size()));
}

}  // namespace

Pose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_dof(chain, q);
  Pose t;
  const auto& joints = chain.joints();
  for (std::size_t i = 0; i < joints.size(); ++i) {
    t = t * joints[i].offset * Pose::from_rotation(Quat(Eigen::AngleAxisd(q[i], joints[i].axis)));
  }
  return t * chain.tool();
}

double reach_bound(const KinematicChain& chain) {
  double r = chain.tool().position().norm();
  for (const auto& j : chain.joints()) r += j.offset.position().norm();
  return r;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const KinematicChain& chain, const Eigen::VectorXd& q,
                                                  Pose* tool_pose) {
  check_dof(chain, q);
  const auto& joints = chain.joints();
  const auto n = static_cast<Eigen::Index>(joints.size());
  Eigen::Matrix<double, 3, Eigen::Dynamic> origins(3, n), axes(3, n);
  Pose t;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& j = joints[static_cast<std::size_t>(i)];
    t = t * j.offset;
    origins.col(i) = t.position();
    axes.col(i) = t.orientation() * j.axis;
    t = t * Pose::from_rotation(Quat(Eigen::AngleAxisd(q[i], j.axis)));
  }
  t = t * chain.tool();
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 z = axes.col(i);
    jac.block<3, 1>(0, i) = z.cross(t.position() - Vec3(origins.col(i)));
    jac.block<3, 1>(3, i) = z;
  }
  if (tool_pose) *tool_pose = t;
  return jac;
}

namespace {

IkResult solve_from(const KinematicChain& chain, const Pose& target, const Eigen::VectorXd& q0, const IkConfig& cfg) {
  Eigen::VectorXd q = chain.clamp(q0);
  Eigen::VectorXd best_q = q;
  PoseError best_err{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double best_score = std::numeric_limits<double>::infinity();
  double stall_ref = best_score;
  int stalled = 0;
  const double lambda2 = cfg.damping * cfg.damping;

  IkResult out;
  int iter = 0;
  for (;; ++iter) {
    Pose tool;
    const auto jac = jacobian(chain, q, &tool);
    const PoseError err = pose_error(tool, target);
    const double score = err.position + err.rotation;
    if (score < best_score) {
      best_score = score;
      best_err = err;
      best_q = q;
    }
    if (err.position <= cfg.pos_tol && err.rotation <= cfg.rot_tol) {
      out.converged = true;
      out.residual = err;
      break;
    }
    if (iter >= cfg.max_iterations) break;
    if (cfg.stall_iterations > 0) {
      if (best_score < stall_ref - cfg.stall_tol) {
        stall_ref = best_score;
        stalled = 0;
      } else if (++stalled >= cfg.stall_iterations) {
        break;
      }
    }

    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.position() - tool.position();
    e.tail<3>() = rotation_vector(target.orientation() * tool.orientation().conjugate());
    // Joints resting on a limit and pushed further out are dropped from the
    // Jacobian and the step is re-solved for the remaining joints.
    Eigen::Matrix<double, 6, Eigen::Dynamic> active = jac;
    Eigen::VectorXd dq;
    for (std::size_t pass = 0; pass <= chain.dof(); ++pass) {
      Eigen::Matrix<double, 6, 6> normal = active * active.transpose();
      normal.diagonal().array() += lambda2;
      dq = active.transpose() * normal.ldlt().solve(e);
      bool changed = false;
      for (std::size_t j = 0; j < chain.dof(); ++j) {
        const auto& lim = chain.joints()[j].limits;
        const auto jj = static_cast<Eigen::Index>(j);
        if ((q[jj] <= lim.lo && dq[jj] < 0.0) || (q[jj] >= lim.hi && dq[jj] > 0.0)) {
          active.col(jj).setZero();
          changed = true;
        }
      }
      if (!changed) break;
    }
    q = chain.clamp(q + cfg.step_scale * dq);
  }
  out.q = JointVector{chain.name(), out.converged ? q : best_q};
  if (!out.converged) out.residual = best_err;
  out.iterations = iter;
  return out;
}

// k-th point (k >= 1) of the Halton sequence scaled into the joint box.
Eigen::VectorXd halton_seed(const KinematicChain& chain, int k) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  Eigen::VectorXd q(static_cast<Eigen::Index>(chain.dof()));
  for (std::size_t j = 0; j < chain.dof(); ++j) {
    const int base = kPrimes[j % std::size(kPrimes)];
    double f = 1.0, r = 0.0;
    for (int i = k; i > 0; i /= base) {
      f /= base;
      r += f * (i % base);
    }
    const auto& lim = chain.joints()[j].limits;
    q[static_cast<Eigen::Index>(j)] = lim.lo + r * (lim.hi - lim.lo);
  }
  return q;
}

}  // namespace

IkResult clik_solve(const KinematicChain& chain, const Pose& target, const JointVector& q0, const IkConfig& cfg) {
  check_dof(chain, q0.values);
  IkResult best = solve_from(chain, target, q0.values, cfg);
  int total = best.iterations;
  for (int k = 1; k <= cfg.restarts && !best.converged; ++k) {
    IkResult r = solve_from(chain, target, halton_seed(chain, k), cfg);
    total += r.iterations;
    if (r.converged || r.residual.position + r.residual.rotation < best.residual.position + best.residual.rotation)
      best = std::move(r);
  }
  best.iterations = total;
  return best;
}

}  // namespace retarget
