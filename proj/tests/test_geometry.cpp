#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "retarget/chain_io.hpp"
#include "retarget/humanoid.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/pose.hpp"
#include "retarget/rng.hpp"

using namespace retarget;

namespace {

// Homogeneous-matrix FK, written independently of Pose/compose.
Eigen::Matrix4d fk_matrix(const KinematicChain& chain, const Eigen::VectorXd& q) {
  auto hom = [](const Pose& p) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = p.orientation().toRotationMatrix();
    m.topRightCorner<3, 1>() = p.position();
    return m;
  };
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Joint& j = chain.joints()[i];
    Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
    r.topLeftCorner<3, 3>() = Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis).toRotationMatrix();
    t = t * hom(j.offset) * r;
  }
  return t * hom(chain.tool());
}

Eigen::VectorXd random_q(const KinematicChain& chain, Rng& rng) {
  Eigen::VectorXd q(chain.dof());
  for (std::size_t i = 0; i < chain.dof(); ++i)
    q[static_cast<Eigen::Index>(i)] = rng.uniform(chain.joints()[i].limits.lo, chain.joints()[i].limits.hi);
  return q;
}

}  // namespace

TEST_CASE("pose composition and inverse") {
  const Pose a = Pose::from_axis_angle(Vec3(1, 2, 3).normalized(), 0.7, Vec3(0.1, -0.2, 0.3));
  const Pose b = Pose::from_axis_angle(Vec3(-1, 0, 2).normalized(), -1.1, Vec3(0.5, 0.0, -0.4));
  const Pose ab = a * b;
  const Vec3 p(0.3, 0.2, 0.1);
  CHECK((ab.transform_point(p) - a.transform_point(b.transform_point(p))).norm() < 1e-14);
  const Pose id = a * a.inverse();
  CHECK(id.position().norm() < 1e-15);
  CHECK(rotation_angle(id.orientation(), Quat::Identity()) < 1e-15);
}

TEST_CASE("quaternions are stored sign-canonical") {
  const Pose p(Vec3::Zero(), Quat(-0.5, 0.5, 0.5, 0.5));
  CHECK(p.orientation().w() == doctest::Approx(0.5));
  CHECK(rotation_angle(p.orientation(), Quat(-0.5, 0.5, 0.5, 0.5)) < 1e-15);
}

TEST_CASE("pose error uses the geodesic angle") {
  const Pose a = Pose::identity();
  const Pose b = Pose::from_axis_angle(Vec3::UnitZ(), 1.0, Vec3(0.3, 0.4, 0.0));
  const PoseError e = pose_error(a, b);
  CHECK(e.position == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e.rotation == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rotation_angle(Quat::Identity(), Quat(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()))) ==
        doctest::Approx(std::numbers::pi));
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(yaw_of(Quat(Eigen::AngleAxisd(0.4, Vec3::UnitZ()))) == doctest::Approx(0.4));
}

TEST_CASE("forward kinematics matches a homogeneous-matrix oracle") {
  const HumanoidModel m = default_humanoid();
  Rng rng(3);
  for (const KinematicChain* chain : {&m.left_arm, &m.right_arm}) {
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd q = random_q(*chain, rng);
      const Pose p = forward_kinematics(*chain, q);
      const Eigen::Matrix4d t = fk_matrix(*chain, q);
      CHECK((p.position() - t.topRightCorner<3, 1>()).norm() < 1e-12);
      CHECK((p.rotation() - t.topLeftCorner<3, 3>()).norm() < 1e-12);
    }
  }
}

TEST_CASE("geometric Jacobian matches central differences") {
  const KinematicChain& chain = default_humanoid().right_arm;
  Rng rng(11);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd q = random_q(chain, rng);
    const auto J = jacobian(chain, q);
    const Pose p0 = forward_kinematics(chain, q);
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Pose pp = forward_kinematics(chain, qp), pm = forward_kinematics(chain, qm);
      const Vec3 dv = (pp.position() - pm.position()) / (2 * h);
      // Angular velocity from the rotation delta expressed in the base frame.
      const Vec3 dw = rotation_vector(pp.orientation() * pm.orientation().conjugate()) / (2 * h);
      CHECK((J.block<3, 1>(0, i) - dv).norm() < 1e-7);
      CHECK((J.block<3, 1>(3, i) - dw).norm() < 1e-7);
    }
    (void)p0;
  }
}

TEST_CASE("humanoid geometry") {
  const HumanoidModel m = default_humanoid();
  CHECK(m.left_arm.dof() == 7);
  CHECK(m.right_arm.dof() == 7);
  CHECK(m.left_mount.position().isApprox(Vec3(0.0, 0.15, 0.40)));
  CHECK(m.right_mount.position().isApprox(Vec3(0.0, -0.15, 0.40)));
  CHECK(m.left_arm.within_limits(m.left_home));
  // Fully stretched arm reaches upper arm + forearm from the shoulder.
  Rng rng(5);
  double reach = 0.0;
  for (int k = 0; k < 2000; ++k)
    reach = std::max(reach, forward_kinematics(m.right_arm, random_q(m.right_arm, rng)).position().norm());
  CHECK(reach <= 0.58 + 1e-9);
  CHECK(reach > 0.45);
  CHECK(reach <= reach_bound(m.right_arm));
  CHECK(reach_bound(m.right_arm) == doctest::Approx(0.58));
}

TEST_CASE("CLIK fixed point: starting at the solution stays there") {
  const KinematicChain& chain = default_humanoid().left_arm;
  Rng rng(17);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd q = random_q(chain, rng);
    const Pose target = forward_kinematics(chain, q);
    const IkResult r = clik_solve(chain, target, {chain.name(), q});
    CHECK(r.converged);
    CHECK(r.residual.position < 1e-9);
    CHECK(r.residual.rotation < 1e-9);
  }
}

TEST_CASE("CLIK converges on reachable targets and respects limits") {
  const HumanoidModel m = default_humanoid();
  Rng rng(23);
  int converged = 0;
  const int n = 100;
  for (int k = 0; k < n; ++k) {
    const Pose target = forward_kinematics(m.right_arm, random_q(m.right_arm, rng));
    const IkResult r = clik_solve(m.right_arm, target, {m.right_arm.name(), m.right_home});
    CHECK(m.right_arm.within_limits(r.q.values, 1e-12));
    if (r.converged) {
      ++converged;
      const PoseError e = pose_error(forward_kinematics(m.right_arm, r.q), target);
      CHECK(e.position == doctest::Approx(r.residual.position).epsilon(1e-9));
    }
  }
  CHECK(converged >= 95);
}

TEST_CASE("CLIK reports unreachable targets without throwing") {
  const KinematicChain& chain = default_humanoid().right_arm;
  const Pose far = Pose::from_translation(Vec3(2.0, 0.0, 0.0));
  IkConfig cfg;
  cfg.restarts = 1;
  const IkResult r = clik_solve(chain, far, {chain.name(), chain.neutral()}, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.residual.position > 1.0);
  CHECK(chain.within_limits(r.q.values, 1e-12));
}

TEST_CASE("humanoid JSON round trip") {
  const HumanoidModel m = default_humanoid();
  const HumanoidModel back = parse_humanoid(dump_humanoid(m));
  Rng rng(2);
  const Eigen::VectorXd q = random_q(m.left_arm, rng);
  CHECK(forward_kinematics(back.left_arm, q) == forward_kinematics(m.left_arm, q));
  CHECK(back.left_home == m.left_home);
  CHECK_THROWS_AS(parse_humanoid("{\"schema\": \"nope\"}"), std::exception);
}
