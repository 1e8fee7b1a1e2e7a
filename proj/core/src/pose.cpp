#include "retarget/pose.hpp"

#include <cmath>
#include <numbers>

namespace retarget {

Quat canonical(const Quat& q) {
  Quat r = q;
  const double n2 = r.squaredNorm();
  if (std::abs(n2 - 1.0) > 2e-12) r.normalize();
  if (r.w() < 0.0) r.coeffs() = -r.coeffs();
  return r;
}

Pose::Pose(const Vec3& position, const Quat& orientation)
    : position_(position), orientation_(canonical(orientation)) {}

Pose Pose::from_axis_angle(const Vec3& axis, double angle, const Vec3& p) {
  return {p, Quat(Eigen::AngleAxisd(angle, axis.normalized()))};
}

Pose Pose::planar(double x, double y, double z, double yaw) {
  return {Vec3(x, y, z), Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()))};
}

Pose Pose::inverse() const {
  const Quat qi = orientation_.conjugate();
  return {-(qi * position_), qi};
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position() + a.orientation() * b.position(), a.orientation() * b.orientation()};
}

double rotation_angle(const Quat& a, const Quat& b) {
  const Quat rel = a.conjugate() * b;
  const double v = rel.vec().norm();
  return 2.0 * std::atan2(v, std::abs(rel.w()));
}

PoseError pose_error(const Pose& current, const Pose& target) {
  return {(target.position() - current.position()).norm(),
          rotation_angle(current.orientation(), target.orientation())};
}

Vec3 rotation_vector(const Quat& q) {
  Quat c = q;
  if (c.w() < 0.0) c.coeffs() = -c.coeffs();
  const double v = c.vec().norm();
  if (v < 1e-12) return 2.0 * c.vec();  // small-angle limit
  const double angle = 2.0 * std::atan2(v, c.w());
  return c.vec() * (angle / v);
}

Pose interpolate(const Pose& a, const Pose& b, double s) {
  return {(1.0 - s) * a.position() + s * b.position(), a.orientation().slerp(s, b.orientation())};
}

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::remainder(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

double yaw_of(const Quat& q) {
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()), 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

}  // namespace retarget
