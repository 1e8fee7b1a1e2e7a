#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace retarget {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform: translation in meters plus a unit quaternion.
///
/// The quaternion is kept unit-norm (to 1e-12) and sign-canonical (w >= 0).
/// Inputs that are already unit-norm are stored bit-for-bit so that file
/// round-trips stay lossless.
class Pose {
 public:
  Pose() : position_(Vec3::Zero()), orientation_(Quat::Identity()) {}
  Pose(const Vec3& position, const Quat& orientation);

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& p) { return {p, Quat::Identity()}; }
  static Pose from_rotation(const Quat& q) { return {Vec3::Zero(), q}; }
  // Rotation about a unit axis by `angle` radians.
  static Pose from_axis_angle(const Vec3& axis, double angle, const Vec3& p = Vec3::Zero());
  // Planar pose: (x, y, z) with heading `yaw` about +z.
  static Pose planar(double x, double y, double z, double yaw);

  const Vec3& position() const { return position_; }
  const Quat& orientation() const { return orientation_; }
  Mat3 rotation() const { return orientation_.toRotationMatrix(); }

  Pose inverse() const;
  Vec3 transform_point(const Vec3& p) const { return position_ + orientation_ * p; }

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position_ == b.position_ && a.orientation_.coeffs() == b.orientation_.coeffs();
  }

 private:
  Vec3 position_;
  Quat orientation_;
};

// a then b: the frame b expressed in a's frame, chained onto a.
Pose compose(const Pose& a, const Pose& b);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

struct PoseError {
  double position = 0.0;  // m
  double rotation = 0.0;  // rad, in [0, pi]

  friend bool operator==(const PoseError&, const PoseError&) = default;
};

PoseError pose_error(const Pose& current, const Pose& target);

// Geodesic angle between two rotations, in [0, pi].
double rotation_angle(const Quat& a, const Quat& b);

// Rotation vector (axis * angle) of q, with angle in [0, pi].
Vec3 rotation_vector(const Quat& q);

Quat canonical(const Quat& q);

// Linear position interpolation and slerp orientation, s in [0, 1].
Pose interpolate(const Pose& a, const Pose& b, double s);

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Heading of a rotation about +z (the yaw of its z-y-x decomposition).
double yaw_of(const Quat& q);

}  // namespace retarget
