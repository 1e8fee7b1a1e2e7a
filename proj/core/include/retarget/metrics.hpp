#pragma once

#include <cstddef>
#include <span>

#include "retarget/pose.hpp"

namespace retarget {

/// Mean absolute tracking errors: position in cm, rotation (geodesic) in degrees.
struct TrackingMetrics {
  double e_p = 0.0;  // cm, both hands
  double e_r = 0.0;  // deg, both hands
  double left_e_p = 0.0, left_e_r = 0.0;
  double right_e_p = 0.0, right_e_r = 0.0;
  std::size_t steps = 0;
};

// Running sums of per-step wrist errors (m, rad); merge-order determines the
// floating-point result, so callers add in a fixed order.
struct TrackingAccumulator {
  double left_p = 0.0, left_r = 0.0, right_p = 0.0, right_r = 0.0;
  std::size_t steps = 0;

  void add(const PoseError& left, const PoseError& right);
  void merge(const TrackingAccumulator& other);
  TrackingMetrics finish() const;
};

TrackingMetrics tracking_mae(std::span<const Pose> executed_left, std::span<const Pose> executed_right,
                             std::span<const Pose> goal_left, std::span<const Pose> goal_right);

inline constexpr double kCmPerM = 100.0;
inline constexpr double kDegPerRad = 57.29577951308232;

}  // namespace retarget
