#include "retarget/metrics.hpp"

#include "retarget/error.hpp"

namespace retarget {

void TrackingAccumulator::add(const PoseError& left, const PoseError& right) {
  left_p += left.position;
  left_r += left.rotation;
  right_p += right.position;
  right_r += right.rotation;
  ++steps;
}

void TrackingAccumulator::merge(const TrackingAccumulator& o) {
  left_p += o.left_p;
  left_r += o.left_r;
  right_p += o.right_p;
  right_r += o.right_r;
  steps += o.steps;
}

TrackingMetrics TrackingAccumulator::finish() const {
  TrackingMetrics m;
  m.steps = steps;
  if (steps == 0) return m;
  const double n = static_cast<double>(steps);
  m.left_e_p = kCmPerM * left_p / n;
  m.right_e_p = kCmPerM * right_p / n;
  m.left_e_r = kDegPerRad * left_r / n;
  m.right_e_r = kDegPerRad * right_r / n;
  m.e_p = kCmPerM * (left_p + right_p) / (2.0 * n);
  m.e_r = kDegPerRad * (left_r + right_r) / (2.0 * n);
  return m;
}

TrackingMetrics tracking_mae(std::span<const Pose> executed_left, std::span<const Pose> executed_right,
                             std::span<const Pose> goal_left, std::span<const Pose> goal_right) {
  const std::size_t n = executed_left.size();
  if (executed_right.size() != n || goal_left.size() != n || goal_right.size() != n)
    throw ValidationError("tracking_mae: executed and goal streams differ in length");
  TrackingAccumulator acc;
  for (std::size_t i = 0; i < n; ++i)
    acc.add(pose_error(executed_left[i], goal_left[i]), pose_error(executed_right[i], goal_right[i]));
  return acc.finish();
}

}  // namespace retarget
