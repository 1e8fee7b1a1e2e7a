#include "retarget/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "retarget/error.hpp"

namespace retarget {

AxisStats compute_axis_stats(const std::vector<Episode>& episodes, HandSelection hands) {
  // Welford accumulation per axis.
  AxisStats s;
  Vec3 m2 = Vec3::Zero();
  auto push = [&](const Vec3& p) {
    ++s.count;
    const Vec3 delta = p - s.mean;
    s.mean += delta / static_cast<double>(s.count);
    m2 += delta.cwiseProduct(p - s.mean);
  };
  for (const auto& ep : episodes) {
    for (const auto& step : ep.steps) {
      if (hands != HandSelection::kRight) push(step.left_wrist.position());
      if (hands != HandSelection::kLeft) push(step.right_wrist.position());
    }
  }
  if (s.count == 0) throw ValidationError("compute_axis_stats: no wrist positions");
  s.stddev = (m2 / static_cast<double>(s.count)).cwiseMax(0.0).cwiseSqrt();
  return s;
}

void PreprocessConfig::validate() const {
  if (!(beta > 0.0)) throw ValidationError("preprocess: beta must be positive");
  if (!(z_lo < z_hi)) throw ValidationError("preprocess: z_clip requires z_lo < z_hi");
  if (!(target.stddev.x() >= 0.0) || !std::isfinite(target.mean.x()))
    throw ValidationError("preprocess: invalid target x statistics");
}

namespace {

Pose map_pose(const Pose& p, const AxisStats& src, const PreprocessConfig& cfg) {
  const Vec3& v = p.position();
  const double x = (v.x() - src.mean.x()) / src.stddev.x() * cfg.target.stddev.x() + cfg.target.mean.x();
  const double y = cfg.beta * v.y();
  const double z = std::clamp(v.z(), cfg.z_lo, cfg.z_hi);
  return {Vec3(x, y, z), p.orientation()};
}

}  // namespace

Episode preprocess_episode(const Episode& ep, const AxisStats& src_left, const AxisStats& src_right,
                           const PreprocessConfig& cfg) {
  cfg.validate();
  if (!(src_left.stddev.x() > 0.0) || !(src_right.stddev.x() > 0.0))
    throw ValidationError("preprocess: source x standard deviation is zero");
  Episode out = ep;
  for (auto& s : out.steps) {
    s.left_wrist = map_pose(s.left_wrist, src_left, cfg);
    s.right_wrist = map_pose(s.right_wrist, src_right, cfg);
  }
  out.metadata["preprocessed"] = "true";
  return out;
}

Episode preprocess_episode(const Episode& ep, const AxisStats& src, const PreprocessConfig& cfg) {
  return preprocess_episode(ep, src, src, cfg);
}

}  // namespace retarget
