#include "retarget/episode.hpp"

#include <cmath>

#include "retarget/error.hpp"

namespace retarget {

bool Episode::preprocessed() const {
  auto it = metadata.find("preprocessed");
  return it != metadata.end() && it->second == "true";
}

bool Episode::is_static() const {
  if (steps.empty()) return true;
  const PlanarPose first = body_at(0);
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (!(body_at(i) == first)) return false;
  return true;
}

PlanarPose Episode::body_at(std::size_t i) const { return steps.at(i).body.value_or(PlanarPose{}); }

namespace {

bool finite(const Pose& p) {
  return p.position().allFinite() && p.orientation().coeffs().allFinite();
}

}  // namespace

void validate(const Episode& ep) {
  const std::string where = "episode '" + ep.episode_id + "'";
  if (ep.episode_id.empty()) throw ValidationError("episode with empty id");
  if (ep.steps.size() < 2) throw ValidationError(where + ": needs at least 2 steps");
  if (!(ep.frequency > 0.0)) throw ValidationError(where + ": frequency must be positive");
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    const auto& s = ep.steps[i];
    const std::string at = where + " step " + std::to_string(i);
    if (i > 0 && !(s.t > ep.steps[i - 1].t)) throw ValidationError(at + ": timestamps must strictly increase");
    if (!(s.left_grip >= 0.0 && s.left_grip <= 1.0) || !(s.right_grip >= 0.0 && s.right_grip <= 1.0))
      throw ValidationError(at + ": grip fraction outside [0, 1]");
    if (!finite(s.left_wrist) || !finite(s.right_wrist)) throw ValidationError(at + ": non-finite wrist pose");
    if (s.goal_height && !std::isfinite(*s.goal_height)) throw ValidationError(at + ": non-finite goal height");
  }
}

}  // namespace retarget
