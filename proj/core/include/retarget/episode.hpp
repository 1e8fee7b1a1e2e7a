#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retarget/pose.hpp"

namespace retarget {

// Planar pose of the source robot's body in the world: (x, y) m and yaw rad.
struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  friend bool operator==(const PlanarPose&, const PlanarPose&) = default;
};

struct EpisodeStep {
  double t = 0.0;        // s
  Pose left_wrist;       // body frame; z is height above the floor
  Pose right_wrist;
  double left_grip = 1.0;   // open fraction in [0, 1]
  double right_grip = 1.0;
  // Source body trajectory; absent means the body never moved.
  std::optional<PlanarPose> body;
  // Torso height target recorded by height augmentation.
  std::optional<double> goal_height;

  friend bool operator==(const EpisodeStep&, const EpisodeStep&) = default;
};

struct Episode {
  std::string episode_id;
  std::string task_id;
  std::string language;
  double frequency = 20.0;  // Hz
  std::string embodiment;
  std::string end_effector = "gripper";  // "gripper" or "hand"
  std::vector<std::string> vision_refs;
  // Free-form provenance (e.g. "preprocessed", "source_episode", "variant").
  std::map<std::string, std::string> metadata;
  std::vector<EpisodeStep> steps;

  bool preprocessed() const;
  // True when the body reference never moves.
  bool is_static() const;
  PlanarPose body_at(std::size_t i) const;

  friend bool operator==(const Episode&, const Episode&) = default;
};

// Throws ValidationError describing the first violated invariant.
void validate(const Episode& ep);

}  // namespace retarget
