#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retarget/episode.hpp"
#include "retarget/interval.hpp"

namespace retarget {

enum class MotionFamily { kReach, kTransfer, kCircularWipe };

std::string to_string(MotionFamily f);
MotionFamily motion_family_from_string(const std::string& s);

/// Parameters of the synthetic source-robot episode generator.
///
/// Wrist positions are in the source body frame with z measured from the
/// floor. The left hand uses the upper half of the y range, the right hand the
/// lower half.
struct SeedSpec {
  std::size_t episodes = 50;
  double duration = 8.0;    // s
  double frequency = 20.0;  // Hz
  Interval x{0.30, 0.70};
  Interval y{-0.45, 0.45};
  Interval z{0.40, 1.30};
  double v_max = 0.5;  // m/s, bound on wrist speed
  std::vector<MotionFamily> families{MotionFamily::kReach, MotionFamily::kTransfer, MotionFamily::kCircularWipe};
  double mobile_fraction = 0.3;  // share of episodes whose body moves
  double body_speed = 0.25;      // m/s, upper bound for moving bodies
  double body_yaw_rate = 0.25;   // rad/s, upper bound
  double hand_fraction = 0.15;   // share of episodes recorded with a dexterous hand
  std::string embodiment = "wheeled-dual-arm";
  // Nominal wrist orientation (w, x, y, z) in the body frame.
  Quat nominal_orientation = Quat(Eigen::AngleAxisd(-1.5707963267948966, Vec3::UnitY()));

  void validate() const;
};

std::vector<Episode> generate_synthetic_seeds(const SeedSpec& spec, std::uint64_t rng_seed);

}  // namespace retarget
