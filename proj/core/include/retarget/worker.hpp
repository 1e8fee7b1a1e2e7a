#pragma once

#include <Eigen/Core>

#include "retarget/command.hpp"
#include "retarget/pose.hpp"
#include "retarget/rng.hpp"

namespace retarget {

/// Floating torso state in the world.
struct BaseState {
  double x = 0.0, y = 0.0;  // m
  double yaw = 0.0;         // rad, in (-pi, pi]
  double h = 0.75;          // torso height, m
  double vx = 0.0, vy = 0.0, vyaw = 0.0;  // realized body-frame velocities
  double h_rate = 0.0;                    // m/s

  // Base frame located at (x, y, h) with heading yaw.
  Pose pose() const { return Pose::planar(x, y, h, yaw); }

  friend bool operator==(const BaseState&, const BaseState&) = default;
};

/// Analytic stand-in for the learned lower-body controller: first-order lag
/// on planar velocities and a rate-limited torso height.
struct WorkerModel {
  double tau_v = 0.2;        // s
  double height_rate = 0.5;  // m/s
  Eigen::Vector3d noise_std{0.02, 0.02, 0.02};  // per velocity channel
  double dt = 0.05;          // s
  double h_min = 0.10;       // hard mechanical bounds
  double h_max = 1.30;

  void validate() const;
};

/// One control tick. `cmd` must already be clipped. Gaussian noise (if any)
/// perturbs the commanded velocities, realized velocities relax towards them
/// with factor exp(-dt / tau_v), and the position integrates the new body-frame
/// velocity using the heading at the start of the tick.
BaseState worker_step(const BaseState& state, const LowerBodyCommand& cmd, const WorkerModel& model, Rng& rng);

}  // namespace retarget
