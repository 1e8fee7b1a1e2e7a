#pragma once

#include <Eigen/Core>

#include "retarget/interval.hpp"

namespace retarget {

/// Lower-body command: planar body-frame velocities and torso height.
struct LowerBodyCommand {
  double vx = 0.0;    // m/s
  double vy = 0.0;    // m/s
  double vyaw = 0.0;  // rad/s
  double h = 0.75;    // m

  Eigen::Vector4d as_vector() const { return {vx, vy, vyaw, h}; }
  static LowerBodyCommand from_vector(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

  friend bool operator==(const LowerBodyCommand&, const LowerBodyCommand&) = default;
};

struct CommandRanges {
  Interval vx{-0.8, 1.2};
  Interval vy{-0.5, 0.5};
  Interval vyaw{-1.0, 1.0};
  Interval h{0.15, 1.25};

  const Interval& operator[](int channel) const {
    switch (channel) {
      case 0: return vx;
      case 1: return vy;
      case 2: return vyaw;
      default: return h;
    }
  }
};

inline constexpr CommandRanges kCommandRanges{};

LowerBodyCommand clip(const LowerBodyCommand& cmd, const CommandRanges& ranges = kCommandRanges);
bool within_ranges(const LowerBodyCommand& cmd, const CommandRanges& ranges = kCommandRanges);

}  // namespace retarget
