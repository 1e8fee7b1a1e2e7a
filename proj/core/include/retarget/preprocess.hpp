#pragma once

#include <cstddef>
#include <vector>

#include "retarget/episode.hpp"

namespace retarget {

/// Per-axis position statistics (population standard deviation).
struct AxisStats {
  Vec3 mean = Vec3::Zero();
  Vec3 stddev = Vec3::Zero();
  std::size_t count = 0;
};

enum class HandSelection { kPooled, kLeft, kRight };

// Throws ValidationError when no wrist position is selected.
AxisStats compute_axis_stats(const std::vector<Episode>& episodes, HandSelection hands = HandSelection::kPooled);

struct PreprocessConfig {
  double beta = 0.6667;  // y scale
  double z_lo = 0.15;    // m
  double z_hi = 1.25;    // m
  AxisStats target;      // only the x components are used

  void validate() const;
};

/// Maps source wrist positions into the target workspace:
///   x' = (x - src.mean.x) / src.stddev.x * target.stddev.x + target.mean.x
///   y' = beta * y
///   z' = clamp(z, z_lo, z_hi)
/// Orientations, grips, timing and the body trajectory pass through. The
/// result is tagged `preprocessed = true`.
Episode preprocess_episode(const Episode& ep, const AxisStats& src, const PreprocessConfig& cfg);

// Per-hand variant: each wrist is standardized with its own source stats.
Episode preprocess_episode(const Episode& ep, const AxisStats& src_left, const AxisStats& src_right,
                           const PreprocessConfig& cfg);

}  // namespace retarget
