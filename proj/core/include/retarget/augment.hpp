#pragma once

#include <cstdint>
#include <vector>

#include "retarget/episode.hpp"

namespace retarget {

struct HeightAugmentSpec {
  double h_lo = 0.15;  // m, bounds for augmented wrist z and torso height
  double h_hi = 1.25;
  std::size_t variants = 4;     // per episode, variant 0 is the identity
  std::size_t offset_knots = 4; // sparse random offset knots per variant
  double max_offset = 0.35;     // m, knot values drawn from [-max, max]
  double wrist_to_torso = 0.10; // m
  std::uint64_t seed = 0;

  void validate() const;
};

struct AugmentedEpisode {
  Episode episode;                   // each step carries goal_height
  std::vector<double> height_profile;  // h*(t) per step, equal to goal_height

  friend bool operator==(const AugmentedEpisode&, const AugmentedEpisode&) = default;
};

// Torso height target for one step: mean wrist z minus the wrist offset, clamped.
double goal_height_for(const EpisodeStep& step, const HeightAugmentSpec& spec);

/// Adds the PCHIP-smoothed offset through (t_i, offsets[i]) to both wrists' z
/// and clamps z to [h_lo, h_hi]. Knot times are spread evenly over the
/// episode. Records h*(t) in each step.
AugmentedEpisode apply_height_offsets(const Episode& ep, const std::vector<double>& offsets,
                                      const HeightAugmentSpec& spec);

/// Height variants of a preprocessed episode. Variant v draws its knot values
/// from a stream derived from (spec.seed, episode id, v); variant 0 uses zero
/// offsets. Provenance goes into metadata (source_episode, variant, seed).
std::vector<AugmentedEpisode> augment_heights(const Episode& ep, const HeightAugmentSpec& spec);

}  // namespace retarget
