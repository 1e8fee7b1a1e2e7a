#include "retarget/augment.hpp"

#include <algorithm>
#include <string>

#include "retarget/error.hpp"
#include "retarget/pchip.hpp"
#include "retarget/rng.hpp"

namespace retarget {

void HeightAugmentSpec::validate() const {
  if (!(h_lo < h_hi) || h_lo < 0.0 || h_hi > 2.5) throw ValidationError("augment: h_range must satisfy 0 <= lo < hi <= 2.5");
  if (variants < 1) throw ValidationError("augment: variants must be >= 1");
  if (offset_knots < 2) throw ValidationError("augment: offset_knots must be >= 2");
  if (!(max_offset >= 0.0)) throw ValidationError("augment: max_offset must be >= 0");
}

double goal_height_for(const EpisodeStep& step, const HeightAugmentSpec& spec) {
  const double mid = 0.5 * (step.left_wrist.position().z() + step.right_wrist.position().z());
  return std::clamp(mid - spec.wrist_to_torso, spec.h_lo, spec.h_hi);
}

AugmentedEpisode apply_height_offsets(const Episode& ep, const std::vector<double>& offsets,
                                      const HeightAugmentSpec& spec) {
  if (ep.steps.size() < 2) throw ValidationError("augment: episode needs >= 2 steps");
  if (offsets.size() < 2) throw ValidationError("augment: need >= 2 offset knots");
  const double t0 = ep.steps.front().t, t1 = ep.steps.back().t;
  std::vector<double> knot_t(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i)
    knot_t[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(offsets.size() - 1);
  knot_t.back() = t1;
  const PchipCurve curve(knot_t, offsets);

  AugmentedEpisode out{ep, {}};
  out.height_profile.reserve(ep.steps.size());
  for (auto& s : out.episode.steps) {
    const double dz = curve(s.t);
    auto lift = [&](const Pose& p) {
      Vec3 v = p.position();
      v.z() = std::clamp(v.z() + dz, spec.h_lo, spec.h_hi);
      return Pose(v, p.orientation());
    };
    s.left_wrist = lift(s.left_wrist);
    s.right_wrist = lift(s.right_wrist);
    s.goal_height = goal_height_for(s, spec);
    out.height_profile.push_back(*s.goal_height);
  }
  return out;
}

std::vector<AugmentedEpisode> augment_heights(const Episode& ep, const HeightAugmentSpec& spec) {
  spec.validate();
  const std::uint64_t id_hash = hash_string(ep.episode_id);
  std::vector<AugmentedEpisode> out;
  out.reserve(spec.variants);
  for (std::size_t v = 0; v < spec.variants; ++v) {
    std::vector<double> offsets(spec.offset_knots, 0.0);
    if (v > 0) {
      Rng rng(mix_seed(spec.seed ^ mix_seed(id_hash ^ mix_seed(v))));
      for (auto& o : offsets) o = rng.uniform(-spec.max_offset, spec.max_offset);
    }
    AugmentedEpisode aug = apply_height_offsets(ep, offsets, spec);
    aug.episode.episode_id = ep.episode_id + "/h" + std::to_string(v);
    aug.episode.metadata["source_episode"] = ep.episode_id;
    aug.episode.metadata["variant"] = std::to_string(v);
    aug.episode.metadata["augment_seed"] = std::to_string(spec.seed);
    out.push_back(std::move(aug));
  }
  return out;
}

}  // namespace retarget
