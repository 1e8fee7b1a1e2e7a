#include "retarget/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "retarget/error.hpp"
#include "retarget/rng.hpp"

namespace retarget {

std::string to_string(MotionFamily f) {
  switch (f) {
    case MotionFamily::kReach:
      return "reach";
    case MotionFamily::kTransfer:
      return "transfer";
    case MotionFamily::kCircularWipe:
      return "circular_wipe";
  }
  return "unknown";
}

MotionFamily motion_family_from_string(const std::string& s) {
  if (s == "reach") return MotionFamily::kReach;
  if (s == "transfer") return MotionFamily::kTransfer;
  if (s == "circular_wipe") return MotionFamily::kCircularWipe;
  throw ValidationError("unknown motion family '" + s + "'");
}

void SeedSpec::validate() const {
  auto check = [](const Interval& iv, const char* axis) {
    if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw ValidationError(std::string("seed spec: workspace ") + axis + " range must satisfy lo < hi");
  };
  check(x, "x");
  check(y, "y");
  check(z, "z");
  if (episodes == 0) throw ValidationError("seed spec: episodes must be >= 1");
  if (!(frequency > 0.0) || !(duration * frequency >= 1.0))
    throw ValidationError("seed spec: need frequency > 0 and at least 2 steps");
  if (!(v_max > 0.0)) throw ValidationError("seed spec: v_max must be positive");
  if (families.empty()) throw ValidationError("seed spec: no motion families");
  for (double f : {mobile_fraction, hand_fraction})
    if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("seed spec: fractions must lie in [0, 1]");
  if (!(body_speed >= 0.0) || !(body_yaw_rate >= 0.0))
    throw ValidationError("seed spec: body speed bounds must be non-negative");
}

namespace {

struct Box {
  Interval x, y, z;
  Vec3 sample(Rng& rng, double margin) const {
    auto pick = [&](const Interval& iv) {
      const double m = std::min(margin, 0.25 * iv.width());
      return rng.uniform(iv.lo + m, iv.hi - m);
    };
    return {pick(x), pick(y), pick(z)};
  }
  Vec3 clamp(const Vec3& p) const {
    return {std::clamp(p.x(), x.lo, x.hi), std::clamp(p.y(), y.lo, y.hi), std::clamp(p.z(), z.lo, z.hi)};
  }
};

double min_jerk(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

// Piecewise min-jerk path through waypoints; segment durations are long
// enough that the peak speed (1.875 D / T) stays below 0.9 * v_max.
class WaypointPath {
 public:
  WaypointPath(std::vector<Vec3> pts, double v_max, double hold) : pts_(std::move(pts)) {
    double t = hold;
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      const double d = (pts_[i] - pts_[i - 1]).norm();
      const double dur = std::max(0.8, 1.875 * d / (0.9 * v_max));
      starts_.push_back(t);
      durations_.push_back(dur);
      t += dur + hold;
    }
  }
  Vec3 at(double t) const {
    for (std::size_t i = 0; i < starts_.size(); ++i) {
      if (t < starts_[i]) return pts_[i];
      if (t < starts_[i] + durations_[i]) {
        const double s = min_jerk((t - starts_[i]) / durations_[i]);
        return pts_[i] + s * (pts_[i + 1] - pts_[i]);
      }
    }
    return pts_.back();
  }
  // Fraction in [0, 1] of the segment `seg` traversed at time t.
  double progress(double t, std::size_t seg) const {
    if (seg >= starts_.size()) return 1.0;
    return std::clamp((t - starts_[seg]) / durations_[seg], 0.0, 1.0);
  }

 private:
  std::vector<Vec3> pts_;
  std::vector<double> starts_, durations_;
};

struct HandTrack {
  std::vector<Vec3> pos;
  std::vector<double> grip;
};

double grip_profile(double close_progress, double open_progress) {
  // 1 = open. Closes while the first progress ramps and reopens with the second.
  const double closing = min_jerk(close_progress);
  const double opening = min_jerk(open_progress);
  return std::clamp(1.0 - closing + opening, 0.0, 1.0);
}

const char* const kObjects[] = {"cup", "bottle", "toy", "box", "apple", "bowl", "towel", "book"};

}  // namespace

std::vector<Episode> generate_synthetic_seeds(const SeedSpec& spec, std::uint64_t rng_seed) {
  spec.validate();
  const Rng root(rng_seed);
  const auto n_steps = static_cast<std::size_t>(std::floor(spec.duration * spec.frequency)) + 1;
  const double dt = 1.0 / spec.frequency;
  const Box left_box{spec.x, {spec.y.mid(), spec.y.hi}, spec.z};
  const Box right_box{spec.x, {spec.y.lo, spec.y.mid()}, spec.z};

  std::vector<Episode> out;
  out.reserve(spec.episodes);
  for (std::size_t e = 0; e < spec.episodes; ++e) {
    Rng rng = root.split(e);
    const MotionFamily family = spec.families[e % spec.families.size()];
    const std::string object = kObjects[rng.below(std::size(kObjects))];
    const bool mobile = rng.uniform() < spec.mobile_fraction;
    const bool hand = rng.uniform() < spec.hand_fraction;

    HandTrack L, R;
    L.pos.resize(n_steps);
    R.pos.resize(n_steps);
    L.grip.resize(n_steps);
    R.grip.resize(n_steps);
    std::string language;
    const double margin = 0.05;
    switch (family) {
      case MotionFamily::kReach: {
        // One hand reaches to a target and returns; the other stays near rest.
        const bool use_left = rng.uniform() < 0.5;
        const Box& active = use_left ? left_box : right_box;
        const Box& idle = use_left ? right_box : left_box;
        const Vec3 rest = active.sample(rng, margin), target = active.sample(rng, margin);
        const WaypointPath path({rest, target, rest}, spec.v_max, 0.6);
        const Vec3 idle_a = idle.sample(rng, margin);
        const Vec3 idle_b = idle_a + 0.3 * (idle.sample(rng, margin) - idle_a);
        const WaypointPath idle_path({idle_a, idle_b}, spec.v_max, 2.0);
        auto& act = use_left ? L : R;
        auto& oth = use_left ? R : L;
        for (std::size_t k = 0; k < n_steps; ++k) {
          const double t = static_cast<double>(k) * dt;
          act.pos[k] = active.clamp(path.at(t));
          oth.pos[k] = idle.clamp(idle_path.at(t));
          act.grip[k] = grip_profile(path.progress(t, 0), path.progress(t, 1));
          oth.grip[k] = 1.0;
        }
        language = std::string("pick up the ") + object + " with the " + (use_left ? "left" : "right") + " hand";
        break;
      }
      case MotionFamily::kTransfer: {
        // Both hands carry an object from A to B, keeping their separation.
        const Vec3 a = left_box.sample(rng, margin), b = left_box.sample(rng, margin);
        const double sep = rng.uniform(0.6, 0.95) * (spec.y.hi - spec.y.lo) / 2.0;
        const Vec3 shift(0.0, -sep, 0.0);
        const WaypointPath path({a, b}, spec.v_max, 1.0);
        for (std::size_t k = 0; k < n_steps; ++k) {
          const double t = static_cast<double>(k) * dt;
          const Vec3 p = path.at(t);
          L.pos[k] = left_box.clamp(p);
          R.pos[k] = right_box.clamp(p + shift);
          const double g = grip_profile(std::clamp(t / 0.8, 0.0, 1.0), path.progress(t, 0) >= 1.0 ? 1.0 : 0.0);
          L.grip[k] = R.grip[k] = g;
        }
        language = std::string("carry the ") + object + " with both hands";
        break;
      }
      case MotionFamily::kCircularWipe: {
        // Right hand wipes a horizontal circle; left hand holds the object.
        const double r_max = std::min({0.12, 0.45 * spec.x.width(), 0.45 * right_box.y.width()});
        const double radius = rng.uniform(0.4, 1.0) * r_max;
        Box inner = right_box;
        inner.x = {spec.x.lo + radius, spec.x.hi - radius};
        inner.y = {right_box.y.lo + radius, right_box.y.hi - radius};
        const Vec3 c = inner.sample(rng, 0.0);
        const double omega = std::min(0.9 * spec.v_max / radius, 2.0 * std::numbers::pi / 2.0);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec3 hold = left_box.sample(rng, margin);
        for (std::size_t k = 0; k < n_steps; ++k) {
          const double t = static_cast<double>(k) * dt;
          const double a = phase + omega * t;
          R.pos[k] = right_box.clamp(c + radius * Vec3(std::cos(a), std::sin(a), 0.0));
          L.pos[k] = hold;
          R.grip[k] = 0.2;
          L.grip[k] = 0.0;
        }
        language = std::string("wipe the table next to the ") + object;
        break;
      }
    }

    // Body motion for mobile episodes: straight line with a constant turn,
    // ramped in and out with a min-jerk profile.
    const double speed = mobile ? rng.uniform(0.3, 1.0) * spec.body_speed : 0.0;
    const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double yaw_rate = mobile ? rng.uniform(-1.0, 1.0) * spec.body_yaw_rate : 0.0;
    const double total = static_cast<double>(n_steps - 1) * dt;
    // Mean speed over a min-jerk ramp is 1/1.875 of the peak.
    const double dist = speed * total / 1.875;
    const double turn = yaw_rate * total / 1.875;

    const double wobble = rng.uniform(0.05, 0.2);
    const double wobble_freq = rng.uniform(0.1, 0.3);
    Episode ep;
    char id[32];
    std::snprintf(id, sizeof id, "seed-%04zu", e);
    ep.episode_id = id;
    ep.task_id = to_string(family) + "/" + object;
    ep.language = language;
    ep.frequency = spec.frequency;
    ep.embodiment = spec.embodiment;
    ep.end_effector = hand ? "hand" : "gripper";
    ep.vision_refs = {"cam_head/" + ep.episode_id, "cam_left_wrist/" + ep.episode_id,
                      "cam_right_wrist/" + ep.episode_id};
    ep.metadata = {{"generator", "synthetic"}, {"family", to_string(family)}, {"mobile", mobile ? "true" : "false"}};
    ep.steps.resize(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const double tw = std::sin(2.0 * std::numbers::pi * wobble_freq * t);
      const Quat ql = Quat(Eigen::AngleAxisd(wobble * tw, Vec3::UnitZ())) * spec.nominal_orientation;
      const Quat qr = Quat(Eigen::AngleAxisd(-wobble * tw, Vec3::UnitZ())) * spec.nominal_orientation;
      auto& s = ep.steps[k];
      s.t = t;
      s.left_wrist = Pose(L.pos[k], ql);
      s.right_wrist = Pose(R.pos[k], qr);
      s.left_grip = L.grip[k];
      s.right_grip = R.grip[k];
      if (mobile) {
        const double u = min_jerk(t / total);
        const double yaw = heading + turn * u;
        s.body = PlanarPose{dist * u * std::cos(heading), dist * u * std::sin(heading), wrap_angle(yaw)};
      }
    }
    out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace retarget
