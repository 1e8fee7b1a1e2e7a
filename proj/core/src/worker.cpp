#include "retarget/worker.hpp"

#include <algorithm>
#include <cmath>

#include "retarget/error.hpp"

namespace retarget {

LowerBodyCommand clip(const LowerBodyCommand& c, const CommandRanges& r) {
  return {std::clamp(c.vx, r.vx.lo, r.vx.hi), std::clamp(c.vy, r.vy.lo, r.vy.hi),
          std::clamp(c.vyaw, r.vyaw.lo, r.vyaw.hi), std::clamp(c.h, r.h.lo, r.h.hi)};
}

bool within_ranges(const LowerBodyCommand& c, const CommandRanges& r) {
  return r.vx.contains(c.vx) && r.vy.contains(c.vy) && r.vyaw.contains(c.vyaw) && r.h.contains(c.h);
}

void WorkerModel::validate() const {
  if (!(tau_v > 0.0)) throw ValidationError("worker: tau_v must be positive");
  if (!(dt > 0.0)) throw ValidationError("worker: dt must be positive");
  if (!(height_rate > 0.0)) throw ValidationError("worker: height_rate must be positive");
  if (!(noise_std.array() >= 0.0).all()) throw ValidationError("worker: noise std must be >= 0");
  if (!(h_min < h_max)) throw ValidationError("worker: h_min must be below h_max");
}

BaseState worker_step(const BaseState& s, const LowerBodyCommand& cmd, const WorkerModel& m, Rng& rng) {
  double cx = cmd.vx, cy = cmd.vy, cyaw = cmd.vyaw;
  if (m.noise_std[0] > 0.0) cx += m.noise_std[0] * rng.normal();
  if (m.noise_std[1] > 0.0) cy += m.noise_std[1] * rng.normal();
  if (m.noise_std[2] > 0.0) cyaw += m.noise_std[2] * rng.normal();

  const double a = std::exp(-m.dt / m.tau_v);
  BaseState n = s;
  n.vx = cx + (s.vx - cx) * a;
  n.vy = cy + (s.vy - cy) * a;
  n.vyaw = cyaw + (s.vyaw - cyaw) * a;

  const double c = std::cos(s.yaw), sn = std::sin(s.yaw);
  n.x = s.x + (c * n.vx - sn * n.vy) * m.dt;
  n.y = s.y + (sn * n.vx + c * n.vy) * m.dt;
  n.yaw = wrap_angle(s.yaw + n.vyaw * m.dt);

  const double max_dh = m.height_rate * m.dt;
  const double dh = std::clamp(cmd.h - s.h, -max_dh, max_dh);
  n.h = std::clamp(s.h + dh, m.h_min, m.h_max);
  n.h_rate = (n.h - s.h) / m.dt;
  return n;
}

}  // namespace retarget
