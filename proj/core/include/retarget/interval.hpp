#pragma once

namespace retarget {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

}  // namespace retarget
