#pragma once

#include <span>
#include <vector>

namespace retarget {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson).
///
/// Interior slopes are the weighted harmonic mean of the adjacent secants
/// (zero where the secants change sign or vanish); end slopes use the
/// three-point formula, limited so they never point against the data.
class PchipCurve {
 public:
  // Throws ValidationError unless there are >= 2 strictly increasing knots.
  PchipCurve(std::vector<double> t, std::vector<double> y);

  // Throws ValidationError outside [t.front(), t.back()].
  double operator()(double t) const;
  double derivative(double t) const;

  const std::vector<double>& knots_t() const { return t_; }
  const std::vector<double>& knots_y() const { return y_; }
  const std::vector<double>& slopes() const { return d_; }

 private:
  std::size_t segment(double t) const;

  std::vector<double> t_, y_, d_;
};

inline PchipCurve pchip_fit(std::vector<double> t, std::vector<double> y) {
  return PchipCurve(std::move(t), std::move(y));
}

inline double pchip_eval(const PchipCurve& curve, double t) { return curve(t); }

}  // namespace retarget
