#include "retarget/pchip.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "retarget/error.hpp"

namespace retarget {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// Non-centered three-point end slope with the monotonicity guard.
double end_slope(double h0, double h1, double del0, double del1) {
  double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
  if (sign(d) != sign(del0)) {
    d = 0.0;
  } else if (sign(del0) != sign(del1) && std::abs(d) > std::abs(3.0 * del0)) {
    d = 3.0 * del0;
  }
  return d;
}

}  // namespace

PchipCurve::PchipCurve(std::vector<double> t, std::vector<double> y) : t_(std::move(t)), y_(std::move(y)) {
  if (t_.size() != y_.size()) throw ValidationError("pchip: knot times and values differ in length");
  if (t_.size() < 2) throw ValidationError("pchip: need at least 2 knots");
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!std::isfinite(t_[i]) || !std::isfinite(y_[i])) throw ValidationError("pchip: non-finite knot");
    if (i > 0 && !(t_[i] > t_[i - 1]))
      throw ValidationError("pchip: knot times must strictly increase (index " + std::to_string(i) + ")");
  }
  const std::size_t n = t_.size();
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = t_[i + 1] - t_[i];
    del[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = del[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (del[k - 1] == 0.0 || del[k] == 0.0 || sign(del[k - 1]) != sign(del[k])) {
      d_[k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
  }
  d_[0] = end_slope(h[0], h[1], del[0], del[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

std::size_t PchipCurve::segment(double t) const {
  if (!(t >= t_.front() && t <= t_.back()))
    throw ValidationError("pchip: evaluation at " + std::to_string(t) + " outside [" + std::to_string(t_.front()) +
                          ", " + std::to_string(t_.back()) + "]");
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - t_.begin());
  return std::min(i == 0 ? 0 : i - 1, t_.size() - 2);
}

double PchipCurve::operator()(double t) const {
  const std::size_t i = segment(t);
  if (t == t_[i]) return y_[i];
  if (t == t_[i + 1]) return y_[i + 1];
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double u = 1.0 - s;
  // Increment form: flat segments stay exactly flat.
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h10 = s * u * u;
  const double h11 = -s * s * u;
  return y_[i] + h01 * (y_[i + 1] - y_[i]) + h * (h10 * d_[i] + h11 * d_[i + 1]);
}

double PchipCurve::derivative(double t) const {
  const std::size_t i = segment(t);
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s;
  const double dh00 = (6.0 * s2 - 6.0 * s) / h;
  const double dh10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double dh01 = (-6.0 * s2 + 6.0 * s) / h;
  const double dh11 = 3.0 * s2 - 2.0 * s;
  return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

}  // namespace retarget
