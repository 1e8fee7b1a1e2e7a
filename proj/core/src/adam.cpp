#include "retarget/adam.hpp"

#include <cmath>

#include "retarget/error.hpp"

namespace retarget {

void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad, AdamState& s) {
  if (grad.size() != params.size() || s.m.size() != params.size() || s.v.size() != params.size())
    throw ValidationError("adam_step: shape mismatch");
  ++s.step;
  const auto& c = s.cfg;
  s.m = c.beta1 * s.m + (1.0 - c.beta1) * grad;
  s.v = c.beta2 * s.v + (1.0 - c.beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  params.array() -= c.lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + c.eps);
}

bool clip_grad_norm(Eigen::VectorXd& grad, double max_norm) {
  const double n = grad.norm();
  if (n > max_norm) {
    grad *= max_norm / n;
    return true;
  }
  return false;
}

}  // namespace retarget
