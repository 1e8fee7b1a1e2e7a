#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace retarget {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::uint64_t step = 0;
  Eigen::VectorXd m;  // first moment
  Eigen::VectorXd v;  // second moment

  static AdamState zeros(Eigen::Index n, const AdamConfig& cfg = {}) {
    return {cfg, 0, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
};

/// Bias-corrected Adam:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad, AdamState& state);

// Rescales grad to `max_norm` when its L2 norm exceeds it; returns whether it did.
bool clip_grad_norm(Eigen::VectorXd& grad, double max_norm);

inline constexpr double kGradClipNorm = 10.0;

}  // namespace retarget
