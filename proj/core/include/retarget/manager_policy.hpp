#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "retarget/dense_net.hpp"
#include "retarget/simulator.hpp"

namespace retarget {

// Per-channel weights of the command loss (vx, vy, vyaw, h).
struct LossWeights {
  Eigen::Vector4d w{1.0, 1.0, 1.0, 2.0};
};

// sum_c w_c (pred_c - target_c)^2 / 4
double command_loss(const LowerBodyCommand& pred, const LowerBodyCommand& target, const LossWeights& weights = {});

// Mean of command_loss over matched pairs. Throws on empty or mismatched input.
double rollout_loss(std::span<const LowerBodyCommand> outputs, std::span<const LowerBodyCommand> targets,
                    const LossWeights& weights = {});

/// Learned manager: a DenseNet on the 15 state features whose 4 raw outputs
/// are squashed into the command ranges (affine tanh for the velocities,
/// affine sigmoid for the height), so every output is in range.
class ManagerNet final : public ManagerPolicy {
 public:
  ManagerNet(const std::vector<int>& hidden, Rng& rng);
  explicit ManagerNet(DenseNet net);

  void act(std::span<const ManagerState> states, std::span<LowerBodyCommand> out) const override;

  // Commands (4 x n) for features (15 x n).
  Eigen::MatrixXd commands(const Eigen::MatrixXd& features) const;

  const DenseNet& net() const { return net_; }
  DenseNet& net() { return net_; }

 private:
  DenseNet net_;
};

Eigen::MatrixXd map_to_ranges(const Eigen::MatrixXd& raw);
// Elementwise derivative of map_to_ranges.
Eigen::MatrixXd map_to_ranges_slope(const Eigen::MatrixXd& raw);

Eigen::MatrixXd features_matrix(std::span<const ManagerState> states);
Eigen::MatrixXd commands_matrix(std::span<const LowerBodyCommand> cmds);

struct LossAndGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;  // flat network gradient
};

/// Mean weighted command loss over the columns of (features, targets) and its
/// gradient with respect to the network parameters.
LossAndGrad manager_loss_grad(const ManagerNet& policy, const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                              const LossWeights& weights = {});

}  // namespace retarget
