#include "retarget/manager_policy.hpp"

#include <cmath>

#include "retarget/error.hpp"

namespace retarget {

double command_loss(const LowerBodyCommand& pred, const LowerBodyCommand& target, const LossWeights& weights) {
  const Eigen::Vector4d d = pred.as_vector() - target.as_vector();
  return weights.w.dot(d.cwiseProduct(d)) / 4.0;
}

double rollout_loss(std::span<const LowerBodyCommand> outputs, std::span<const LowerBodyCommand> targets,
                    const LossWeights& weights) {
  if (outputs.empty()) throw ValidationError("rollout_loss: empty batch");
  if (outputs.size() != targets.size()) throw ValidationError("rollout_loss: outputs and targets differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) sum += command_loss(outputs[i], targets[i], weights);
  return sum / static_cast<double>(outputs.size());
}

namespace {

std::vector<int> manager_sizes(const std::vector<int>& hidden) {
  std::vector<int> sizes{kManagerStateDim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(4);
  return sizes;
}

std::vector<Activation> manager_activations(std::size_t hidden) {
  std::vector<Activation> acts(hidden, Activation::kElu);
  acts.push_back(Activation::kIdentity);
  return acts;
}

}  // namespace

ManagerNet::ManagerNet(const std::vector<int>& hidden, Rng& rng)
    : net_(manager_sizes(hidden), manager_activations(hidden.size()), rng) {}

ManagerNet::ManagerNet(DenseNet net) : net_(std::move(net)) {
  if (net_.input_dim() != kManagerStateDim || net_.output_dim() != 4)
    throw ValidationError("ManagerNet: network must map 15 features to 4 outputs");
}

Eigen::MatrixXd map_to_ranges(const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (int c = 0; c < 4; ++c) {
    const Interval& r = kCommandRanges[c];
    if (c < 3)
      out.row(c) = (r.lo + 0.5 * r.width() * (raw.row(c).array().tanh() + 1.0)).matrix();
    else
      out.row(c) = (r.lo + r.width() / (1.0 + (-raw.row(c).array()).exp())).matrix();
  }
  return out;
}

Eigen::MatrixXd map_to_ranges_slope(const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (int c = 0; c < 4; ++c) {
    const Interval& r = kCommandRanges[c];
    if (c < 3) {
      out.row(c) = (0.5 * r.width() * (1.0 - raw.row(c).array().tanh().square())).matrix();
    } else {
      const Eigen::ArrayXXd s = 1.0 / (1.0 + (-raw.row(c).array()).exp());
      out.row(c) = (r.width() * s * (1.0 - s)).matrix();
    }
  }
  return out;
}

Eigen::MatrixXd features_matrix(std::span<const ManagerState> states) {
  Eigen::MatrixXd x(kManagerStateDim, static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = states[i].features;
  return x;
}

Eigen::MatrixXd commands_matrix(std::span<const LowerBodyCommand> cmds) {
  Eigen::MatrixXd y(4, static_cast<Eigen::Index>(cmds.size()));
  for (std::size_t i = 0; i < cmds.size(); ++i) y.col(static_cast<Eigen::Index>(i)) = cmds[i].as_vector();
  return y;
}

Eigen::MatrixXd ManagerNet::commands(const Eigen::MatrixXd& features) const {
  return map_to_ranges(net_.forward(features));
}

void ManagerNet::act(std::span<const ManagerState> states, std::span<LowerBodyCommand> out) const {
  if (states.size() != out.size()) throw ValidationError("ManagerNet::act: output span has wrong length");
  if (states.empty()) return;
  const Eigen::MatrixXd y = commands(features_matrix(states));
  for (std::size_t i = 0; i < states.size(); ++i)
    out[i] = LowerBodyCommand::from_vector(y.col(static_cast<Eigen::Index>(i)));
}

LossAndGrad manager_loss_grad(const ManagerNet& policy, const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                              const LossWeights& weights) {
  const Eigen::Index n = features.cols();
  if (n == 0) throw ValidationError("manager_loss_grad: empty batch");
  if (targets.rows() != 4 || targets.cols() != n) throw ValidationError("manager_loss_grad: target shape mismatch");
  ForwardCache cache;
  const Eigen::MatrixXd raw = policy.net().forward(features, cache);
  const Eigen::MatrixXd diff = map_to_ranges(raw) - targets;
  const Eigen::MatrixXd weighted = weights.w.asDiagonal() * diff;
  LossAndGrad r;
  r.loss = diff.cwiseProduct(weighted).sum() / (4.0 * static_cast<double>(n));
  const Eigen::MatrixXd g_out = (2.0 / (4.0 * static_cast<double>(n))) * weighted.cwiseProduct(map_to_ranges_slope(raw));
  r.grad = net_backward(policy.net(), cache, g_out).param_grad;
  return r;
}

}  // namespace retarget
