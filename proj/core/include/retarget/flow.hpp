#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "retarget/adam.hpp"
#include "retarget/archive.hpp"
#include "retarget/dense_net.hpp"
#include "retarget/retarget.hpp"

namespace retarget {

inline constexpr int kChunkHorizon = 16;
// Action layout: left arm 7, right arm 7, left hand 7, right hand 7, command 4.
inline constexpr int kActionDim = 32;
// State layout: the same 28 joints, then torso height and realized vx, vy, vyaw.
inline constexpr int kFlowStateDim = 32;

/// H x A block of future actions (rows are timesteps).
using ActionChunk = Eigen::MatrixXd;

// tau * a + (1 - tau) * eps, elementwise.
ActionChunk noised_chunk(const ActionChunk& a, const ActionChunk& eps, double tau);

/// Per-dimension affine normalization; dimensions with (near) zero spread
/// keep std 1 so they are only centred.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(Eigen::VectorXd mean, Eigen::VectorXd stddev);

  // Columns are samples.
  static Normalizer fit(const Eigen::MatrixXd& samples);
  static Normalizer identity(Eigen::Index dim);

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& stddev() const { return std_; }

  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& z) const;
  // Chunks: column a of the H x A matrix uses dimension a.
  ActionChunk normalize_chunk(const ActionChunk& c) const;
  ActionChunk denormalize_chunk(const ActionChunk& c) const;

 private:
  Eigen::VectorXd mean_, std_;
};

// Column-major flattening of an H x A chunk and its inverse.
Eigen::VectorXd flatten_chunk(const ActionChunk& c);
ActionChunk unflatten_chunk(const Eigen::VectorXd& v, int horizon, int action_dim);

Eigen::VectorXd action_vector(const WholeBodyAction& a);
Eigen::VectorXd flow_state_vector(const RetargetedStep& s);

/// Predicts the flow target (eps - A) for a batch: `noised` is (H*A) x B in
/// normalized units, `states` is S x B normalized, one task id and tau per
/// column.
class FlowField {
 public:
  virtual ~FlowField() = default;
  virtual int horizon() const = 0;
  virtual int action_dim() const = 0;
  virtual Eigen::MatrixXd velocity(const Eigen::MatrixXd& noised, const Eigen::MatrixXd& states,
                                   std::span<const int> tasks, std::span<const double> taus) const = 0;
};

struct FlowBatch {
  Eigen::MatrixXd chunks;  // (H*A) x B, normalized
  Eigen::MatrixXd states;  // S x B, normalized
  std::vector<int> tasks;

  Eigen::Index size() const { return chunks.cols(); }
};

struct FlowNoise {
  std::vector<double> tau;  // one per item, U[0, 1)
  Eigen::MatrixXd eps;      // same shape as the chunks
};

// Draws every tau first, then eps column by column.
FlowNoise draw_flow_noise(Eigen::Index batch, Eigen::Index dim, Rng& rng);

// Mean over items and elements of (field - (eps - A))^2.
double fm_loss(const FlowField& field, const FlowBatch& batch, const FlowNoise& noise);
double fm_loss(const FlowField& field, const FlowBatch& batch, Rng& rng);

struct FlowSpec {
  int horizon = kChunkHorizon;
  int action_dim = kActionDim;
  int state_dim = kFlowStateDim;
  int embed_dim = 8;
  std::vector<int> hidden{512, 512, 512};

  int input_dim() const { return horizon * action_dim + state_dim + embed_dim + 3; }
  void validate() const;
};

/// DenseNet field conditioned on the proprioceptive state, a learned
/// per-instruction embedding and (tau, sin 2 pi tau, cos 2 pi tau).
class FlowModel final : public FlowField {
 public:
  FlowModel() = default;
  FlowModel(FlowSpec spec, std::vector<std::string> tasks, Normalizer actions, Normalizer states, Rng& rng);
  FlowModel(FlowSpec spec, std::vector<std::string> tasks, Normalizer actions, Normalizer states, DenseNet net,
            Eigen::MatrixXd embedding);

  int horizon() const override { return spec_.horizon; }
  int action_dim() const override { return spec_.action_dim; }
  Eigen::MatrixXd velocity(const Eigen::MatrixXd& noised, const Eigen::MatrixXd& states, std::span<const int> tasks,
                           std::span<const double> taus) const override;

  struct LossGrad {
    double loss = 0.0;
    Eigen::VectorXd net_grad;
    Eigen::MatrixXd embed_grad;  // E x tasks
  };
  LossGrad loss_and_grad(const FlowBatch& batch, const FlowNoise& noise) const;

  int task_index(const std::string& language) const;

  const FlowSpec& spec() const { return spec_; }
  const std::vector<std::string>& tasks() const { return tasks_; }
  const Normalizer& action_normalizer() const { return actions_; }
  const Normalizer& state_normalizer() const { return states_; }
  const DenseNet& net() const { return net_; }
  DenseNet& net() { return net_; }
  const Eigen::MatrixXd& embedding() const { return embedding_; }
  Eigen::MatrixXd& embedding() { return embedding_; }

 private:
  Eigen::MatrixXd input(const Eigen::MatrixXd& noised, const Eigen::MatrixXd& states, std::span<const int> tasks,
                        std::span<const double> taus) const;

  FlowSpec spec_;
  std::vector<std::string> tasks_;
  Normalizer actions_, states_;
  DenseNet net_;
  Eigen::MatrixXd embedding_;
};

/// Euler integration from tau = 0 (pure noise) to 1 in `steps` equal steps:
/// A <- A - dtau * field(A, tau), since dA/dtau = A - eps. Returns the chunk
/// denormalized, with the last four (command) columns clamped to the ranges.
ActionChunk sample_chunk(const FlowField& field, const Normalizer& actions, const Eigen::VectorXd& state_normalized,
                         int task, int steps, Rng& rng);
ActionChunk sample_chunk(const FlowModel& model, const Eigen::VectorXd& state, const std::string& language, int steps,
                         Rng& rng);

/// Sliding windows (stride 1, tail padded with the last action) over
/// retargeted episodes. The state paired with the window starting at step t
/// is the proprioceptive state after step t - 1 (step 0 pairs with itself).
struct FlowDataset {
  std::vector<std::string> tasks;       // sorted unique instructions
  Normalizer actions, states;
  std::vector<Eigen::MatrixXd> episode_actions;  // A x T each, normalized
  std::vector<Eigen::MatrixXd> episode_states;   // S x T each, normalized
  std::vector<int> episode_task;
  std::vector<std::pair<std::size_t, std::size_t>> windows;  // (episode, start)

  FlowBatch gather(std::span<const std::size_t> window_ids, int horizon) const;
};

FlowDataset make_flow_dataset(const std::vector<RetargetedEpisode>& reps, int horizon = kChunkHorizon);

struct FlowTrainConfig {
  FlowSpec spec;
  std::size_t steps = 2000;
  std::size_t batch = 64;
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8};
  std::size_t checkpoint_every = 500;  // 0 disables periodic checkpoints
  std::uint64_t seed = 0;

  void validate() const;
};

/// Everything needed to continue training exactly where it stopped.
struct FlowTrainingState {
  FlowModel model;
  AdamState net_adam;
  AdamState embed_adam;
  Rng rng;
  std::size_t step = 0;
  std::vector<double> losses;  // one per completed step
  std::size_t clip_events = 0;
};

FlowTrainingState init_flow_training(const FlowDataset& data, const FlowTrainConfig& cfg);

struct FlowHooks {
  std::function<void(const FlowTrainingState&)> on_checkpoint;
};

// Advances to `until_step` (clamped to cfg.steps).
void continue_flow_training(FlowTrainingState& state, const FlowDataset& data, const FlowTrainConfig& cfg,
                            std::size_t until_step, const FlowHooks& hooks = {});

FlowTrainingState train_flow(const FlowDataset& data, const FlowTrainConfig& cfg, const FlowHooks& hooks = {});

Archive flow_model_archive(const FlowModel& model);
FlowModel flow_model_from_archive(const Archive& a);
Archive flow_state_archive(const FlowTrainingState& s);
FlowTrainingState flow_state_from_archive(const Archive& a);

std::string flow_loss_csv(const std::vector<double>& losses);

}  // namespace retarget
