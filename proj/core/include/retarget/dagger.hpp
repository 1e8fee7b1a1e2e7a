#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "retarget/adam.hpp"
#include "retarget/manager_policy.hpp"
#include "retarget/metrics.hpp"
#include "retarget/simulator.hpp"

namespace retarget {

enum class TrainMode {
  kHarmonized,      // rollout step every iteration, aggregate every M iterations
  kOnline,          // rollout step only, no dataset
  kOnlineDagger,    // harmonized with M = 1
  kStandardDagger,  // aggregate every iteration, train on the dataset only
};

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

/// Append-only store of (state, heuristic label) pairs.
class AggregatedDataset {
 public:
  void append(const ManagerState& s, const LowerBodyCommand& a);
  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const ManagerState& state(std::size_t i) const { return states_[i]; }
  const LowerBodyCommand& label(std::size_t i) const { return labels_[i]; }

 private:
  std::vector<ManagerState> states_;
  std::vector<LowerBodyCommand> labels_;
};

// Appends every (state, target) record of the batch in env-major order.
void aggregate(AggregatedDataset& d, const RolloutBatch& batch);

// Exact mean command loss over the whole dataset.
double da_loss(const ManagerNet& policy, const AggregatedDataset& d, const LossWeights& weights = {});

struct TrainerConfig {
  TrainMode mode = TrainMode::kHarmonized;
  std::size_t envs = 512;          // N
  std::size_t steps = 50;          // T
  std::size_t iterations = 200;    // K
  std::size_t period = 10;         // M
  AdamConfig adam;
  LossWeights weights;
  std::vector<int> hidden{256, 256};
  std::size_t da_batch = 4096;     // minibatch size over D
  std::size_t da_epochs = 1;       // passes over D per aggregation event
  std::size_t da_max_batches = 0;  // cap on minibatches per event, 0 = none
  std::size_t validation_episodes = 32;
  std::size_t validation_every = 10;  // also validated before training and after the last iteration
  std::size_t validation_steps = 0;   // per episode, 0 = whole episode
  std::uint64_t seed = 0;

  // Aggregation period actually used by the mode.
  std::size_t effective_period() const;
  bool aggregates_at(std::size_t iteration) const;
  bool rollout_step() const { return mode != TrainMode::kStandardDagger; }
  bool uses_dataset() const { return mode != TrainMode::kOnline; }
  void validate() const;
};

struct ValidationMetrics {
  TrackingMetrics all;
  TrackingMetrics mobile;
  TrackingMetrics static_;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 0-based
  double l_rollout = 0.0;     // on this iteration's batch, before the update
  std::optional<double> l_da; // mean minibatch loss of the aggregation event
  std::size_t dataset_size = 0;
  std::size_t clip_events = 0;
  std::size_t wraps = 0;
  double seconds = 0.0;       // wall time since training started
  std::optional<ValidationMetrics> validation;
};

struct TrainLog {
  TrainMode mode = TrainMode::kHarmonized;
  std::size_t train_episodes = 0;
  std::size_t validation_episodes = 0;
  ValidationMetrics initial;  // untrained manager
  std::vector<IterationRecord> iterations;

  const ValidationMetrics& final_validation() const;
  std::size_t aggregation_events() const;
};

struct TrainHooks {
  std::function<void(const IterationRecord&, const ManagerNet&)> on_iteration;
};

/// Splits the pool into held-out validation streams and training streams.
/// The validation subset is drawn from `seed`; if the pool is too small to
/// hold out, all streams are used for both.
struct StreamSplit {
  std::vector<GoalStream> train;
  std::vector<GoalStream> validation;
};
StreamSplit split_streams(std::vector<GoalStream> pool, std::size_t validation, std::uint64_t seed);

ValidationMetrics validate_policy(const SimConfig& sim, const ManagerPolicy& policy,
                                  const std::vector<GoalStream>& streams, std::size_t max_steps, std::uint64_t seed);

struct TrainResult {
  ManagerNet policy;
  TrainLog log;
};

/// Manager training loop. Per iteration i (0-based): roll out the current
/// policy, take one rollout-loss step (unless standard DAgger), and when
/// `aggregates_at(i)` append the batch to D and train on D. Deterministic
/// given the config; throws RuntimeFailure if a loss becomes non-finite.
TrainResult train_manager(const TrainerConfig& cfg, const std::vector<GoalStream>& pool, const SimConfig& sim,
                          const TrainHooks& hooks = {});

// CSV with one row per iteration; validation columns empty when not measured.
std::string train_log_csv(const TrainLog& log);

}  // namespace retarget
