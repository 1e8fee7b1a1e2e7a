#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retarget/flow.hpp"
#include "retarget/metrics.hpp"
#include "retarget/retarget.hpp"

namespace retarget {

struct EvalConfig {
  std::size_t dtw_radius = 1;
  int denoise_steps = 4;
  std::size_t max_episodes = 0;  // 0 = all
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpisodeEval {
  std::string episode_id;
  TrackingMetrics tracking;
  double dtw_exact = 0.0;  // per-step, flow prediction vs retargeted right arm
  double dtw_fast = 0.0;
  double dtw_hold = 0.0;   // per-step exact DTW of a hold-initial-posture baseline
};

struct EvalSummary {
  std::size_t episodes = 0;
  TrackingMetrics tracking;  // over all evaluated steps
  double dtw_exact = 0.0;    // means over episodes
  double dtw_fast = 0.0;
  double dtw_hold = 0.0;
  std::size_t dtw_radius = 1;
  std::vector<EpisodeEval> per_episode;
};

/// Right-arm trajectory predicted open loop by the flow head: a chunk is
/// sampled every `horizon` steps from the recorded proprioceptive state at
/// that step and the leading rows are kept. Columns are time steps.
Eigen::MatrixXd predict_right_arm(const FlowModel& model, const RetargetedEpisode& rep, int denoise_steps, Rng& rng);

// Right-arm joints of a retargeted episode, one column per step.
Eigen::MatrixXd right_arm_trajectory(const RetargetedEpisode& rep);

/// Tracking MAE of the retargeted data plus DTW between flow-predicted and
/// retargeted right-arm joint trajectories, each joint scaled by its
/// training-data standard deviation. Episode-parallel, ordered reduction.
EvalSummary evaluate(const std::vector<RetargetedEpisode>& reps, const FlowModel& model, const EvalConfig& cfg);

std::string eval_summary_json(const EvalSummary& s);
EvalSummary eval_summary_from_json(const std::string& text);
std::string eval_episodes_csv(const EvalSummary& s);

}  // namespace retarget
