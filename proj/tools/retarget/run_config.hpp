#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "retarget/augment.hpp"
#include "retarget/dagger.hpp"
#include "retarget/eval.hpp"
#include "retarget/flow.hpp"
#include "retarget/heatmap.hpp"
#include "retarget/preprocess.hpp"
#include "retarget/retarget.hpp"
#include "retarget/seeds.hpp"

namespace retarget::cli {

// Target x statistics of the humanoid workspace: mean 0.30 m, std 0.06 m.
PreprocessConfig default_preprocess();

/// Whole-pipeline configuration. Every section is optional; missing fields
/// keep their defaults and unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out = "run";
  std::optional<std::filesystem::path> humanoid;  // JSON model file, default built in

  SeedSpec seeds;
  PreprocessConfig preprocess = default_preprocess();
  bool per_hand_stats = false;  // standardize each wrist with its own source stats
  bool skip_invalid = true;
  HeatmapSpec heatmap;
  HeightAugmentSpec augment;
  WorkerModel worker;
  IkConfig ik{.restarts = 0};
  bool warm_start = true;
  TrainerConfig trainer;
  std::vector<TrainMode> modes{TrainMode::kHarmonized, TrainMode::kOnline};
  TrainMode policy_mode = TrainMode::kHarmonized;
  std::size_t checkpoint_every = 50;
  double control_rate = 20.0;
  std::string embodiment = "humanoid-dual-arm-7dof";
  bool compare_cold_start = true;
  FlowTrainConfig flow;
  EvalConfig eval;
  bool include_wall_time = false;

  // Stage seeds are derived from `seed` and the stage name.
  std::uint64_t stage_seed(std::string_view stage) const;
  SimConfig sim_config() const;
  RetargetConfig retarget_config() const;
};

// Throws ValidationError with the offending key path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved configuration, written to every run directory.
nlohmann::json to_json(const RunConfig& c);

}  // namespace retarget::cli
