#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "retarget/dagger.hpp"
#include "retarget/eval.hpp"

namespace retarget {

/// Final numbers of one manager training run, as stored in its run directory.
struct ManagerRunSummary {
  std::string mode;
  std::size_t envs = 0, steps = 0, iterations = 0, period = 0;
  std::uint64_t seed = 0;
  std::size_t dataset_size = 0;
  std::size_t aggregation_events = 0;
  ValidationMetrics initial;
  ValidationMetrics final;
  double wall_seconds = 0.0;
};

ManagerRunSummary summarize_run(const TrainerConfig& cfg, const TrainLog& log);

// `include_wall_time` false writes 0 so reruns are byte-identical.
std::string run_summary_json(const ManagerRunSummary& s, bool include_wall_time);
ManagerRunSummary run_summary_from_json(const std::string& text);

struct BaselineReport {
  std::vector<ManagerRunSummary> rows;
  std::optional<EvalSummary> eval;
  bool include_wall_time = false;
};

/// Reads `summary.json` from each run directory (given order kept) and
/// optionally an evaluation summary. Throws ValidationError naming any
/// directory whose logs are missing.
BaselineReport compare_baselines(const std::vector<std::filesystem::path>& run_dirs,
                                 const std::optional<std::filesystem::path>& eval_summary = std::nullopt,
                                 bool include_wall_time = false);

std::string report_csv(const BaselineReport& r);
std::string report_text(const BaselineReport& r);

}  // namespace retarget
