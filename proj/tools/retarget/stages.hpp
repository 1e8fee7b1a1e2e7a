#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "run_config.hpp"

namespace retarget::cli {

struct StageContext {
  RunConfig cfg;
  std::filesystem::path out;
  bool verbose = false;
};

// Layout of a run directory; every stage writes only below its own folder.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path seeds() const { return root / "seeds"; }
  std::filesystem::path preprocess() const { return root / "preprocess"; }
  std::filesystem::path augment() const { return root / "augment"; }
  std::filesystem::path manager(TrainMode m) const { return root / "manager" / to_string(m); }
  std::filesystem::path retarget() const { return root / "retarget"; }
  std::filesystem::path flow() const { return root / "flow"; }
  std::filesystem::path eval() const { return root / "eval"; }
  std::filesystem::path report() const { return root / "report"; }
};

void gen_seeds(const StageContext& ctx);
void preprocess(const StageContext& ctx);
void augment(const StageContext& ctx);
// Trains every configured mode, or only `only` when given.
void train_manager(const StageContext& ctx, std::optional<TrainMode> only = std::nullopt);
void retarget_stage(const StageContext& ctx);
void train_flow(const StageContext& ctx, bool resume);
void eval(const StageContext& ctx);
void report(const StageContext& ctx);

}  // namespace retarget::cli
