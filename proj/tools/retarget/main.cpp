// retarget: runs the retargeting pipeline one stage at a time.
//
// Exit codes: 0 success, 1 validation (bad config, bad flags, missing or
// invalid inputs), 2 runtime failure (I/O, numerical divergence).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "retarget/error.hpp"
#include "retarget/parallel.hpp"
#include "retarget/text_io.hpp"
#include "run_config.hpp"
#include "stages.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace retarget;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  bool verbose = false;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

// Precedence: flag, then environment, then the config file.
cli::StageContext resolve(const GlobalFlags& flags) {
  const fs::path path = flags.config;
  if (!fs::exists(path)) throw ValidationError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: " + path.string() + " must hold a JSON object");

  if (auto s = env("RETARGET_SEED")) {
    try {
      std::size_t used = 0;
      j["seed"] = std::stoull(*s, &used);
      if (used != s->size()) throw std::invalid_argument(*s);
    } catch (const std::exception&) {
      throw ValidationError("RETARGET_SEED must be a non-negative integer, got '" + *s + "'");
    }
  }
  if (auto o = env("RETARGET_OUT")) j["out"] = *o;
  if (flags.seed) j["seed"] = *flags.seed;
  if (flags.out) j["out"] = *flags.out;
  if (flags.threads) j["threads"] = *flags.threads;

  cli::StageContext ctx{cli::parse_run_config(j), {}, flags.verbose};
  ctx.out = ctx.cfg.out;
  set_thread_count(ctx.cfg.threads);
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Humanoid end-effector retargeting pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config, "Run configuration (JSON)")->required();
  app.add_option("--seed", flags.seed, "Override the global seed");
  app.add_option("--out", flags.out, "Run directory");
  app.add_option("--threads", flags.threads, "Worker threads, 0 = all cores");
  app.add_flag("-v,--verbose", flags.verbose, "Progress on stderr");

  std::optional<std::string> mode_name;
  bool resume = false;

  auto* seeds = app.add_subcommand("gen-seeds", "Generate synthetic source episodes");
  auto* pre = app.add_subcommand("preprocess", "Map source wrists into the humanoid workspace");
  auto* aug = app.add_subcommand("augment", "Add height variants of preprocessed episodes");
  auto* mgr = app.add_subcommand("train-manager", "Train the lower-body manager policy");
  mgr->add_option("--mode", mode_name, "Train a single mode instead of all configured modes");
  auto* ret = app.add_subcommand("retarget", "Retarget preprocessed episodes onto the humanoid");
  auto* flow = app.add_subcommand("train-flow", "Train the flow-matching action head");
  flow->add_flag("--resume", resume, "Continue from flow/checkpoint.rtarch when present");
  auto* ev = app.add_subcommand("eval", "Evaluate tracking and DTW of the action head");
  auto* rep = app.add_subcommand("report", "Tabulate manager runs and evaluation");
  auto* all = app.add_subcommand("pipeline", "Run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const cli::StageContext ctx = resolve(flags);
    if (seeds->parsed()) cli::gen_seeds(ctx);
    else if (pre->parsed()) cli::preprocess(ctx);
    else if (aug->parsed()) cli::augment(ctx);
    else if (mgr->parsed()) {
      std::optional<TrainMode> only;
      if (mode_name) only = train_mode_from_string(*mode_name);
      cli::train_manager(ctx, only);
    } else if (ret->parsed()) cli::retarget_stage(ctx);
    else if (flow->parsed()) cli::train_flow(ctx, resume);
    else if (ev->parsed()) cli::eval(ctx);
    else if (rep->parsed()) cli::report(ctx);
    else if (all->parsed()) {
      cli::gen_seeds(ctx);
      cli::preprocess(ctx);
      cli::augment(ctx);
      cli::train_manager(ctx);
      cli::retarget_stage(ctx);
      cli::train_flow(ctx, false);
      cli::eval(ctx);
      cli::report(ctx);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
