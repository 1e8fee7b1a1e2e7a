#include "stages.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>

#include <nlohmann/json.hpp>

#include "retarget/archive.hpp"
#include "retarget/augment.hpp"
#include "retarget/dense_net.hpp"
#include "retarget/episode_io.hpp"
#include "retarget/error.hpp"
#include "retarget/heatmap.hpp"
#include "retarget/metrics.hpp"
#include "retarget/report.hpp"
#include "retarget/text_io.hpp"
#include "retarget/triplets.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace retarget::cli {
namespace {

void note(const StageContext& ctx, const std::string& msg) {
  if (ctx.verbose) std::cerr << msg << "\n";
}

void done(const std::string& stage, const fs::path& dir) { std::cout << stage << ": wrote " << dir.string() << "\n"; }

// Fresh stage directory with the config snapshot in place.
fs::path begin_stage(const StageContext& ctx, const fs::path& dir) {
  fs::create_directories(dir);
  write_text_file(dir / "config.json", to_json(ctx.cfg).dump(2) + "\n");
  return dir;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path))
    throw ValidationError("missing input " + path.string() + "; run `retarget " + producer +
                          "` with the same --config and --out first");
}

json stats_json(const AxisStats& s) {
  return {{"count", s.count},
          {"mean", {s.mean.x(), s.mean.y(), s.mean.z()}},
          {"stddev", {s.stddev.x(), s.stddev.y(), s.stddev.z()}}};
}

json tracking_json(const TrackingMetrics& m) {
  return {{"e_p_cm", m.e_p},          {"e_r_deg", m.e_r},          {"left_e_p_cm", m.left_e_p},
          {"left_e_r_deg", m.left_e_r}, {"right_e_p_cm", m.right_e_p}, {"right_e_r_deg", m.right_e_r},
          {"steps", m.steps}};
}

TrackingMetrics pooled_tracking(const std::vector<RetargetedEpisode>& reps) {
  TrackingAccumulator acc;
  for (const auto& rep : reps)
    for (const auto& s : rep.steps) acc.add(s.left_residual, s.right_residual);
  return acc.finish();
}

void write_heatmaps(const std::vector<Episode>& eps, const HeatmapSpec& spec, const fs::path& dir,
                    const std::string& prefix) {
  const Heatmap map = workspace_heatmap(eps, spec);
  write_text_file(dir / (prefix + "_left.csv"), heatmap_csv(map, map.left));
  write_text_file(dir / (prefix + "_right.csv"), heatmap_csv(map, map.right));
}

std::vector<GoalStream> goal_streams(const std::vector<Episode>& eps, double wrist_to_torso) {
  std::vector<GoalStream> out;
  out.reserve(eps.size());
  for (const auto& ep : eps) out.push_back(make_goal_stream(ep, wrist_to_torso));
  return out;
}

std::string checkpoint_name(std::size_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%04zu.rtnet", iteration);
  return buf;
}

}  // namespace

void gen_seeds(const StageContext& ctx) {
  const RunLayout run{ctx.out};
  const fs::path dir = begin_stage(ctx, run.seeds());
  const auto eps = generate_synthetic_seeds(ctx.cfg.seeds, ctx.cfg.stage_seed("seeds"));
  write_episodes(eps, dir / "episodes.jsonl");

  std::map<std::string, std::size_t> families;
  std::size_t steps = 0, mobile = 0, hands = 0;
  for (const auto& ep : eps) {
    ++families[ep.metadata.at("family")];
    steps += ep.steps.size();
    if (!ep.is_static()) ++mobile;
    if (ep.end_effector == "hand") ++hands;
  }
  write_json(dir / "stats.json", {{"episodes", eps.size()},
                                  {"steps", steps},
                                  {"mobile", mobile},
                                  {"static", eps.size() - mobile},
                                  {"hand_episodes", hands},
                                  {"families", families},
                                  {"position_stats", stats_json(compute_axis_stats(eps))}});
  note(ctx, "generated " + std::to_string(eps.size()) + " episodes");
  done("gen-seeds", dir);
}

void preprocess(const StageContext& ctx) {
  const RunLayout run{ctx.out};
  const fs::path input = run.seeds() / "episodes.jsonl";
  require(input, "gen-seeds");

  ReadReport read_report;
  const auto source =
      read_episodes(input, ctx.cfg.skip_invalid ? ReadMode::kSkipInvalid : ReadMode::kStrict, &read_report);
  if (source.empty()) throw ValidationError("no valid episodes in " + input.string());

  const fs::path dir = begin_stage(ctx, run.preprocess());
  const PreprocessConfig& pc = ctx.cfg.preprocess;
  std::vector<Episode> out;
  out.reserve(source.size());
  if (ctx.cfg.per_hand_stats) {
    const AxisStats left = compute_axis_stats(source, HandSelection::kLeft);
    const AxisStats right = compute_axis_stats(source, HandSelection::kRight);
    for (const auto& ep : source) out.push_back(preprocess_episode(ep, left, right, pc));
  } else {
    const AxisStats pooled = compute_axis_stats(source);
    for (const auto& ep : source) out.push_back(preprocess_episode(ep, pooled, pc));
  }
  write_episodes(out, dir / "episodes.jsonl");

  json excluded = json::array();
  for (const auto& e : read_report.excluded)
    excluded.push_back({{"line", e.line}, {"episode_id", e.episode_id}, {"reason", e.reason}});
  write_json(dir / "stats.json", {{"episodes", out.size()},
                                  {"excluded", excluded},
                                  {"source", stats_json(compute_axis_stats(source))},
                                  {"result", stats_json(compute_axis_stats(out))}});
  write_heatmaps(source, ctx.cfg.heatmap, dir, "heatmap_source");
  write_heatmaps(out, ctx.cfg.heatmap, dir, "heatmap_target");
  note(ctx, "preprocessed " + std::to_string(out.size()) + " episodes, excluded " +
                std::to_string(read_report.excluded.size()));
  done("preprocess", dir);
}

void augment(const StageContext& ctx) {
  const RunLayout run{ctx.out};
  const fs::path input = run.preprocess() / "episodes.jsonl";
  require(input, "preprocess");
  const auto source = read_episodes(input);

  const fs::path dir = begin_stage(ctx, run.augment());
  std::vector<Episode> out;
  for (const auto& ep : source) {
    if (!ep.preprocessed())
      throw ValidationError("episode " + ep.episode_id + " is not preprocessed; rerun `retarget preprocess`");
    for (auto& a : augment_heights(ep, ctx.cfg.augment)) out.push_back(std::move(a.episode));
  }
  write_episodes(out, dir / "episodes.jsonl");
  write_json(dir / "summary.json", {{"source_episodes", source.size()},
                                    {"variants", ctx.cfg.augment.variants},
                                    {"episodes", out.size()},
                                    {"seed", ctx.cfg.augment.seed}});
  done("augment", dir);
}

void train_manager(const StageContext& ctx, std::optional<TrainMode> only) {
  const RunLayout run{ctx.out};
  const fs::path input = run.augment() / "episodes.jsonl";
  require(input, "augment");
  const auto pool = goal_streams(read_episodes(input), ctx.cfg.augment.wrist_to_torso);
  const SimConfig sim = ctx.cfg.sim_config();

  std::vector<TrainMode> modes = ctx.cfg.modes;
  if (only) modes = {*only};
  for (TrainMode mode : modes) {
    TrainerConfig tc = ctx.cfg.trainer;
    tc.mode = mode;
    const fs::path dir = begin_stage(ctx, run.manager(mode));
    fs::create_directories(dir / "checkpoints");

    TrainHooks hooks;
    hooks.on_iteration = [&](const IterationRecord& r, const ManagerNet& net) {
      const std::size_t every = ctx.cfg.checkpoint_every;
      if (every > 0 && (r.iteration + 1) % every == 0)
        save_net(net.net(), dir / "checkpoints" / checkpoint_name(r.iteration + 1));
      if (ctx.verbose && r.validation) {
        std::fprintf(stderr, "[%s] it %zu  L_roll %.4f  |D| %zu  E_p %.2f cm  E_r %.2f deg\n",
                     to_string(mode).c_str(), r.iteration, r.l_rollout, r.dataset_size, r.validation->all.e_p,
                     r.validation->all.e_r);
      }
    };
    const TrainResult result = retarget::train_manager(tc, pool, sim, hooks);
    save_net(result.policy.net(), dir / "manager.rtnet");
    write_text_file(dir / "log.csv", train_log_csv(result.log));
    write_text_file(dir / "summary.json",
                    run_summary_json(summarize_run(tc, result.log), ctx.cfg.include_wall_time));
    done("train-manager", dir);
  }
}

void retarget_stage(const StageContext& ctx) {
  const RunLayout run{ctx.out};
  const fs::path input = run.preprocess() / "episodes.jsonl";
  const fs::path net_path = run.manager(ctx.cfg.policy_mode) / "manager.rtnet";
  require(input, "preprocess");
  require(net_path, "train-manager");
  const auto eps = read_episodes(input);
  const ManagerNet manager(load_net(net_path));

  const fs::path dir = begin_stage(ctx, run.retarget());
  RetargetConfig rc = ctx.cfg.retarget_config();
  const auto reps = retarget_episodes(eps, manager, rc);
  export_triplets(reps, dir / "triplets.jsonl");
  const TrackingMetrics primary = pooled_tracking(reps);
  note(ctx, "retargeted " + std::to_string(reps.size()) + " episodes, E_p " + std::to_string(primary.e_p) + " cm");

  if (ctx.cfg.compare_cold_start) {
    rc.sim.warm_start = !rc.sim.warm_start;
    const TrackingMetrics other = pooled_tracking(retarget_episodes(eps, manager, rc));
    const TrackingMetrics& warm = ctx.cfg.warm_start ? primary : other;
    const TrackingMetrics& cold = ctx.cfg.warm_start ? other : primary;
    const double rel = cold.e_p > 0.0 ? std::abs(warm.e_p - cold.e_p) / cold.e_p : 0.0;
    write_json(dir / "warm_start.json",
               {{"warm", tracking_json(warm)}, {"cold", tracking_json(cold)}, {"relative_e_p_difference", rel}});
  }
  write_json(dir / "tracking.json", tracking_json(primary));
  done("retarget", dir);
}

void train_flow(const StageContext& ctx, bool resume) {
  const RunLayout run{ctx.out};
  const fs::path input = run.retarget() / "triplets.jsonl";
  require(input, "retarget");
  const FlowDataset data = make_flow_dataset(read_triplets(input));

  const fs::path dir = run.flow();
  const fs::path checkpoint = dir / "checkpoint.rtarch";
  const bool resuming = resume && fs::exists(checkpoint);
  begin_stage(ctx, dir);

  FlowHooks hooks;
  hooks.on_checkpoint = [&](const FlowTrainingState& s) {
    save_archive(flow_state_archive(s), checkpoint);
    note(ctx, "flow step " + std::to_string(s.step) + " loss " + std::to_string(s.losses.back()));
  };
  FlowTrainingState state = resuming ? flow_state_from_archive(load_archive(checkpoint))
                                     : init_flow_training(data, ctx.cfg.flow);
  if (resuming) note(ctx, "resuming flow training at step " + std::to_string(state.step));
  continue_flow_training(state, data, ctx.cfg.flow, ctx.cfg.flow.steps, hooks);

  save_archive(flow_state_archive(state), checkpoint);
  save_archive(flow_model_archive(state.model), dir / "model.rtarch");
  write_text_file(dir / "loss.csv", flow_loss_csv(state.losses));
  done("train-flow", dir);
}

void eval(const StageContext& ctx) {
  const RunLayout run{ctx.out};
  const fs::path triplets = run.retarget() / "triplets.jsonl";
  const fs::path model_path = run.flow() / "model.rtarch";
  require(triplets, "retarget");
  require(model_path, "train-flow");
  const auto reps = read_triplets(triplets);
  const FlowModel model = flow_model_from_archive(load_archive(model_path));

  const fs::path dir = begin_stage(ctx, run.eval());
  const EvalSummary s = evaluate(reps, model, ctx.cfg.eval);
  write_text_file(dir / "summary.json", eval_summary_json(s));
  write_text_file(dir / "episodes.csv", eval_episodes_csv(s));
  done("eval", dir);
}

void report(const StageContext& ctx) {
  const RunLayout run{ctx.out};
  std::vector<fs::path> dirs;
  for (TrainMode m : ctx.cfg.modes) {
    require(run.manager(m) / "summary.json", "train-manager");
    dirs.push_back(run.manager(m));
  }
  std::optional<fs::path> eval_path;
  if (fs::exists(run.eval() / "summary.json")) eval_path = run.eval() / "summary.json";

  const fs::path dir = begin_stage(ctx, run.report());
  const BaselineReport r = compare_baselines(dirs, eval_path, ctx.cfg.include_wall_time);
  write_text_file(dir / "report.csv", report_csv(r));
  write_text_file(dir / "report.txt", report_text(r));
  done("report", dir);
}

}  // namespace retarget::cli
