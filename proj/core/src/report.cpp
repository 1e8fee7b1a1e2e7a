#include "retarget/report.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "retarget/error.hpp"
#include "retarget/text_io.hpp"

namespace retarget {

using nlohmann::json;

ManagerRunSummary summarize_run(const TrainerConfig& cfg, const TrainLog& log) {
  ManagerRunSummary s;
  s.mode = to_string(cfg.mode);
  s.envs = cfg.envs;
  s.steps = cfg.steps;
  s.iterations = cfg.iterations;
  s.period = cfg.effective_period();
  s.seed = cfg.seed;
  s.dataset_size = log.iterations.empty() ? 0 : log.iterations.back().dataset_size;
  s.aggregation_events = log.aggregation_events();
  s.initial = log.initial;
  s.final = log.final_validation();
  s.wall_seconds = log.iterations.empty() ? 0.0 : log.iterations.back().seconds;
  return s;
}

namespace {

json metrics_json(const TrackingMetrics& m) {
  return {{"e_p_cm", m.e_p}, {"e_r_deg", m.e_r}, {"steps", m.steps}};
}

TrackingMetrics metrics_from(const json& j) {
  TrackingMetrics m;
  m.e_p = j.at("e_p_cm").get<double>();
  m.e_r = j.at("e_r_deg").get<double>();
  m.steps = j.at("steps").get<std::size_t>();
  return m;
}

json validation_json(const ValidationMetrics& v) {
  return {{"all", metrics_json(v.all)}, {"mobile", metrics_json(v.mobile)}, {"static", metrics_json(v.static_)}};
}

ValidationMetrics validation_from(const json& j) {
  return {metrics_from(j.at("all")), metrics_from(j.at("mobile")), metrics_from(j.at("static"))};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string run_summary_json(const ManagerRunSummary& s, bool include_wall_time) {
  json j{{"schema", "retarget.manager-run/1"},
         {"mode", s.mode},
         {"envs", s.envs},
         {"steps", s.steps},
         {"iterations", s.iterations},
         {"period", s.period},
         {"seed", s.seed},
         {"dataset_size", s.dataset_size},
         {"aggregation_events", s.aggregation_events},
         {"initial", validation_json(s.initial)},
         {"final", validation_json(s.final)},
         {"wall_seconds", include_wall_time ? s.wall_seconds : 0.0}};
  return j.dump(2) + "\n";
}

ManagerRunSummary run_summary_from_json(const std::string& text) {
  ManagerRunSummary s;
  try {
    const json j = json::parse(text);
    if (j.value("schema", std::string()) != "retarget.manager-run/1")
      throw ValidationError("expected schema retarget.manager-run/1");
    s.mode = j.at("mode").get<std::string>();
    s.envs = j.at("envs").get<std::size_t>();
    s.steps = j.at("steps").get<std::size_t>();
    s.iterations = j.at("iterations").get<std::size_t>();
    s.period = j.at("period").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.dataset_size = j.at("dataset_size").get<std::size_t>();
    s.aggregation_events = j.at("aggregation_events").get<std::size_t>();
    s.initial = validation_from(j.at("initial"));
    s.final = validation_from(j.at("final"));
    s.wall_seconds = j.at("wall_seconds").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed run summary: ") + e.what());
  }
  return s;
}

BaselineReport compare_baselines(const std::vector<std::filesystem::path>& run_dirs,
                                 const std::optional<std::filesystem::path>& eval_summary, bool include_wall_time) {
  if (run_dirs.empty()) throw ValidationError("report: no training runs given");
  BaselineReport r;
  r.include_wall_time = include_wall_time;
  for (const auto& dir : run_dirs) {
    const auto summary = dir / "summary.json";
    const auto log = dir / "log.csv";
    if (!std::filesystem::exists(summary) || !std::filesystem::exists(log))
      throw ValidationError("report: run directory " + dir.string() +
                            " has no summary.json/log.csv; run train-manager first");
    r.rows.push_back(run_summary_from_json(read_text_file(summary)));
  }
  if (eval_summary) {
    if (!std::filesystem::exists(*eval_summary))
      throw ValidationError("report: evaluation summary " + eval_summary->string() + " is missing; run eval first");
    r.eval = eval_summary_from_json(read_text_file(*eval_summary));
  }
  return r;
}

std::string report_csv(const BaselineReport& r) {
  std::string out =
      "mode,envs,steps,iterations,period,dataset_size,aggregation_events,e_p_initial_cm,e_p_cm,e_r_deg,"
      "e_p_mobile_cm,e_p_static_cm,e_r_mobile_deg,e_r_static_deg";
  out += r.include_wall_time ? ",wall_seconds\n" : "\n";
  for (const auto& s : r.rows) {
    out += s.mode + "," + std::to_string(s.envs) + "," + std::to_string(s.steps) + "," + std::to_string(s.iterations) +
           "," + std::to_string(s.period) + "," + std::to_string(s.dataset_size) + "," +
           std::to_string(s.aggregation_events) + "," + fmt("%.4f", s.initial.all.e_p) + "," +
           fmt("%.4f", s.final.all.e_p) + "," + fmt("%.4f", s.final.all.e_r) + "," + fmt("%.4f", s.final.mobile.e_p) +
           "," + fmt("%.4f", s.final.static_.e_p) + "," + fmt("%.4f", s.final.mobile.e_r) + "," +
           fmt("%.4f", s.final.static_.e_r);
    out += r.include_wall_time ? "," + fmt("%.2f", s.wall_seconds) + "\n" : "\n";
  }
  if (r.eval) {
    const auto& e = *r.eval;
    out += "\nmetric,value\n";
    out += "eval_episodes," + std::to_string(e.episodes) + "\n";
    out += "retarget_e_p_cm," + fmt("%.4f", e.tracking.e_p) + "\n";
    out += "retarget_e_r_deg," + fmt("%.4f", e.tracking.e_r) + "\n";
    out += "dtw_exact," + fmt("%.6f", e.dtw_exact) + "\n";
    out += "dtw_fast," + fmt("%.6f", e.dtw_fast) + "\n";
    out += "dtw_hold_baseline," + fmt("%.6f", e.dtw_hold) + "\n";
  }
  return out;
}

std::string report_text(const BaselineReport& r) {
  std::vector<std::string> head{"mode", "N", "T", "K", "M", "|D|", "agg", "Ep0(cm)", "Ep(cm)", "Er(deg)",
                                "Ep mob", "Ep sta", "Er mob", "Er sta"};
  if (r.include_wall_time) head.push_back("wall(s)");
  std::vector<std::vector<std::string>> rows{head};
  for (const auto& s : r.rows) {
    std::vector<std::string> row{s.mode,
                                 std::to_string(s.envs),
                                 std::to_string(s.steps),
                                 std::to_string(s.iterations),
                                 std::to_string(s.period),
                                 std::to_string(s.dataset_size),
                                 std::to_string(s.aggregation_events),
                                 fmt("%.2f", s.initial.all.e_p),
                                 fmt("%.2f", s.final.all.e_p),
                                 fmt("%.2f", s.final.all.e_r),
                                 fmt("%.2f", s.final.mobile.e_p),
                                 fmt("%.2f", s.final.static_.e_p),
                                 fmt("%.2f", s.final.mobile.e_r),
                                 fmt("%.2f", s.final.static_.e_r)};
    if (r.include_wall_time) row.push_back(fmt("%.1f", s.wall_seconds));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::string out = "Manager training (validation tracking MAE on held-out episodes)\n";
  out += "Ep0 = untrained manager; Mobile/Static split by whether the source body moves.\n\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string& cell = row[c];
      if (c == 0)
        out += cell + std::string(width[c] - cell.size(), ' ');
      else
        out += "  " + std::string(width[c] - cell.size(), ' ') + cell;
    }
    out += "\n";
  }
  if (r.eval) {
    const auto& e = *r.eval;
    out += "\nRetargeted dataset and flow head (" + std::to_string(e.episodes) + " episodes)\n";
    out += "DTW distance: accumulated Euclidean cost over the right-arm joints, each joint divided by its\n";
    out += "training-data std, divided by the warping-path length. FastDTW radius " + std::to_string(e.dtw_radius) +
           ".\n\n";
    out += "  retarget E_p (cm)        " + fmt("%10.4f", e.tracking.e_p) + "\n";
    out += "  retarget E_r (deg)       " + fmt("%10.4f", e.tracking.e_r) + "\n";
    out += "  DTW exact (flow)         " + fmt("%10.6f", e.dtw_exact) + "\n";
    out += "  DTW fast (flow)          " + fmt("%10.6f", e.dtw_fast) + "\n";
    out += "  DTW exact (hold posture) " + fmt("%10.6f", e.dtw_hold) + "\n";
  }
  return out;
}

}  // namespace retarget
