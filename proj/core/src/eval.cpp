#include "retarget/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "retarget/dtw.hpp"
#include "retarget/error.hpp"
#include "retarget/parallel.hpp"

namespace retarget {

namespace {

constexpr Eigen::Index kRightArmOffset = 7;
constexpr Eigen::Index kArmDof = 7;

}  // namespace

void EvalConfig::validate() const {
  if (denoise_steps < 1) throw ValidationError("eval: denoise_steps must be >= 1");
}

Eigen::MatrixXd right_arm_trajectory(const RetargetedEpisode& rep) {
  Eigen::MatrixXd out(kArmDof, static_cast<Eigen::Index>(rep.steps.size()));
  for (std::size_t t = 0; t < rep.steps.size(); ++t) {
    const auto& q = rep.steps[t].action.right_arm.values;
    if (q.size() != kArmDof) throw ValidationError("eval: expected 7-dof right arm in '" + rep.episode_id + "'");
    out.col(static_cast<Eigen::Index>(t)) = q;
  }
  return out;
}

Eigen::MatrixXd predict_right_arm(const FlowModel& model, const RetargetedEpisode& rep, int denoise_steps, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(rep.steps.size());
  const int h = model.horizon();
  Eigen::MatrixXd out(kArmDof, n);
  for (Eigen::Index t = 0; t < n; t += h) {
    const Eigen::VectorXd state = flow_state_vector(rep.steps[static_cast<std::size_t>(std::max<Eigen::Index>(t - 1, 0))]);
    const ActionChunk c = sample_chunk(model, state, rep.language, denoise_steps, rng);
    const Eigen::Index keep = std::min<Eigen::Index>(h, n - t);
    out.middleCols(t, keep) = c.block(0, kRightArmOffset, keep, kArmDof).transpose();
  }
  return out;
}

EvalSummary evaluate(const std::vector<RetargetedEpisode>& all, const FlowModel& model, const EvalConfig& cfg) {
  cfg.validate();
  if (all.empty()) throw ValidationError("eval: no retargeted episodes");
  const std::size_t count = cfg.max_episodes == 0 ? all.size() : std::min(cfg.max_episodes, all.size());
  const PointMetric metric =
      scaled_euclidean(model.action_normalizer().stddev().segment(kRightArmOffset, kArmDof));

  EvalSummary s;
  s.dtw_radius = cfg.dtw_radius;
  s.per_episode.resize(count);
  std::vector<TrackingAccumulator> acc(count);
  parallel_for(count, [&](std::size_t i) {
    const RetargetedEpisode& rep = all[i];
    EpisodeEval& e = s.per_episode[i];
    e.episode_id = rep.episode_id;
    for (const auto& st : rep.steps) acc[i].add(st.left_residual, st.right_residual);
    e.tracking = acc[i].finish();
    Rng rng(mix_seed(cfg.seed ^ hash_string(rep.episode_id)));
    const Eigen::MatrixXd truth = right_arm_trajectory(rep);
    const Eigen::MatrixXd pred = predict_right_arm(model, rep, cfg.denoise_steps, rng);
    e.dtw_exact = dtw_exact(pred, truth, metric).per_step();
    e.dtw_fast = dtw_fast(pred, truth, cfg.dtw_radius, metric).per_step();
    const Eigen::MatrixXd hold = truth.col(0).replicate(1, truth.cols());
    e.dtw_hold = dtw_exact(hold, truth, metric).per_step();
  });
  TrackingAccumulator total;
  for (std::size_t i = 0; i < count; ++i) {
    total.merge(acc[i]);
    s.dtw_exact += s.per_episode[i].dtw_exact;
    s.dtw_fast += s.per_episode[i].dtw_fast;
    s.dtw_hold += s.per_episode[i].dtw_hold;
  }
  s.episodes = count;
  s.tracking = total.finish();
  s.dtw_exact /= static_cast<double>(count);
  s.dtw_fast /= static_cast<double>(count);
  s.dtw_hold /= static_cast<double>(count);
  return s;
}

namespace {

nlohmann::json tracking_json(const TrackingMetrics& m) {
  return {{"e_p_cm", m.e_p},          {"e_r_deg", m.e_r},          {"left_e_p_cm", m.left_e_p},
          {"left_e_r_deg", m.left_e_r}, {"right_e_p_cm", m.right_e_p}, {"right_e_r_deg", m.right_e_r},
          {"steps", m.steps}};
}

TrackingMetrics tracking_from(const nlohmann::json& j) {
  TrackingMetrics m;
  m.e_p = j.at("e_p_cm").get<double>();
  m.e_r = j.at("e_r_deg").get<double>();
  m.left_e_p = j.at("left_e_p_cm").get<double>();
  m.left_e_r = j.at("left_e_r_deg").get<double>();
  m.right_e_p = j.at("right_e_p_cm").get<double>();
  m.right_e_r = j.at("right_e_r_deg").get<double>();
  m.steps = j.at("steps").get<std::size_t>();
  return m;
}

}  // namespace

std::string eval_summary_json(const EvalSummary& s) {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : s.per_episode)
    eps.push_back({{"episode_id", e.episode_id},
                   {"tracking", tracking_json(e.tracking)},
                   {"dtw_exact", e.dtw_exact},
                   {"dtw_fast", e.dtw_fast},
                   {"dtw_hold", e.dtw_hold}});
  nlohmann::json j{{"schema", "retarget.eval/1"},
                   {"episodes", s.episodes},
                   {"tracking", tracking_json(s.tracking)},
                   {"dtw_exact", s.dtw_exact},
                   {"dtw_fast", s.dtw_fast},
                   {"dtw_hold", s.dtw_hold},
                   {"dtw_radius", s.dtw_radius},
                   {"per_episode", std::move(eps)}};
  return j.dump(2) + "\n";
}

EvalSummary eval_summary_from_json(const std::string& text) {
  EvalSummary s;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("schema", std::string()) != "retarget.eval/1") throw ValidationError("expected schema retarget.eval/1");
    s.episodes = j.at("episodes").get<std::size_t>();
    s.tracking = tracking_from(j.at("tracking"));
    s.dtw_exact = j.at("dtw_exact").get<double>();
    s.dtw_fast = j.at("dtw_fast").get<double>();
    s.dtw_hold = j.at("dtw_hold").get<double>();
    s.dtw_radius = j.at("dtw_radius").get<std::size_t>();
    for (const auto& e : j.at("per_episode"))
      s.per_episode.push_back({e.at("episode_id").get<std::string>(), tracking_from(e.at("tracking")),
                               e.at("dtw_exact").get<double>(), e.at("dtw_fast").get<double>(),
                               e.at("dtw_hold").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed evaluation summary: ") + e.what());
  }
  return s;
}

std::string eval_episodes_csv(const EvalSummary& s) {
  std::string out = "episode_id,e_p_cm,e_r_deg,dtw_exact,dtw_fast,dtw_hold\n";
  char buf[160];
  for (const auto& e : s.per_episode) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%.6f\n", e.tracking.e_p, e.tracking.e_r, e.dtw_exact,
                  e.dtw_fast, e.dtw_hold);
    out += e.episode_id + buf;
  }
  return out;
}

}  // namespace retarget
