#include "retarget/triplets.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "retarget/error.hpp"
#include "retarget/text_io.hpp"

namespace retarget {

using nlohmann::json;

namespace {

struct StatsBuilder {
  ResidualStats s;
  double pos_sum = 0.0, rot_sum = 0.0;

  void add(const PoseError& e) {
    ++s.count;
    pos_sum += e.position;
    rot_sum += e.rotation;
    s.position_max = std::max(s.position_max, e.position);
    s.rotation_max = std::max(s.rotation_max, e.rotation);
  }
  ResidualStats finish() const {
    ResidualStats out = s;
    if (s.count > 0) {
      out.position_mean = pos_sum / static_cast<double>(s.count);
      out.rotation_mean = rot_sum / static_cast<double>(s.count);
    }
    return out;
  }
};

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json joints_json(const JointVector& q) { return {{"chain", q.chain}, {"q", vec_json(q.values)}}; }
JointVector joints_from(const json& j) { return {j.at("chain").get<std::string>(), vec_from(j.at("q"))}; }

json pose_json(const Pose& p) {
  const auto& q = p.orientation();
  return {{"p", {p.position().x(), p.position().y(), p.position().z()}}, {"q", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from(const json& j) {
  const auto& p = j.at("p");
  const auto& q = j.at("q");
  if (p.size() != 3 || q.size() != 4) throw ValidationError("pose needs p[3] and q[4]");
  return {Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>()),
          Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>())};
}

json stats_json(const ResidualStats& s) {
  return {{"count", s.count},
          {"position_mean_m", s.position_mean},
          {"position_max_m", s.position_max},
          {"rotation_mean_rad", s.rotation_mean},
          {"rotation_max_rad", s.rotation_max}};
}

ResidualStats stats_from(const json& j) {
  return {j.at("count").get<std::size_t>(), j.at("position_mean_m").get<double>(), j.at("position_max_m").get<double>(),
          j.at("rotation_mean_rad").get<double>(), j.at("rotation_max_rad").get<double>()};
}

}  // namespace

TripletManifest make_manifest(const std::vector<RetargetedEpisode>& reps) {
  TripletManifest m;
  StatsBuilder left, right, both;
  for (const auto& r : reps) {
    ++m.episodes;
    ++m.task_episodes[r.task_id];
    m.steps += r.steps.size();
    for (const auto& s : r.steps) {
      left.add(s.left_residual);
      right.add(s.right_residual);
      both.add(s.left_residual);
      both.add(s.right_residual);
    }
  }
  m.left = left.finish();
  m.right = right.finish();
  m.both = both.finish();
  return m;
}

std::string triplet_to_line(const RetargetedEpisode& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    const auto& b = s.base;
    steps.push_back({{"t", s.t},
                     {"left_arm", joints_json(s.action.left_arm)},
                     {"right_arm", joints_json(s.action.right_arm)},
                     {"left_hand", joints_json(s.action.left_hand)},
                     {"right_hand", joints_json(s.action.right_hand)},
                     {"command", {s.action.command.vx, s.action.command.vy, s.action.command.vyaw, s.action.command.h}},
                     {"goal", {{"left", pose_json(s.goal.left)}, {"right", pose_json(s.goal.right)}}},
                     {"realized", {{"left", pose_json(s.realized.left)}, {"right", pose_json(s.realized.right)}}},
                     {"base", {b.x, b.y, b.yaw, b.h, b.vx, b.vy, b.vyaw, b.h_rate}},
                     {"left_residual", {s.left_residual.position, s.left_residual.rotation}},
                     {"right_residual", {s.right_residual.position, s.right_residual.rotation}}});
  }
  json j{{"schema", kTripletSchema},
         {"episode_id", r.episode_id},
         {"task_id", r.task_id},
         {"language", r.language},
         {"vision_refs", r.vision_refs},
         {"source_embodiment", r.source_embodiment},
         {"embodiment", r.embodiment},
         {"frequency_hz", r.frequency},
         {"steps", std::move(steps)}};
  return j.dump();
}

RetargetedEpisode triplet_from_line(const std::string& line) {
  RetargetedEpisode r;
  try {
    const json j = json::parse(line);
    if (j.value("schema", std::string()) != kTripletSchema)
      throw ValidationError(std::string("expected schema ") + kTripletSchema);
    r.episode_id = j.at("episode_id").get<std::string>();
    r.task_id = j.at("task_id").get<std::string>();
    r.language = j.at("language").get<std::string>();
    r.vision_refs = j.at("vision_refs").get<std::vector<std::string>>();
    r.source_embodiment = j.at("source_embodiment").get<std::string>();
    r.embodiment = j.at("embodiment").get<std::string>();
    r.frequency = j.at("frequency_hz").get<double>();
    for (const auto& js : j.at("steps")) {
      RetargetedStep s;
      s.t = js.at("t").get<double>();
      s.action.left_arm = joints_from(js.at("left_arm"));
      s.action.right_arm = joints_from(js.at("right_arm"));
      s.action.left_hand = joints_from(js.at("left_hand"));
      s.action.right_hand = joints_from(js.at("right_hand"));
      const auto c = js.at("command").get<std::vector<double>>();
      if (c.size() != 4) throw ValidationError("command needs 4 values");
      s.action.command = {c[0], c[1], c[2], c[3]};
      s.goal = {pose_from(js.at("goal").at("left")), pose_from(js.at("goal").at("right"))};
      s.realized = {pose_from(js.at("realized").at("left")), pose_from(js.at("realized").at("right"))};
      const auto b = js.at("base").get<std::vector<double>>();
      if (b.size() != 8) throw ValidationError("base needs 8 values");
      s.base = {b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]};
      const auto lr = js.at("left_residual").get<std::vector<double>>();
      const auto rr = js.at("right_residual").get<std::vector<double>>();
      if (lr.size() != 2 || rr.size() != 2) throw ValidationError("residuals need 2 values");
      s.left_residual = {lr[0], lr[1]};
      s.right_residual = {rr[0], rr[1]};
      r.steps.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed triplet record: ") + e.what());
  }
  return r;
}

std::string manifest_to_json(const TripletManifest& m) {
  json j{{"schema", kManifestSchema},
         {"episodes", m.episodes},
         {"steps", m.steps},
         {"task_episodes", m.task_episodes},
         {"residuals", {{"left", stats_json(m.left)}, {"right", stats_json(m.right)}, {"both", stats_json(m.both)}}}};
  return j.dump(2) + "\n";
}

TripletManifest manifest_from_json(const std::string& text) {
  TripletManifest m;
  try {
    const json j = json::parse(text);
    if (j.value("schema", std::string()) != kManifestSchema)
      throw ValidationError(std::string("expected schema ") + kManifestSchema);
    m.episodes = j.at("episodes").get<std::size_t>();
    m.steps = j.at("steps").get<std::size_t>();
    m.task_episodes = j.at("task_episodes").get<std::map<std::string, std::size_t>>();
    const auto& r = j.at("residuals");
    m.left = stats_from(r.at("left"));
    m.right = stats_from(r.at("right"));
    m.both = stats_from(r.at("both"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset) {
  return std::filesystem::path(dataset.string() + ".manifest.json");
}

std::filesystem::path export_triplets(const std::vector<RetargetedEpisode>& reps, const std::filesystem::path& path) {
  if (reps.empty()) throw ValidationError("export_triplets: nothing to export");
  std::vector<std::string> lines;
  lines.reserve(reps.size());
  for (const auto& r : reps) lines.push_back(triplet_to_line(r));
  write_lines(path, lines);
  const auto manifest = manifest_path_for(path);
  write_text_file(manifest, manifest_to_json(make_manifest(reps)));
  return manifest;
}

std::vector<RetargetedEpisode> read_triplets(const std::filesystem::path& path) {
  std::vector<RetargetedEpisode> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(triplet_from_line(line));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace retarget
