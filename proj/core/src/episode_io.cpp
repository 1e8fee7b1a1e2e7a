#include "retarget/episode_io.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "retarget/error.hpp"
#include "retarget/text_io.hpp"

namespace retarget {

using nlohmann::json;

namespace {

json pose_json(const Pose& p) {
  const auto& q = p.orientation();
  return {{"p", {p.position().x(), p.position().y(), p.position().z()}}, {"q", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from_json(const json& j) {
  const auto& p = j.at("p");
  const auto& q = j.at("q");
  if (p.size() != 3 || q.size() != 4) throw ValidationError("pose needs p[3] and q[4]");
  const Quat quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  if (!(std::abs(quat.norm() - 1.0) <= 1e-6)) throw ValidationError("orientation is not a unit quaternion");
  return {Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>()), quat};
}

}  // namespace

std::string episode_to_line(const Episode& ep) {
  json steps = json::array();
  for (const auto& s : ep.steps) {
    json js{{"t", s.t},
            {"left", pose_json(s.left_wrist)},
            {"right", pose_json(s.right_wrist)},
            {"left_grip", s.left_grip},
            {"right_grip", s.right_grip}};
    if (s.body) js["body"] = {s.body->x, s.body->y, s.body->yaw};
    if (s.goal_height) js["goal_height"] = *s.goal_height;
    steps.push_back(std::move(js));
  }
  json j{{"schema", kEpisodeSchema},
         {"episode_id", ep.episode_id},
         {"task_id", ep.task_id},
         {"language", ep.language},
         {"frequency_hz", ep.frequency},
         {"embodiment", ep.embodiment},
         {"end_effector", ep.end_effector},
         {"vision_refs", ep.vision_refs},
         {"metadata", ep.metadata},
         {"steps", std::move(steps)}};
  return j.dump();
}

Episode episode_from_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  Episode ep;
  try {
    if (j.contains("episode_id")) ep.episode_id = j.at("episode_id").get<std::string>();
    if (j.value("schema", std::string()) != kEpisodeSchema)
      throw ValidationError(std::string("expected schema ") + kEpisodeSchema);
    ep.task_id = j.at("task_id").get<std::string>();
    ep.language = j.at("language").get<std::string>();
    ep.frequency = j.at("frequency_hz").get<double>();
    ep.embodiment = j.value("embodiment", std::string());
    ep.end_effector = j.value("end_effector", std::string("gripper"));
    if (j.contains("vision_refs")) ep.vision_refs = j.at("vision_refs").get<std::vector<std::string>>();
    if (j.contains("metadata")) ep.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& js : j.at("steps")) {
      EpisodeStep s;
      s.t = js.at("t").get<double>();
      s.left_wrist = pose_from_json(js.at("left"));
      s.right_wrist = pose_from_json(js.at("right"));
      s.left_grip = js.at("left_grip").get<double>();
      s.right_grip = js.at("right_grip").get<double>();
      if (js.contains("body")) {
        const auto& b = js.at("body");
        if (b.size() != 3) throw ValidationError("body must be [x, y, yaw]");
        s.body = PlanarPose{b[0].get<double>(), b[1].get<double>(), b[2].get<double>()};
      }
      if (js.contains("goal_height")) s.goal_height = js.at("goal_height").get<double>();
      ep.steps.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ValidationError("episode '" + ep.episode_id + "': " + e.what());
  }
  validate(ep);
  return ep;
}

std::vector<Episode> read_episodes(const std::filesystem::path& path, ReadMode mode, ReadReport* report) {
  const auto lines = read_lines(path);
  std::vector<Episode> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      out.push_back(episode_from_line(lines[i]));
    } catch (const ValidationError& e) {
      std::string id;
      try {
        id = json::parse(lines[i]).value("episode_id", std::string());
      } catch (const json::exception&) {
      }
      const std::string msg =
          path.string() + ":" + std::to_string(i + 1) + ": episode '" + id + "': " + e.what();
      if (mode == ReadMode::kStrict) throw ValidationError(msg);
      if (report) report->excluded.push_back({i + 1, id, e.what()});
    }
  }
  return out;
}

void write_episodes(const std::vector<Episode>& episodes, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  lines.reserve(episodes.size());
  for (const auto& ep : episodes) {
    validate(ep);
    lines.push_back(episode_to_line(ep));
  }
  write_lines(path, lines);
}

}  // namespace retarget
