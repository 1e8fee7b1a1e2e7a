#include "retarget/chain_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "retarget/error.hpp"

namespace retarget {

using nlohmann::json;

namespace {

Vec3 vec3_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(what + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Pose pose_from(const json& j, const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + ": expected {\"position\", \"orientation\"}");
  Vec3 p = j.contains("position") ? vec3_from(j.at("position"), what + ".position") : Vec3::Zero();
  Quat q = Quat::Identity();
  if (j.contains("orientation")) {
    const auto& o = j.at("orientation");
    if (!o.is_array() || o.size() != 4) throw ValidationError(what + ".orientation: expected [w, x, y, z]");
    q = Quat(o[0].get<double>(), o[1].get<double>(), o[2].get<double>(), o[3].get<double>());
    if (std::abs(q.norm() - 1.0) > 1e-6) throw ValidationError(what + ".orientation is not a unit quaternion");
  }
  return {p, q};
}

json pose_to(const Pose& p) {
  const auto& q = p.orientation();
  return {{"position", {p.position().x(), p.position().y(), p.position().z()}},
          {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

void require_schema(const json& j, const char* schema) {
  if (!j.contains("schema") || j.at("schema") != schema)
    throw ValidationError(std::string("expected schema \"") + schema + "\"");
}

KinematicChain chain_from(const json& j) {
  require_schema(j, kChainSchema);
  const std::string name = j.at("name").get<std::string>();
  std::vector<Joint> joints;
  for (const auto& jj : j.at("joints")) {
    Joint joint;
    joint.name = jj.at("name").get<std::string>();
    joint.axis = vec3_from(jj.at("axis"), "joint " + joint.name + " axis");
    if (jj.contains("offset")) joint.offset = pose_from(jj.at("offset"), "joint " + joint.name + " offset");
    const auto& lim = jj.at("limits");
    if (!lim.is_array() || lim.size() != 2) throw ValidationError("joint " + joint.name + ": limits must be [lo, hi]");
    joint.limits = {lim[0].get<double>(), lim[1].get<double>()};
    joints.push_back(std::move(joint));
  }
  Pose tool = j.contains("tool") ? pose_from(j.at("tool"), "tool") : Pose::identity();
  return KinematicChain(name, std::move(joints), tool);
}

json chain_to(const KinematicChain& chain) {
  json joints = json::array();
  for (const auto& jt : chain.joints()) {
    joints.push_back({{"name", jt.name},
                      {"axis", {jt.axis.x(), jt.axis.y(), jt.axis.z()}},
                      {"offset", pose_to(jt.offset)},
                      {"limits", {jt.limits.lo, jt.limits.hi}}});
  }
  return {{"schema", kChainSchema}, {"name", chain.name()}, {"joints", joints}, {"tool", pose_to(chain.tool())}};
}

json parse_or_throw(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::VectorXd vec_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json vec_to(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

KinematicChain parse_chain(const std::string& json_text) {
  try {
    return chain_from(parse_or_throw(json_text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("chain config: ") + e.what());
  }
}

std::string dump_chain(const KinematicChain& chain) { return chain_to(chain).dump(2); }

KinematicChain load_chain(const std::filesystem::path& path) { return parse_chain(read_text(path)); }

void save_chain(const KinematicChain& chain, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump_chain(chain) << '\n';
}

HumanoidModel parse_humanoid(const std::string& json_text) {
  try {
    const json j = parse_or_throw(json_text);
    require_schema(j, kHumanoidSchema);
    HumanoidModel m{
        .left_arm = chain_from(j.at("left_arm")),
        .right_arm = chain_from(j.at("right_arm")),
        .left_mount = pose_from(j.at("left_mount"), "left_mount"),
        .right_mount = pose_from(j.at("right_mount"), "right_mount"),
        .left_home = vec_from(j.at("left_home")),
        .right_home = vec_from(j.at("right_home")),
    };
    m.wrist_to_torso = j.value("wrist_to_torso", m.wrist_to_torso);
    m.standing_height = j.value("standing_height", m.standing_height);
    if (!m.left_arm.within_limits(m.left_home) || !m.right_arm.within_limits(m.right_home))
      throw ValidationError("humanoid config: home posture outside joint limits");
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("humanoid config: ") + e.what());
  }
}

std::string dump_humanoid(const HumanoidModel& m) {
  json j{{"schema", kHumanoidSchema},
         {"left_arm", chain_to(m.left_arm)},
         {"right_arm", chain_to(m.right_arm)},
         {"left_mount", pose_to(m.left_mount)},
         {"right_mount", pose_to(m.right_mount)},
         {"left_home", vec_to(m.left_home)},
         {"right_home", vec_to(m.right_home)},
         {"wrist_to_torso", m.wrist_to_torso},
         {"standing_height", m.standing_height}};
  return j.dump(2);
}

HumanoidModel load_humanoid(const std::filesystem::path& path) { return parse_humanoid(read_text(path)); }

}  // namespace retarget
