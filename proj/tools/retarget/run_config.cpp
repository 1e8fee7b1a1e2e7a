#include "run_config.hpp"

#include <set>
#include <type_traits>

#include "retarget/chain_io.hpp"
#include "retarget/error.hpp"
#include "retarget/rng.hpp"
#include "retarget/text_io.hpp"

namespace retarget::cli {

using nlohmann::json;

namespace {

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed parsing assumes a 64-bit size_t");

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ != nullptr && !j_->is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& what) {
    throw ValidationError("config: " + key + ": " + what);
  }

  std::string key_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const char* key) {
    seen_.insert(key);
    if (j_ == nullptr) return nullptr;
    auto it = j_->find(key);
    if (it == j_->end() || it->is_null()) return nullptr;
    return &*it;
  }

  Section section(const char* key) { return Section(find(key), key_path(key)); }

  template <class T>
  void get(const char* key, T& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    try {
      read(*v, out);
    } catch (const json::exception& e) {
      fail(key_path(key), e.what());
    } catch (const ValidationError& e) {
      fail(key_path(key), e.what());
    }
  }

  void finish() const {
    if (j_ == nullptr) return;
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!seen_.contains(it.key())) fail(key_path(it.key().c_str()), "unknown key");
  }

 private:
  static void read(const json& v, double& out) {
    if (!v.is_number()) throw ValidationError("expected a number");
    out = v.get<double>();
  }
  static void read(const json& v, bool& out) {
    if (!v.is_boolean()) throw ValidationError("expected true or false");
    out = v.get<bool>();
  }
  static void read(const json& v, std::string& out) {
    if (!v.is_string()) throw ValidationError("expected a string");
    out = v.get<std::string>();
  }
  static void read(const json& v, int& out) {
    if (!v.is_number_integer()) throw ValidationError("expected an integer");
    out = v.get<int>();
  }
  static void read(const json& v, std::size_t& out) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ValidationError("expected a non-negative integer");
    out = v.get<std::size_t>();
  }
  static void read(const json& v, Interval& out) {
    if (!v.is_array() || v.size() != 2) throw ValidationError("expected [lo, hi]");
    read(v[0], out.lo);
    read(v[1], out.hi);
  }
  template <int N>
  static void read(const json& v, Eigen::Matrix<double, N, 1>& out) {
    if (!v.is_array() || v.size() != N) throw ValidationError("expected " + std::to_string(N) + " numbers");
    for (int i = 0; i < N; ++i) read(v[i], out[i]);
  }
  template <class T>
  static void read(const json& v, std::vector<T>& out) {
    if (!v.is_array()) throw ValidationError("expected an array");
    out.assign(v.size(), T{});
    for (std::size_t i = 0; i < v.size(); ++i) read(v[i], out[i]);
  }
  static void read(const json& v, MotionFamily& out) {
    std::string s;
    read(v, s);
    out = motion_family_from_string(s);
  }
  static void read(const json& v, TrainMode& out) {
    std::string s;
    read(v, s);
    out = train_mode_from_string(s);
  }
  static void read(const json& v, AxisPair& out) {
    std::vector<int> axes;
    read(v, axes);
    if (axes.size() != 2) throw ValidationError("expected two axis indices");
    out = {axes[0], axes[1]};
  }

  const json* j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

}  // namespace

PreprocessConfig default_preprocess() {
  PreprocessConfig p;
  p.target.mean.x() = 0.30;
  p.target.stddev.x() = 0.06;
  return p;
}

std::uint64_t RunConfig::stage_seed(std::string_view stage) const { return mix_seed(seed ^ hash_string(stage)); }

SimConfig RunConfig::sim_config() const {
  SimConfig s;
  if (humanoid) s.model = load_humanoid(*humanoid);
  s.worker = worker;
  s.ik = ik;
  s.warm_start = warm_start;
  s.validate();
  return s;
}

RetargetConfig RunConfig::retarget_config() const {
  RetargetConfig r;
  r.sim = sim_config();
  r.control_rate = control_rate;
  r.embodiment = embodiment;
  r.seed = stage_seed("retarget");
  r.validate();
  return r;
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  Section root(&j, "");
  root.get("seed", c.seed);
  root.get("threads", c.threads);
  root.get("out", c.out);
  if (const json* h = root.find("humanoid")) {
    if (!h->is_string()) Section::fail("humanoid", "expected a path string");
    c.humanoid = h->get<std::string>();
  }

  {
    Section s = root.section("seeds");
    SeedSpec& d = c.seeds;
    s.get("episodes", d.episodes);
    s.get("duration", d.duration);
    s.get("frequency", d.frequency);
    s.get("x", d.x);
    s.get("y", d.y);
    s.get("z", d.z);
    s.get("v_max", d.v_max);
    s.get("families", d.families);
    s.get("mobile_fraction", d.mobile_fraction);
    s.get("body_speed", d.body_speed);
    s.get("body_yaw_rate", d.body_yaw_rate);
    s.get("hand_fraction", d.hand_fraction);
    s.get("embodiment", d.embodiment);
    s.finish();
  }
  {
    Section s = root.section("preprocess");
    s.get("beta", c.preprocess.beta);
    s.get("z_lo", c.preprocess.z_lo);
    s.get("z_hi", c.preprocess.z_hi);
    s.get("target_x_mean", c.preprocess.target.mean.x());
    s.get("target_x_std", c.preprocess.target.stddev.x());
    s.get("per_hand_stats", c.per_hand_stats);
    s.get("skip_invalid", c.skip_invalid);
    Section h = s.section("heatmap");
    h.get("plane", c.heatmap.plane);
    h.get("nx", c.heatmap.nx);
    h.get("nz", c.heatmap.nz);
    h.get("bandwidth", c.heatmap.bandwidth);
    h.finish();
    s.finish();
  }
  {
    Section s = root.section("augment");
    s.get("h_lo", c.augment.h_lo);
    s.get("h_hi", c.augment.h_hi);
    s.get("variants", c.augment.variants);
    s.get("offset_knots", c.augment.offset_knots);
    s.get("max_offset", c.augment.max_offset);
    s.get("wrist_to_torso", c.augment.wrist_to_torso);
    s.finish();
  }
  {
    Section s = root.section("worker");
    s.get("tau_v", c.worker.tau_v);
    s.get("height_rate", c.worker.height_rate);
    s.get("noise_std", c.worker.noise_std);
    s.get("dt", c.worker.dt);
    s.get("h_min", c.worker.h_min);
    s.get("h_max", c.worker.h_max);
    s.finish();
  }
  {
    Section s = root.section("ik");
    s.get("damping", c.ik.damping);
    s.get("step_scale", c.ik.step_scale);
    s.get("pos_tol", c.ik.pos_tol);
    s.get("rot_tol", c.ik.rot_tol);
    s.get("max_iterations", c.ik.max_iterations);
    s.get("stall_iterations", c.ik.stall_iterations);
    s.get("stall_tol", c.ik.stall_tol);
    s.get("restarts", c.ik.restarts);
    s.get("warm_start", c.warm_start);
    s.finish();
  }
  {
    Section s = root.section("manager");
    TrainerConfig& t = c.trainer;
    s.get("modes", c.modes);
    s.get("policy_mode", c.policy_mode);
    s.get("envs", t.envs);
    s.get("steps", t.steps);
    s.get("iterations", t.iterations);
    s.get("period", t.period);
    s.get("lr", t.adam.lr);
    s.get("beta1", t.adam.beta1);
    s.get("beta2", t.adam.beta2);
    s.get("eps", t.adam.eps);
    s.get("loss_weights", t.weights.w);
    s.get("hidden", t.hidden);
    s.get("da_batch", t.da_batch);
    s.get("da_epochs", t.da_epochs);
    s.get("da_max_batches", t.da_max_batches);
    s.get("validation_episodes", t.validation_episodes);
    s.get("validation_every", t.validation_every);
    s.get("validation_steps", t.validation_steps);
    s.get("checkpoint_every", c.checkpoint_every);
    s.finish();
  }
  {
    Section s = root.section("retarget");
    s.get("control_rate", c.control_rate);
    s.get("embodiment", c.embodiment);
    s.get("compare_cold_start", c.compare_cold_start);
    s.finish();
  }
  {
    Section s = root.section("flow");
    FlowTrainConfig& f = c.flow;
    s.get("steps", f.steps);
    s.get("batch", f.batch);
    s.get("lr", f.adam.lr);
    s.get("embed_dim", f.spec.embed_dim);
    s.get("hidden", f.spec.hidden);
    s.get("checkpoint_every", f.checkpoint_every);
    s.finish();
  }
  {
    Section s = root.section("eval");
    s.get("dtw_radius", c.eval.dtw_radius);
    s.get("denoise_steps", c.eval.denoise_steps);
    s.get("max_episodes", c.eval.max_episodes);
    s.finish();
  }
  {
    Section s = root.section("report");
    s.get("include_wall_time", c.include_wall_time);
    s.finish();
  }
  root.finish();

  if (c.out.empty()) Section::fail("out", "must not be empty");
  if (c.modes.empty()) Section::fail("manager.modes", "at least one mode is required");
  if (c.control_rate <= 0.0) Section::fail("retarget.control_rate", "must be positive");

  c.augment.seed = c.stage_seed("augment");
  c.trainer.seed = c.stage_seed("manager");
  c.flow.seed = c.stage_seed("flow");
  c.eval.seed = c.stage_seed("eval");
  c.trainer.mode = c.policy_mode;

  // Section validators name the module; prefix the section for context.
  auto check = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      Section::fail(section, e.what());
    }
  };
  check("seeds", [&] { c.seeds.validate(); });
  check("preprocess", [&] { c.preprocess.validate(); });
  check("augment", [&] { c.augment.validate(); });
  check("worker", [&] { c.worker.validate(); });
  check("manager", [&] { c.trainer.validate(); });
  check("flow", [&] { c.flow.validate(); });
  check("eval", [&] { c.eval.validate(); });
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["humanoid"] = c.humanoid ? json(c.humanoid->string()) : json(nullptr);

  const SeedSpec& d = c.seeds;
  json families = json::array();
  for (MotionFamily f : d.families) families.push_back(to_string(f));
  j["seeds"] = {{"episodes", d.episodes},
                {"duration", d.duration},
                {"frequency", d.frequency},
                {"x", interval_json(d.x)},
                {"y", interval_json(d.y)},
                {"z", interval_json(d.z)},
                {"v_max", d.v_max},
                {"families", families},
                {"mobile_fraction", d.mobile_fraction},
                {"body_speed", d.body_speed},
                {"body_yaw_rate", d.body_yaw_rate},
                {"hand_fraction", d.hand_fraction},
                {"embodiment", d.embodiment}};

  j["preprocess"] = {{"beta", c.preprocess.beta},
                     {"z_lo", c.preprocess.z_lo},
                     {"z_hi", c.preprocess.z_hi},
                     {"target_x_mean", c.preprocess.target.mean.x()},
                     {"target_x_std", c.preprocess.target.stddev.x()},
                     {"per_hand_stats", c.per_hand_stats},
                     {"skip_invalid", c.skip_invalid},
                     {"heatmap",
                      {{"plane", json::array({c.heatmap.plane.horizontal, c.heatmap.plane.vertical})},
                       {"nx", c.heatmap.nx},
                       {"nz", c.heatmap.nz},
                       {"bandwidth", c.heatmap.bandwidth}}}};

  const HeightAugmentSpec& a = c.augment;
  j["augment"] = {{"h_lo", a.h_lo},
                  {"h_hi", a.h_hi},
                  {"variants", a.variants},
                  {"offset_knots", a.offset_knots},
                  {"max_offset", a.max_offset},
                  {"wrist_to_torso", a.wrist_to_torso}};

  const WorkerModel& w = c.worker;
  j["worker"] = {{"tau_v", w.tau_v},
                 {"height_rate", w.height_rate},
                 {"noise_std", json::array({w.noise_std[0], w.noise_std[1], w.noise_std[2]})},
                 {"dt", w.dt},
                 {"h_min", w.h_min},
                 {"h_max", w.h_max}};

  j["ik"] = {{"damping", c.ik.damping},
             {"step_scale", c.ik.step_scale},
             {"pos_tol", c.ik.pos_tol},
             {"rot_tol", c.ik.rot_tol},
             {"max_iterations", c.ik.max_iterations},
             {"stall_iterations", c.ik.stall_iterations},
             {"stall_tol", c.ik.stall_tol},
             {"restarts", c.ik.restarts},
             {"warm_start", c.warm_start}};

  const TrainerConfig& t = c.trainer;
  json modes = json::array();
  for (TrainMode m : c.modes) modes.push_back(to_string(m));
  const auto& lw = t.weights.w;
  j["manager"] = {{"modes", modes},
                  {"policy_mode", to_string(c.policy_mode)},
                  {"envs", t.envs},
                  {"steps", t.steps},
                  {"iterations", t.iterations},
                  {"period", t.period},
                  {"lr", t.adam.lr},
                  {"beta1", t.adam.beta1},
                  {"beta2", t.adam.beta2},
                  {"eps", t.adam.eps},
                  {"loss_weights", json::array({lw[0], lw[1], lw[2], lw[3]})},
                  {"hidden", t.hidden},
                  {"da_batch", t.da_batch},
                  {"da_epochs", t.da_epochs},
                  {"da_max_batches", t.da_max_batches},
                  {"validation_episodes", t.validation_episodes},
                  {"validation_every", t.validation_every},
                  {"validation_steps", t.validation_steps},
                  {"checkpoint_every", c.checkpoint_every}};

  j["retarget"] = {{"control_rate", c.control_rate},
                   {"embodiment", c.embodiment},
                   {"compare_cold_start", c.compare_cold_start}};

  j["flow"] = {{"steps", c.flow.steps},
               {"batch", c.flow.batch},
               {"lr", c.flow.adam.lr},
               {"embed_dim", c.flow.spec.embed_dim},
               {"hidden", c.flow.spec.hidden},
               {"checkpoint_every", c.flow.checkpoint_every}};

  j["eval"] = {{"dtw_radius", c.eval.dtw_radius},
               {"denoise_steps", c.eval.denoise_steps},
               {"max_episodes", c.eval.max_episodes}};

  j["report"] = {{"include_wall_time", c.include_wall_time}};
  return j;
}

}  // namespace retarget::cli
