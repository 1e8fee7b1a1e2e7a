#include "retarget/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>

#include "retarget/error.hpp"

namespace retarget {

ActionChunk noised_chunk(const ActionChunk& a, const ActionChunk& eps, double tau) {
  if (a.rows() != eps.rows() || a.cols() != eps.cols()) throw ValidationError("noised_chunk: shape mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("noised_chunk: tau outside [0, 1]");
  return tau * a + (1.0 - tau) * eps;
}

// ---- Normalizer ------------------------------------------------------------

Normalizer::Normalizer(Eigen::VectorXd mean, Eigen::VectorXd stddev) : mean_(std::move(mean)), std_(std::move(stddev)) {
  if (mean_.size() != std_.size()) throw ValidationError("Normalizer: mean and std differ in size");
  if (!(std_.array() > 0.0).all() || !mean_.allFinite() || !std_.allFinite())
    throw ValidationError("Normalizer: std must be positive and finite");
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& x) {
  if (x.cols() == 0) throw ValidationError("Normalizer::fit: no samples");
  const Eigen::VectorXd mean = x.rowwise().mean();
  Eigen::VectorXd sd = ((x.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(x.cols())).sqrt();
  for (Eigen::Index i = 0; i < sd.size(); ++i)
    if (!(sd[i] > 1e-8)) sd[i] = 1.0;
  return {mean, sd};
}

Normalizer Normalizer::identity(Eigen::Index dim) { return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)}; }

Eigen::VectorXd Normalizer::normalize(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw ValidationError("Normalizer: dimension mismatch");
  return ((x - mean_).array() / std_.array()).matrix();
}

Eigen::VectorXd Normalizer::denormalize(const Eigen::VectorXd& z) const {
  if (z.size() != dim()) throw ValidationError("Normalizer: dimension mismatch");
  return (z.array() * std_.array()).matrix() + mean_;
}

ActionChunk Normalizer::normalize_chunk(const ActionChunk& c) const {
  if (c.cols() != dim()) throw ValidationError("Normalizer: chunk width mismatch");
  return ((c.rowwise() - mean_.transpose()).array().rowwise() / std_.transpose().array()).matrix();
}

ActionChunk Normalizer::denormalize_chunk(const ActionChunk& c) const {
  if (c.cols() != dim()) throw ValidationError("Normalizer: chunk width mismatch");
  return (c.array().rowwise() * std_.transpose().array()).matrix().rowwise() + mean_.transpose();
}

Eigen::VectorXd flatten_chunk(const ActionChunk& c) { return Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()); }

ActionChunk unflatten_chunk(const Eigen::VectorXd& v, int horizon, int action_dim) {
  if (v.size() != static_cast<Eigen::Index>(horizon) * action_dim) throw ValidationError("unflatten_chunk: size mismatch");
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), horizon, action_dim);
}

Eigen::VectorXd action_vector(const WholeBodyAction& a) {
  const Eigen::Index n = a.left_arm.values.size() + a.right_arm.values.size() + a.left_hand.values.size() +
                         a.right_hand.values.size() + 4;
  Eigen::VectorXd v(n);
  v << a.left_arm.values, a.right_arm.values, a.left_hand.values, a.right_hand.values, a.command.as_vector();
  return v;
}

Eigen::VectorXd flow_state_vector(const RetargetedStep& s) {
  const auto& a = s.action;
  const Eigen::Index n =
      a.left_arm.values.size() + a.right_arm.values.size() + a.left_hand.values.size() + a.right_hand.values.size() + 4;
  Eigen::VectorXd v(n);
  v << a.left_arm.values, a.right_arm.values, a.left_hand.values, a.right_hand.values, s.base.h, s.base.vx, s.base.vy,
      s.base.vyaw;
  return v;
}

// ---- Loss ------------------------------------------------------------------

FlowNoise draw_flow_noise(Eigen::Index batch, Eigen::Index dim, Rng& rng) {
  FlowNoise n;
  n.tau.resize(static_cast<std::size_t>(batch));
  for (auto& t : n.tau) t = rng.uniform();
  n.eps.resize(dim, batch);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index i = 0; i < dim; ++i) n.eps(i, b) = rng.normal();
  return n;
}

namespace {

Eigen::MatrixXd noised_batch(const FlowBatch& batch, const FlowNoise& noise) {
  Eigen::MatrixXd x(batch.chunks.rows(), batch.chunks.cols());
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    const double t = noise.tau[static_cast<std::size_t>(b)];
    x.col(b) = t * batch.chunks.col(b) + (1.0 - t) * noise.eps.col(b);
  }
  return x;
}

void check_batch(const FlowBatch& batch, const FlowNoise& noise) {
  if (batch.size() == 0) throw ValidationError("fm_loss: empty batch");
  if (batch.states.cols() != batch.size() || static_cast<Eigen::Index>(batch.tasks.size()) != batch.size() ||
      static_cast<Eigen::Index>(noise.tau.size()) != batch.size() || noise.eps.rows() != batch.chunks.rows() ||
      noise.eps.cols() != batch.size())
    throw ValidationError("fm_loss: batch and noise shapes disagree");
}

}  // namespace

double fm_loss(const FlowField& field, const FlowBatch& batch, const FlowNoise& noise) {
  check_batch(batch, noise);
  const Eigen::MatrixXd v = field.velocity(noised_batch(batch, noise), batch.states, batch.tasks, noise.tau);
  const Eigen::MatrixXd target = noise.eps - batch.chunks;
  return (v - target).squaredNorm() / static_cast<double>(target.size());
}

double fm_loss(const FlowField& field, const FlowBatch& batch, Rng& rng) {
  return fm_loss(field, batch, draw_flow_noise(batch.size(), batch.chunks.rows(), rng));
}

// ---- Model -----------------------------------------------------------------

void FlowSpec::validate() const {
  if (horizon < 1 || action_dim < 5 || state_dim < 1 || embed_dim < 0)
    throw ValidationError("flow: horizon >= 1, action_dim >= 5 (last four are commands), state_dim >= 1 required");
  for (int h : hidden)
    if (h <= 0) throw ValidationError("flow: hidden layer sizes must be positive");
}

namespace {

std::vector<int> flow_sizes(const FlowSpec& s) {
  std::vector<int> sizes{s.input_dim()};
  sizes.insert(sizes.end(), s.hidden.begin(), s.hidden.end());
  sizes.push_back(s.horizon * s.action_dim);
  return sizes;
}

std::vector<Activation> flow_acts(const FlowSpec& s) {
  std::vector<Activation> acts(s.hidden.size(), Activation::kElu);
  acts.push_back(Activation::kIdentity);
  return acts;
}

}  // namespace

FlowModel::FlowModel(FlowSpec spec, std::vector<std::string> tasks, Normalizer actions, Normalizer states, Rng& rng)
    : spec_(std::move(spec)), tasks_(std::move(tasks)), actions_(std::move(actions)), states_(std::move(states)) {
  spec_.validate();
  net_ = DenseNet(flow_sizes(spec_), flow_acts(spec_), rng);
  embedding_.resize(spec_.embed_dim, static_cast<Eigen::Index>(tasks_.size()));
  for (Eigen::Index j = 0; j < embedding_.cols(); ++j)
    for (Eigen::Index i = 0; i < embedding_.rows(); ++i) embedding_(i, j) = rng.normal(0.0, 0.1);
  if (actions_.dim() != spec_.action_dim || states_.dim() != spec_.state_dim)
    throw ValidationError("FlowModel: normalizer dimensions do not match the spec");
  if (tasks_.empty()) throw ValidationError("FlowModel: need at least one task");
}

FlowModel::FlowModel(FlowSpec spec, std::vector<std::string> tasks, Normalizer actions, Normalizer states,
                     DenseNet net, Eigen::MatrixXd embedding)
    : spec_(std::move(spec)),
      tasks_(std::move(tasks)),
      actions_(std::move(actions)),
      states_(std::move(states)),
      net_(std::move(net)),
      embedding_(std::move(embedding)) {
  spec_.validate();
  if (net_.sizes() != flow_sizes(spec_)) throw ValidationError("FlowModel: network shape does not match the spec");
  if (embedding_.rows() != spec_.embed_dim || embedding_.cols() != static_cast<Eigen::Index>(tasks_.size()))
    throw ValidationError("FlowModel: embedding shape does not match the task list");
  if (actions_.dim() != spec_.action_dim || states_.dim() != spec_.state_dim)
    throw ValidationError("FlowModel: normalizer dimensions do not match the spec");
}

int FlowModel::task_index(const std::string& language) const {
  auto it = std::lower_bound(tasks_.begin(), tasks_.end(), language);
  if (it == tasks_.end() || *it != language) throw ValidationError("flow model has no task '" + language + "'");
  return static_cast<int>(it - tasks_.begin());
}

Eigen::MatrixXd FlowModel::input(const Eigen::MatrixXd& noised, const Eigen::MatrixXd& states,
                                 std::span<const int> tasks, std::span<const double> taus) const {
  const Eigen::Index b = noised.cols();
  const Eigen::Index ha = static_cast<Eigen::Index>(spec_.horizon) * spec_.action_dim;
  if (noised.rows() != ha || states.rows() != spec_.state_dim || states.cols() != b ||
      static_cast<Eigen::Index>(tasks.size()) != b || static_cast<Eigen::Index>(taus.size()) != b)
    throw ValidationError("FlowModel: input shapes disagree with the spec");
  Eigen::MatrixXd x(spec_.input_dim(), b);
  x.topRows(ha) = noised;
  x.middleRows(ha, spec_.state_dim) = states;
  for (Eigen::Index j = 0; j < b; ++j) {
    const int task = tasks[static_cast<std::size_t>(j)];
    if (task < 0 || task >= embedding_.cols()) throw ValidationError("FlowModel: task id out of range");
    x.col(j).segment(ha + spec_.state_dim, spec_.embed_dim) = embedding_.col(task);
    const double t = taus[static_cast<std::size_t>(j)];
    const Eigen::Index at = ha + spec_.state_dim + spec_.embed_dim;
    x(at, j) = t;
    x(at + 1, j) = std::sin(2.0 * std::numbers::pi * t);
    x(at + 2, j) = std::cos(2.0 * std::numbers::pi * t);
  }
  return x;
}

Eigen::MatrixXd FlowModel::velocity(const Eigen::MatrixXd& noised, const Eigen::MatrixXd& states,
                                    std::span<const int> tasks, std::span<const double> taus) const {
  return net_.forward(input(noised, states, tasks, taus));
}

FlowModel::LossGrad FlowModel::loss_and_grad(const FlowBatch& batch, const FlowNoise& noise) const {
  check_batch(batch, noise);
  ForwardCache cache;
  const Eigen::MatrixXd v = net_.forward(input(noised_batch(batch, noise), batch.states, batch.tasks, noise.tau), cache);
  const Eigen::MatrixXd diff = v - (noise.eps - batch.chunks);
  const double n = static_cast<double>(diff.size());
  LossGrad r;
  r.loss = diff.squaredNorm() / n;
  BackwardResult back = net_backward(net_, cache, (2.0 / n) * diff);
  r.net_grad = std::move(back.param_grad);
  r.embed_grad = Eigen::MatrixXd::Zero(embedding_.rows(), embedding_.cols());
  const Eigen::Index at = static_cast<Eigen::Index>(spec_.horizon) * spec_.action_dim + spec_.state_dim;
  for (Eigen::Index j = 0; j < batch.size(); ++j)
    r.embed_grad.col(batch.tasks[static_cast<std::size_t>(j)]) += back.input_grad.col(j).segment(at, spec_.embed_dim);
  return r;
}

// ---- Sampling --------------------------------------------------------------

ActionChunk sample_chunk(const FlowField& field, const Normalizer& actions, const Eigen::VectorXd& state_normalized,
                         int task, int steps, Rng& rng) {
  if (steps < 1) throw ValidationError("sample_chunk: steps must be >= 1");
  const int h = field.horizon(), a = field.action_dim();
  if (actions.dim() != a) throw ValidationError("sample_chunk: normalizer does not match the action dimension");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(h) * a, 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = rng.normal();
  const Eigen::MatrixXd state = state_normalized;
  const double dt = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double tau = k * dt;
    x -= dt * field.velocity(x, state, std::span(&task, 1), std::span(&tau, 1));
  }
  ActionChunk c = actions.denormalize_chunk(unflatten_chunk(x.col(0), h, a));
  for (int ch = 0; ch < 4; ++ch) {
    const Interval& r = kCommandRanges[ch];
    c.col(a - 4 + ch) = c.col(a - 4 + ch).cwiseMax(r.lo).cwiseMin(r.hi);
  }
  return c;
}

ActionChunk sample_chunk(const FlowModel& model, const Eigen::VectorXd& state, const std::string& language, int steps,
                         Rng& rng) {
  return sample_chunk(model, model.action_normalizer(), model.state_normalizer().normalize(state),
                      model.task_index(language), steps, rng);
}

// ---- Dataset ---------------------------------------------------------------

FlowBatch FlowDataset::gather(std::span<const std::size_t> ids, int horizon) const {
  const Eigen::Index a = actions.dim(), s = states.dim();
  FlowBatch b;
  b.chunks.resize(static_cast<Eigen::Index>(horizon) * a, static_cast<Eigen::Index>(ids.size()));
  b.states.resize(s, static_cast<Eigen::Index>(ids.size()));
  b.tasks.resize(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto [e, start] = windows.at(ids[k]);
    const Eigen::MatrixXd& acts = episode_actions[e];
    const Eigen::Index last = acts.cols() - 1;
    const auto col = static_cast<Eigen::Index>(k);
    for (Eigen::Index d = 0; d < a; ++d)
      for (int h = 0; h < horizon; ++h)
        b.chunks(d * horizon + h, col) = acts(d, std::min<Eigen::Index>(static_cast<Eigen::Index>(start) + h, last));
    b.states.col(col) = episode_states[e].col(static_cast<Eigen::Index>(start));
    b.tasks[k] = episode_task[e];
  }
  return b;
}

FlowDataset make_flow_dataset(const std::vector<RetargetedEpisode>& reps, int horizon) {
  if (reps.empty()) throw ValidationError("flow dataset: no episodes");
  FlowDataset d;
  std::set<std::string> names;
  std::size_t total = 0;
  for (const auto& r : reps) {
    if (r.steps.empty()) throw ValidationError("flow dataset: episode '" + r.episode_id + "' has no steps");
    names.insert(r.language);
    total += r.steps.size();
  }
  if (total < static_cast<std::size_t>(horizon))
    throw ValidationError("flow dataset: " + std::to_string(total) + " steps is shorter than one chunk of " +
                          std::to_string(horizon));
  d.tasks.assign(names.begin(), names.end());

  std::vector<Eigen::MatrixXd> raw_a, raw_s;
  Eigen::Index adim = -1, sdim = -1;
  for (const auto& r : reps) {
    const auto n = static_cast<Eigen::Index>(r.steps.size());
    Eigen::MatrixXd acts, states;
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::VectorXd av = action_vector(r.steps[static_cast<std::size_t>(t)].action);
      const Eigen::VectorXd sv = flow_state_vector(r.steps[static_cast<std::size_t>(std::max<Eigen::Index>(t - 1, 0))]);
      if (adim < 0) {
        adim = av.size();
        sdim = sv.size();
      }
      if (av.size() != adim || sv.size() != sdim)
        throw ValidationError("flow dataset: inconsistent action layout in '" + r.episode_id + "'");
      if (t == 0) {
        acts.resize(adim, n);
        states.resize(sdim, n);
      }
      acts.col(t) = av;
      states.col(t) = sv;
    }
    raw_a.push_back(std::move(acts));
    raw_s.push_back(std::move(states));
  }
  Eigen::MatrixXd all_a(adim, static_cast<Eigen::Index>(total)), all_s(sdim, static_cast<Eigen::Index>(total));
  Eigen::Index c = 0;
  for (std::size_t e = 0; e < reps.size(); ++e) {
    all_a.middleCols(c, raw_a[e].cols()) = raw_a[e];
    all_s.middleCols(c, raw_s[e].cols()) = raw_s[e];
    c += raw_a[e].cols();
  }
  d.actions = Normalizer::fit(all_a);
  d.states = Normalizer::fit(all_s);
  for (std::size_t e = 0; e < reps.size(); ++e) {
    d.episode_actions.push_back(
        ((raw_a[e].colwise() - d.actions.mean()).array().colwise() / d.actions.stddev().array()).matrix());
    d.episode_states.push_back(
        ((raw_s[e].colwise() - d.states.mean()).array().colwise() / d.states.stddev().array()).matrix());
    d.episode_task.push_back(static_cast<int>(std::lower_bound(d.tasks.begin(), d.tasks.end(), reps[e].language) -
                                              d.tasks.begin()));
    for (std::size_t t = 0; t < reps[e].steps.size(); ++t) d.windows.emplace_back(e, t);
  }
  return d;
}

// ---- Training --------------------------------------------------------------

void FlowTrainConfig::validate() const {
  spec.validate();
  if (batch == 0) throw ValidationError("flow: batch must be >= 1");
  if (!(adam.lr > 0.0)) throw ValidationError("flow: learning rate must be positive");
}

FlowTrainingState init_flow_training(const FlowDataset& data, const FlowTrainConfig& cfg) {
  cfg.validate();
  if (data.windows.empty()) throw ValidationError("flow: empty dataset");
  if (data.actions.dim() != cfg.spec.action_dim || data.states.dim() != cfg.spec.state_dim)
    throw ValidationError("flow: dataset has action/state dims " + std::to_string(data.actions.dim()) + "/" +
                          std::to_string(data.states.dim()) + " but the spec expects " +
                          std::to_string(cfg.spec.action_dim) + "/" + std::to_string(cfg.spec.state_dim));
  Rng init(mix_seed(cfg.seed ^ 0x666c6f77ULL));
  FlowTrainingState s{FlowModel(cfg.spec, data.tasks, data.actions, data.states, init),
                      {},
                      {},
                      Rng(mix_seed(cfg.seed ^ 0x62617463ULL)),
                      0,
                      {},
                      0};
  s.net_adam = AdamState::zeros(s.model.net().parameter_count(), cfg.adam);
  s.embed_adam = AdamState::zeros(s.model.embedding().size(), cfg.adam);
  return s;
}

void continue_flow_training(FlowTrainingState& s, const FlowDataset& data, const FlowTrainConfig& cfg,
                            std::size_t until_step, const FlowHooks& hooks) {
  cfg.validate();
  until_step = std::min(until_step, cfg.steps);
  std::vector<std::size_t> ids(cfg.batch);
  const auto horizon = s.model.horizon();
  while (s.step < until_step) {
    for (auto& id : ids) id = static_cast<std::size_t>(s.rng.below(data.windows.size()));
    const FlowBatch batch = data.gather(ids, horizon);
    const FlowNoise noise = draw_flow_noise(batch.size(), batch.chunks.rows(), s.rng);
    FlowModel::LossGrad lg = s.model.loss_and_grad(batch, noise);
    if (!std::isfinite(lg.loss))
      throw RuntimeFailure("flow training diverged at step " + std::to_string(s.step) + " (try a lower learning rate)");
    const double norm = std::sqrt(lg.net_grad.squaredNorm() + lg.embed_grad.squaredNorm());
    if (norm > kGradClipNorm) {
      lg.net_grad *= kGradClipNorm / norm;
      lg.embed_grad *= kGradClipNorm / norm;
      ++s.clip_events;
    }
    adam_step(s.model.net().mutable_params(), lg.net_grad, s.net_adam);
    Eigen::Map<Eigen::VectorXd> emb(s.model.embedding().data(), s.model.embedding().size());
    const Eigen::VectorXd eg = Eigen::Map<const Eigen::VectorXd>(lg.embed_grad.data(), lg.embed_grad.size());
    adam_step(emb, eg, s.embed_adam);
    s.losses.push_back(lg.loss);
    ++s.step;
    if (hooks.on_checkpoint && cfg.checkpoint_every != 0 && s.step % cfg.checkpoint_every == 0) hooks.on_checkpoint(s);
  }
}

FlowTrainingState train_flow(const FlowDataset& data, const FlowTrainConfig& cfg, const FlowHooks& hooks) {
  FlowTrainingState s = init_flow_training(data, cfg);
  continue_flow_training(s, data, cfg, cfg.steps, hooks);
  return s;
}

// ---- Persistence -----------------------------------------------------------

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void put_adam(Archive& a, const std::string& prefix, const AdamState& s) {
  a.arrays[prefix + "_m"] = to_std(s.m);
  a.arrays[prefix + "_v"] = to_std(s.v);
  a.arrays[prefix + "_meta"] = {static_cast<double>(s.step), s.cfg.lr, s.cfg.beta1, s.cfg.beta2, s.cfg.eps};
}

AdamState get_adam(const Archive& a, const std::string& prefix) {
  const auto& meta = a.array(prefix + "_meta");
  if (meta.size() != 5) throw ValidationError("flow checkpoint: bad optimizer metadata");
  AdamState s;
  s.step = static_cast<std::uint64_t>(meta[0]);
  s.cfg = {meta[1], meta[2], meta[3], meta[4]};
  s.m = to_eigen(a.array(prefix + "_m"));
  s.v = to_eigen(a.array(prefix + "_v"));
  return s;
}

}  // namespace

Archive flow_model_archive(const FlowModel& m) {
  Archive a;
  const FlowSpec& s = m.spec();
  a.blobs["spec"] = nlohmann::json{{"horizon", s.horizon},
                                   {"action_dim", s.action_dim},
                                   {"state_dim", s.state_dim},
                                   {"embed_dim", s.embed_dim},
                                   {"hidden", s.hidden}}
                        .dump();
  a.blobs["tasks"] = nlohmann::json(m.tasks()).dump();
  a.blobs["net"] = serialize_net(m.net());
  a.arrays["embedding"] = to_std(Eigen::Map<const Eigen::VectorXd>(m.embedding().data(), m.embedding().size()));
  a.arrays["action_mean"] = to_std(m.action_normalizer().mean());
  a.arrays["action_std"] = to_std(m.action_normalizer().stddev());
  a.arrays["state_mean"] = to_std(m.state_normalizer().mean());
  a.arrays["state_std"] = to_std(m.state_normalizer().stddev());
  return a;
}

FlowModel flow_model_from_archive(const Archive& a) {
  FlowSpec s;
  std::vector<std::string> tasks;
  try {
    const auto j = nlohmann::json::parse(a.blob("spec"));
    s.horizon = j.at("horizon").get<int>();
    s.action_dim = j.at("action_dim").get<int>();
    s.state_dim = j.at("state_dim").get<int>();
    s.embed_dim = j.at("embed_dim").get<int>();
    s.hidden = j.at("hidden").get<std::vector<int>>();
    tasks = nlohmann::json::parse(a.blob("tasks")).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("flow checkpoint: bad metadata: ") + e.what());
  }
  const auto& emb = a.array("embedding");
  if (emb.size() != static_cast<std::size_t>(s.embed_dim) * tasks.size())
    throw ValidationError("flow checkpoint: embedding size mismatch");
  Eigen::MatrixXd embedding =
      Eigen::Map<const Eigen::MatrixXd>(emb.data(), s.embed_dim, static_cast<Eigen::Index>(tasks.size()));
  return FlowModel(s, std::move(tasks), Normalizer(to_eigen(a.array("action_mean")), to_eigen(a.array("action_std"))),
                   Normalizer(to_eigen(a.array("state_mean")), to_eigen(a.array("state_std"))),
                   deserialize_net(a.blob("net")), std::move(embedding));
}

Archive flow_state_archive(const FlowTrainingState& s) {
  Archive a = flow_model_archive(s.model);
  put_adam(a, "adam_net", s.net_adam);
  put_adam(a, "adam_embed", s.embed_adam);
  a.blobs["rng"] = s.rng.serialize();
  a.arrays["losses"] = s.losses;
  a.arrays["progress"] = {static_cast<double>(s.step), static_cast<double>(s.clip_events)};
  return a;
}

FlowTrainingState flow_state_from_archive(const Archive& a) {
  FlowTrainingState s{flow_model_from_archive(a), get_adam(a, "adam_net"), get_adam(a, "adam_embed"),
                      Rng::deserialize(a.blob("rng")), 0, a.array("losses"), 0};
  const auto& p = a.array("progress");
  if (p.size() != 2) throw ValidationError("flow checkpoint: bad progress record");
  s.step = static_cast<std::size_t>(p[0]);
  s.clip_events = static_cast<std::size_t>(p[1]);
  if (s.losses.size() != s.step) throw ValidationError("flow checkpoint: loss history does not match the step count");
  if (s.net_adam.m.size() != s.model.net().parameter_count() || s.embed_adam.m.size() != s.model.embedding().size())
    throw ValidationError("flow checkpoint: optimizer state does not match the model");
  return s;
}

std::string flow_loss_csv(const std::vector<double>& losses) {
  std::string out = "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g\n", i + 1, losses[i]);
    out += buf;
  }
  return out;
}

}  // namespace retarget
