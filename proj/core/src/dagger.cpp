#include "retarget/dagger.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "retarget/error.hpp"
#include "retarget/parallel.hpp"

namespace retarget {

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kHarmonized:
      return "harmonized";
    case TrainMode::kOnline:
      return "online";
    case TrainMode::kOnlineDagger:
      return "online-dagger";
    case TrainMode::kStandardDagger:
      return "standard-dagger";
  }
  return "unknown";
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "harmonized") return TrainMode::kHarmonized;
  if (s == "online") return TrainMode::kOnline;
  if (s == "online-dagger") return TrainMode::kOnlineDagger;
  if (s == "standard-dagger") return TrainMode::kStandardDagger;
  throw ValidationError("unknown training mode '" + s +
                        "' (expected harmonized, online, online-dagger or standard-dagger)");
}

void AggregatedDataset::append(const ManagerState& s, const LowerBodyCommand& a) {
  states_.push_back(s);
  labels_.push_back(a);
}

void aggregate(AggregatedDataset& d, const RolloutBatch& batch) {
  for (const auto& r : batch.records) d.append(r.state, r.target);
}

double da_loss(const ManagerNet& policy, const AggregatedDataset& d, const LossWeights& weights) {
  if (d.empty()) throw ValidationError("da_loss: empty dataset");
  constexpr std::size_t kChunk = 4096;
  double sum = 0.0;
  for (std::size_t begin = 0; begin < d.size(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, d.size() - begin);
    Eigen::MatrixXd x(kManagerStateDim, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) x.col(static_cast<Eigen::Index>(i)) = d.state(begin + i).features;
    const Eigen::MatrixXd y = policy.commands(x);
    for (std::size_t i = 0; i < n; ++i)
      sum += command_loss(LowerBodyCommand::from_vector(y.col(static_cast<Eigen::Index>(i))), d.label(begin + i),
                          weights);
  }
  return sum / static_cast<double>(d.size());
}

std::size_t TrainerConfig::effective_period() const {
  switch (mode) {
    case TrainMode::kHarmonized:
      return period;
    case TrainMode::kOnlineDagger:
    case TrainMode::kStandardDagger:
      return 1;
    case TrainMode::kOnline:
      return 0;
  }
  return period;
}

bool TrainerConfig::aggregates_at(std::size_t iteration) const {
  const std::size_t m = effective_period();
  return m != 0 && iteration % m == 0;
}

void TrainerConfig::validate() const {
  if (envs == 0 || steps == 0 || iterations == 0 || period == 0)
    throw ValidationError("trainer: envs, steps, iterations and period must all be >= 1");
  if (!(adam.lr > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
      !(adam.eps > 0.0))
    throw ValidationError("trainer: invalid optimizer settings");
  if ((weights.w.array() < 0.0).any() || !(weights.w.sum() > 0.0))
    throw ValidationError("trainer: loss weights must be non-negative and not all zero");
  if (da_batch == 0 || da_epochs == 0) throw ValidationError("trainer: da_batch and da_epochs must be >= 1");
  for (int h : hidden)
    if (h <= 0) throw ValidationError("trainer: hidden layer sizes must be positive");
}

const ValidationMetrics& TrainLog::final_validation() const {
  for (auto it = iterations.rbegin(); it != iterations.rend(); ++it)
    if (it->validation) return *it->validation;
  return initial;
}

std::size_t TrainLog::aggregation_events() const {
  std::size_t n = 0;
  std::size_t prev = 0;
  for (const auto& r : iterations) {
    if (r.dataset_size > prev) ++n;
    prev = r.dataset_size;
  }
  return n;
}

StreamSplit split_streams(std::vector<GoalStream> pool, std::size_t validation, std::uint64_t seed) {
  if (pool.empty()) throw ValidationError("split_streams: empty pool");
  StreamSplit out;
  if (validation == 0) {
    out.train = std::move(pool);
    return out;
  }
  if (pool.size() <= validation) {
    out.validation = pool;
    out.train = std::move(pool);
    return out;
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed ^ 0x76616c6964ULL));
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  std::vector<bool> held(pool.size(), false);
  for (std::size_t i = 0; i < validation; ++i) held[order[i]] = true;
  for (std::size_t i = 0; i < pool.size(); ++i) (held[i] ? out.validation : out.train).push_back(std::move(pool[i]));
  return out;
}

ValidationMetrics validate_policy(const SimConfig& sim, const ManagerPolicy& policy,
                                  const std::vector<GoalStream>& streams, std::size_t max_steps, std::uint64_t seed) {
  std::vector<TrackingAccumulator> per(streams.size());
  parallel_for(streams.size(), [&](std::size_t i) {
    const StreamTrace tr = track_stream(sim, policy, streams[i], mix_seed(seed + i), max_steps);
    for (std::size_t k = 0; k < tr.left_residual.size(); ++k) per[i].add(tr.left_residual[k], tr.right_residual[k]);
  });
  TrackingAccumulator all, mobile, still;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    all.merge(per[i]);
    (streams[i].is_static ? still : mobile).merge(per[i]);
  }
  return {all.finish(), mobile.finish(), still.finish()};
}

namespace {

bool finite_or_throw(double v, const char* what, std::size_t iteration) {
  if (!std::isfinite(v))
    throw RuntimeFailure(std::string("training diverged: ") + what + " is not finite at iteration " +
                         std::to_string(iteration) + " (try a lower learning rate)");
  return true;
}

}  // namespace

TrainResult train_manager(const TrainerConfig& cfg, const std::vector<GoalStream>& pool, const SimConfig& sim,
                          const TrainHooks& hooks) {
  cfg.validate();
  sim.validate();
  if (pool.empty()) throw ValidationError("train_manager: no goal streams");

  StreamSplit split = split_streams(pool, cfg.validation_episodes, cfg.seed);
  Rng init_rng(mix_seed(cfg.seed ^ 0x6e6574ULL));
  ManagerNet policy(cfg.hidden, init_rng);
  AdamState adam = AdamState::zeros(policy.net().parameter_count(), cfg.adam);
  Rng shuffle_rng(mix_seed(cfg.seed ^ 0x73687566ULL));
  const std::uint64_t val_seed = mix_seed(cfg.seed ^ 0x6576616cULL);
  VectorEnv envs(sim, split.train, cfg.envs, mix_seed(cfg.seed ^ 0x656e76ULL));

  TrainLog log;
  log.mode = cfg.mode;
  log.train_episodes = split.train.size();
  log.validation_episodes = split.validation.size();
  if (!split.validation.empty()) log.initial = validate_policy(sim, policy, split.validation, cfg.validation_steps, val_seed);

  AggregatedDataset dataset;
  const auto t0 = std::chrono::steady_clock::now();

  auto apply = [&](LossAndGrad&& lg, IterationRecord& rec) {
    if (clip_grad_norm(lg.grad, kGradClipNorm)) ++rec.clip_events;
    adam_step(policy.net().mutable_params(), lg.grad, adam);
  };

  for (std::size_t i = 0; i < cfg.iterations; ++i) {
    IterationRecord rec;
    rec.iteration = i;
    const RolloutBatch batch = envs.rollout(policy, cfg.steps);
    rec.wraps = batch.wraps.size();

    std::vector<ManagerState> states;
    std::vector<LowerBodyCommand> targets;
    states.reserve(batch.records.size());
    targets.reserve(batch.records.size());
    for (const auto& r : batch.records) {
      states.push_back(r.state);
      targets.push_back(r.target);
    }
    const Eigen::MatrixXd x = features_matrix(states);
    const Eigen::MatrixXd y = commands_matrix(targets);

    if (cfg.rollout_step()) {
      LossAndGrad lg = manager_loss_grad(policy, x, y, cfg.weights);
      rec.l_rollout = lg.loss;
      finite_or_throw(lg.loss, "rollout loss", i);
      apply(std::move(lg), rec);
    } else {
      const Eigen::MatrixXd out = policy.commands(x);
      const Eigen::MatrixXd d = out - y;
      rec.l_rollout = (cfg.weights.w.asDiagonal() * d).cwiseProduct(d).sum() / (4.0 * static_cast<double>(x.cols()));
      finite_or_throw(rec.l_rollout, "rollout loss", i);
    }

    if (cfg.uses_dataset() && cfg.aggregates_at(i)) {
      aggregate(dataset, batch);
      std::vector<std::size_t> order(dataset.size());
      double loss_sum = 0.0;
      std::size_t loss_count = 0, batches = 0;
      for (std::size_t epoch = 0; epoch < cfg.da_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t j = order.size() - 1; j > 0; --j) std::swap(order[j], order[shuffle_rng.below(j + 1)]);
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.da_batch) {
          if (cfg.da_max_batches != 0 && batches == cfg.da_max_batches) break;
          const std::size_t n = std::min(cfg.da_batch, order.size() - begin);
          Eigen::MatrixXd bx(kManagerStateDim, static_cast<Eigen::Index>(n));
          Eigen::MatrixXd by(4, static_cast<Eigen::Index>(n));
          for (std::size_t k = 0; k < n; ++k) {
            bx.col(static_cast<Eigen::Index>(k)) = dataset.state(order[begin + k]).features;
            by.col(static_cast<Eigen::Index>(k)) = dataset.label(order[begin + k]).as_vector();
          }
          LossAndGrad lg = manager_loss_grad(policy, bx, by, cfg.weights);
          finite_or_throw(lg.loss, "aggregated-dataset loss", i);
          loss_sum += lg.loss * static_cast<double>(n);
          loss_count += n;
          ++batches;
          apply(std::move(lg), rec);
        }
      }
      rec.l_da = loss_sum / static_cast<double>(loss_count);
    }
    rec.dataset_size = dataset.size();

    const bool last = i + 1 == cfg.iterations;
    const bool due = cfg.validation_every != 0 && (i + 1) % cfg.validation_every == 0;
    if (!split.validation.empty() && (last || due))
      rec.validation = validate_policy(sim, policy, split.validation, cfg.validation_steps, val_seed);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.iterations.push_back(rec);
    if (hooks.on_iteration) hooks.on_iteration(log.iterations.back(), policy);
  }
  return {std::move(policy), std::move(log)};
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string train_log_csv(const TrainLog& log) {
  std::string out =
      "iteration,l_rollout,l_da,dataset_size,e_p_cm,e_r_deg,e_p_mobile_cm,e_p_static_cm,e_r_mobile_deg,e_r_static_deg,"
      "clip_events,wraps,seconds\n";
  for (const auto& r : log.iterations) {
    out += std::to_string(r.iteration) + "," + num(r.l_rollout) + "," + (r.l_da ? num(*r.l_da) : "") + "," +
           std::to_string(r.dataset_size) + ",";
    if (r.validation) {
      const auto& v = *r.validation;
      out += num(v.all.e_p) + "," + num(v.all.e_r) + "," + num(v.mobile.e_p) + "," + num(v.static_.e_p) + "," +
             num(v.mobile.e_r) + "," + num(v.static_.e_r) + ",";
    } else {
      out += ",,,,,,";
    }
    out += std::to_string(r.clip_events) + "," + std::to_string(r.wraps) + "," + num(r.seconds) + "\n";
  }
  return out;
}

}  // namespace retarget
