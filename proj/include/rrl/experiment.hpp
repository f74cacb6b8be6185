#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rrl/metrics.hpp"
#include "rrl/ppo.hpp"

namespace rrl {

struct ExperimentConfig {
  EnvConfig env;
  NoiseProfile noise = NoiseProfile::standard(NoiseMode::kNone);
  NoiseKind kind = NoiseKind::kGaussian;
  PpoConfig ppo;
  std::int64_t seed = 0;
  int trials = 50;
  std::string output_dir = ".";

  void validate() const {
    env.validate();
    build_network(env.geometry);
    noise.validate();
    ppo.validate();
    if (seed < 0) throw ConfigError("seed must be >= 0");
    if (trials < 1) throw ConfigError("trials must be >= 1");
  }
};

// Evaluation seeds: the same for baseline and policy runs, so trials are paired.
inline std::int64_t trial_seed(std::int64_t master, int trial) {
  return derive_seed(master, {0xe7a1, static_cast<std::uint64_t>(trial)});
}

inline std::vector<EpisodeRecord> run_baseline(const ExperimentConfig& cfg) {
  cfg.validate();
  EnvConfig ec = cfg.env;
  ec.av_control = AvControl::kIdm;
  RoundaboutEnv env(ec);
  std::vector<EpisodeRecord> out;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto seed = trial_seed(cfg.seed, t);
    EpisodeRecorder rec;
    env.reset(seed);
    rec.begin(env, seed, t);
    while (!env.done()) rec.observe(env, env.step({}));
    out.push_back(rec.finish(env));
  }
  return out;
}

// Mean-action rollouts. The Gaussian channel is applied when cfg.kind is
// gaussian; an adversary is a training-time device and is absent here.
inline std::vector<EpisodeRecord> run_policy(const ExperimentConfig& cfg, const MlpParameters& policy) {
  cfg.validate();
  policy.validate();
  if (policy.layer_dims.front() != obs::kSize || policy.layer_dims.back() != obs::kNumAvs) {
    throw FormatError("policy dimensions do not match the environment");
  }
  RoundaboutEnv env(cfg.env);
  RolloutChannels ch;
  ch.kind = cfg.kind;
  ch.profile = cfg.kind == NoiseKind::kGaussian ? cfg.noise : NoiseProfile::standard(NoiseMode::kNone);
  ch.deterministic = true;
  std::vector<EpisodeRecord> out;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto seed = trial_seed(cfg.seed, t);
    std::mt19937_64 action_rng(derive_seed(seed, {1}));
    std::mt19937_64 noise_rng(derive_seed(seed, {2}));
    std::mt19937_64 adversary_rng(derive_seed(seed, {3}));
    EpisodeRecorder rec;
    RolloutBatch scratch;
    run_episode(
        env, seed, policy, nullptr, ch, action_rng, noise_rng, adversary_rng, scratch,
        [&](const StepOutcome& s, const ActionCommand&) { rec.observe(env, s); },
        [&](const RoundaboutEnv& e) { rec.begin(e, seed, t); });
    out.push_back(rec.finish(env));
  }
  return out;
}

inline std::vector<EpisodeRecord> run_policy(const ExperimentConfig& cfg, const std::string& weights_path) {
  return run_policy(cfg, load_weights(weights_path));
}

enum class TrainMode { kSingle, kAdversarial };

inline TrainMode parse_train_mode(std::string_view s) {
  if (s == "single") return TrainMode::kSingle;
  if (s == "adversarial") return TrainMode::kAdversarial;
  throw ConfigError("unknown training mode '" + std::string(s) + "' (single|adversarial)");
}

struct TrainResult {
  Learner agent;
  std::optional<Learner> adversary;
  std::vector<TrainLog> logs;
};

using IterationCallback = std::function<void(const TrainLog&, const TrainResult&)>;

// Runs cfg.ppo.iterations iterations from a fresh initialization seeded by
// cfg.seed. Single mode uses the Gaussian channel from cfg.noise; adversarial
// mode trains a 62 -> 22 adversary alongside the agent.
inline TrainResult train(const ExperimentConfig& cfg, TrainMode mode, const IterationCallback& on_iteration = {}) {
  cfg.validate();
  std::mt19937_64 init(static_cast<std::uint64_t>(cfg.seed));
  TrainResult res;
  res.agent = Learner::create(obs::kSize, obs::kNumAvs, cfg.ppo, init);
  TrainContext ctx;
  ctx.ppo = cfg.ppo;
  ctx.seed = cfg.seed;
  if (mode == TrainMode::kAdversarial) {
    res.adversary = Learner::create(obs::kSize, kAdversaryDim, cfg.ppo, init);
    ctx.channels.kind = NoiseKind::kAdversarial;
    ctx.channels.profile = NoiseProfile::standard(NoiseMode::kNone);
  } else {
    ctx.channels.kind = NoiseKind::kGaussian;
    ctx.channels.profile = cfg.noise;
  }
  auto envs = make_env_pool(cfg.env, cfg.ppo.num_workers);
  for (int it = 0; it < cfg.ppo.iterations; ++it) {
    res.logs.push_back(mode == TrainMode::kAdversarial
                           ? adversarial_train_iteration(res.agent, *res.adversary, envs, ctx, it)
                           : train_iteration(res.agent, envs, ctx, it));
    if (on_iteration) on_iteration(res.logs.back(), res);
  }
  return res;
}

}  // namespace rrl
