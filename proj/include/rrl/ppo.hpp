#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rrl/env.hpp"
#include "rrl/error.hpp"
#include "rrl/perturbation.hpp"
#include "rrl/policy.hpp"

namespace rrl {

struct PpoConfig {
  double gamma = 0.999;
  double gae_lambda = 0.97;
  double clip_epsilon = 0.2;
  int batch_size = 20000;
  int iterations = 100;
  int epochs = 10;
  int minibatch_size = 256;
  double learning_rate = 3e-4;
  double kl_target = 0.01;
  double max_grad_norm = 0.5;
  double entropy_coef = 0.0;
  bool normalize_advantages = true;
  int num_workers = 1;
  std::vector<int> hidden{100, 50, 25};
  double policy_output_scale = 0.01;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo.gamma must be in (0, 1]");
    if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) throw ConfigError("ppo.gae_lambda must be in (0, 1]");
    if (!(clip_epsilon > 0.0)) throw ConfigError("ppo.clip_epsilon must be > 0");
    if (batch_size < 1 || iterations < 0 || epochs < 1 || minibatch_size < 1) {
      throw ConfigError("ppo: batch, epochs and minibatch sizes must be positive");
    }
    if (!(learning_rate >= 0.0)) throw ConfigError("ppo.learning_rate must be >= 0");
    if (!(kl_target > 0.0)) throw ConfigError("ppo.kl_target must be > 0");
    if (num_workers < 1) throw ConfigError("ppo.num_workers must be >= 1");
    for (int h : hidden) {
      if (h < 1) throw ConfigError("ppo.hidden sizes must be positive");
    }
  }
};

// ---------------------------------------------------------------------------
// Advantage estimation

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// `ends[t]` marks the last step of an episode. At such a step the successor
// value is `bootstrap[t]`: 0 for a true termination, V(s_T) for a horizon
// truncation. Elsewhere the successor value is values[t + 1].
inline GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                             std::span<const std::uint8_t> ends, std::span<const double> bootstrap,
                             double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || ends.size() != n || bootstrap.size() != n) {
    throw ContractError("compute_gae: sequences have different lengths");
  }
  if (n > 0 && !ends[n - 1]) throw ContractError("compute_gae: batch must end on an episode boundary");
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_value = ends[i] ? bootstrap[i] : values[i + 1];
    if (ends[i]) running = 0.0;
    const double delta = rewards[i] + gamma * next_value - values[i];
    running = delta + gamma * lambda * running;
    r.advantages[i] = running;
    r.returns[i] = running + values[i];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Clipped surrogate

inline double ppo_clip_objective(double ratio, double advantage, double epsilon) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

// d objective / d ratio. Zero whenever the clipped branch is selected; at the
// clip boundary itself the clipped branch is taken, so the gradient is zero
// there as well.
inline double ppo_clip_gradient(double ratio, double advantage, double epsilon) {
  if (advantage > 0.0 && ratio >= 1.0 + epsilon) return 0.0;
  if (advantage < 0.0 && ratio <= 1.0 - epsilon) return 0.0;
  return advantage;
}

// ---------------------------------------------------------------------------
// Optimizer

struct Adam {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vec m;
  Vec v;
  long t = 0;

  // Gradient descent step on `params` for a loss gradient `grad`.
  void step(Vec& params, const Vec& grad) {
    if (m.size() != params.size()) {
      m = Vec::Zero(params.size());
      v = Vec::Zero(params.size());
      t = 0;
    }
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    params.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

// A policy/value pair with their optimizers.
struct Learner {
  MlpParameters policy;
  MlpParameters value;
  Adam policy_opt;
  Adam value_opt;

  template <typename Rng>
  static Learner create(int input_dim, int action_dim, const PpoConfig& cfg, Rng& rng) {
    std::vector<int> dims{input_dim};
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    Learner l;
    dims.push_back(action_dim);
    l.policy = init_mlp(dims, true, rng, cfg.policy_output_scale, 0.0);
    dims.back() = 1;
    l.value = init_mlp(dims, false, rng, 1.0);
    l.policy_opt.learning_rate = cfg.learning_rate;
    l.value_opt.learning_rate = cfg.learning_rate;
    return l;
  }
};

// ---------------------------------------------------------------------------
// Seeding

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Non-negative seed derived from a master seed and a path of indices.
inline std::int64_t derive_seed(std::int64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(master));
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return static_cast<std::int64_t>(h >> 1);
}

// ---------------------------------------------------------------------------
// Rollouts

inline Vec to_vec(const ObservationVector& o) {
  return Eigen::Map<const Vec>(o.values.data(), obs::kSize);
}

// How the adversary acts during a rollout.
enum class AdversaryBehavior { kNone, kPolicy, kZero };

// Everything that sits between env and agent for one rollout.
struct RolloutChannels {
  NoiseKind kind = NoiseKind::kGaussian;
  NoiseProfile profile;                 // gaussian channel (mode none disables it)
  AdversaryBehavior adversary = AdversaryBehavior::kNone;
  const MlpParameters* adversary_policy = nullptr;
  const MlpParameters* adversary_value = nullptr;
  AdversaryTargets targets = AdversaryTargets::standard();
  bool deterministic = false;           // act with the distribution mean
};

struct RolloutBatch {
  std::vector<Vec> agent_obs;
  std::vector<Vec> true_obs;
  std::vector<Vec> actions;       // raw agent samples
  std::vector<Vec> adv_actions;   // raw adversary samples (adversarial runs only)
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> logp;
  std::vector<double> bootstrap;
  std::vector<double> adv_values;
  std::vector<double> adv_logp;
  std::vector<double> adv_bootstrap;
  std::vector<std::uint8_t> ends;
  std::vector<double> episode_returns;
  std::vector<double> adversary_episode_returns;

  std::size_t size() const { return rewards.size(); }

  void append(RolloutBatch&& o) {
    auto cat = [](auto& a, auto& b) { a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end())); };
    cat(agent_obs, o.agent_obs);
    cat(true_obs, o.true_obs);
    cat(actions, o.actions);
    cat(adv_actions, o.adv_actions);
    cat(rewards, o.rewards);
    cat(values, o.values);
    cat(logp, o.logp);
    cat(bootstrap, o.bootstrap);
    cat(adv_values, o.adv_values);
    cat(adv_logp, o.adv_logp);
    cat(adv_bootstrap, o.adv_bootstrap);
    cat(ends, o.ends);
    cat(episode_returns, o.episode_returns);
    cat(adversary_episode_returns, o.adversary_episode_returns);
  }
};

// Observer hook invoked after each env step (used for trajectory logging).
using StepObserver = std::function<void(const StepOutcome&, const ActionCommand& applied)>;
using ResetObserver = std::function<void(const RoundaboutEnv&)>;

// Runs one episode, appending its transitions to `batch`.
template <typename Rng>
void run_episode(RoundaboutEnv& env, std::int64_t episode_seed, const MlpParameters& policy,
                 const MlpParameters* value, const RolloutChannels& ch, Rng& action_rng, Rng& noise_rng,
                 Rng& adversary_rng, RolloutBatch& batch, const StepObserver& observer = {},
                 const ResetObserver& on_reset = {}) {
  ObservationVector true_obs = env.reset(episode_seed);
  if (on_reset) on_reset(env);
  const bool gaussian = ch.kind == NoiseKind::kGaussian;
  double ep_return = 0.0;
  while (true) {
    ObservationVector view = true_obs;
    if (gaussian && perturbs_state(ch.profile.mode)) view = gaussian_perturb_state(view, ch.profile, noise_rng);

    AdversaryAction adv{};
    Vec adv_raw;
    if (ch.adversary == AdversaryBehavior::kPolicy) {
      const Vec t = to_vec(true_obs);
      const auto out = forward(*ch.adversary_policy, t);
      adv_raw = ch.deterministic ? out.mean : sample_action(out, adversary_rng);
      for (int k = 0; k < kAdversaryDim; ++k) adv.values[k] = adv_raw[k];
      batch.adv_logp.push_back(log_prob(out, adv_raw));
      batch.adv_values.push_back(ch.adversary_value ? mlp_forward(*ch.adversary_value, t)[0] : 0.0);
      batch.adv_actions.push_back(adv_raw);
    } else if (ch.adversary == AdversaryBehavior::kZero) {
      adv_raw = Vec::Zero(kAdversaryDim);
      batch.adv_logp.push_back(0.0);
      batch.adv_values.push_back(0.0);
      batch.adv_actions.push_back(adv_raw);
    }
    if (ch.adversary != AdversaryBehavior::kNone) view = adversarial_perturb(view, {}, adv, ch.targets).first;

    const Vec agent_in = to_vec(view);
    const auto out = forward(policy, agent_in);
    const Vec raw = ch.deterministic ? out.mean : sample_action(out, action_rng);
    ActionCommand act{{raw[0], raw[1]}};
    if (ch.adversary != AdversaryBehavior::kNone) act = adversarial_perturb(view, act, adv, ch.targets).second;
    if (gaussian && perturbs_action(ch.profile.mode)) act = gaussian_perturb_action(act, ch.profile, noise_rng);

    StepOutcome step = env.step(act);
    if (observer) observer(step, act);

    batch.agent_obs.push_back(agent_in);
    batch.true_obs.push_back(to_vec(true_obs));
    batch.actions.push_back(raw);
    batch.rewards.push_back(step.reward.total);
    batch.logp.push_back(log_prob(out, raw));
    batch.values.push_back(value ? mlp_forward(*value, agent_in)[0] : 0.0);
    batch.ends.push_back(step.done ? 1 : 0);
    ep_return += step.reward.total;

    double boot = 0.0;
    double adv_boot = 0.0;
    if (step.truncated) {
      if (value) boot = mlp_forward(*value, to_vec(step.true_obs))[0];
      if (ch.adversary == AdversaryBehavior::kPolicy && ch.adversary_value) {
        adv_boot = mlp_forward(*ch.adversary_value, to_vec(step.true_obs))[0];
      }
    }
    batch.bootstrap.push_back(boot);
    if (ch.adversary != AdversaryBehavior::kNone) batch.adv_bootstrap.push_back(adv_boot);

    true_obs = step.true_obs;
    if (step.done) break;
  }
  batch.episode_returns.push_back(ep_return);
  if (ch.adversary != AdversaryBehavior::kNone) batch.adversary_episode_returns.push_back(-ep_return);
}

// Collects at least `min_steps` transitions of complete episodes from each of
// the given envs (one worker per env) and concatenates them in worker order.
inline RolloutBatch collect_rollouts(std::vector<RoundaboutEnv>& envs, const MlpParameters& policy,
                                     const MlpParameters& value, const RolloutChannels& ch, int total_steps,
                                     std::int64_t seed, std::uint64_t iteration) {
  const int workers = static_cast<int>(envs.size());
  std::vector<RolloutBatch> parts(workers);
  const int per_worker = (total_steps + workers - 1) / workers;
  auto work = [&](int w) {
    std::mt19937_64 action_rng(derive_seed(seed, {iteration, static_cast<std::uint64_t>(w), 1}));
    std::mt19937_64 noise_rng(derive_seed(seed, {iteration, static_cast<std::uint64_t>(w), 2}));
    std::mt19937_64 adversary_rng(derive_seed(seed, {iteration, static_cast<std::uint64_t>(w), 3}));
    std::uint64_t episode = 0;
    while (static_cast<int>(parts[w].size()) < per_worker) {
      const auto ep_seed = derive_seed(seed, {iteration, static_cast<std::uint64_t>(w), 4, episode++});
      run_episode(envs[w], ep_seed, policy, &value, ch, action_rng, noise_rng, adversary_rng, parts[w]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  RolloutBatch batch;
  for (auto& p : parts) batch.append(std::move(p));
  return batch;
}

// ---------------------------------------------------------------------------
// Updates

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;      // after the last completed epoch
  double max_epoch_kl = 0.0;
  double entropy = 0.0;
  int epochs_completed = 0;
  bool early_stopped = false;
};

// Non-negative estimator of KL(old || new) from log-ratios.
inline double approx_kl_from_log_ratio(double log_ratio) { return std::expm1(log_ratio) - log_ratio; }

inline double clip_by_global_norm(Vec& g, double max_norm) {
  const double n = g.norm();
  if (max_norm > 0.0 && n > max_norm) g *= max_norm / n;
  return n;
}

// One PPO update of a learner on (inputs, actions, old log-probs, advantages, returns).
template <typename Rng>
UpdateStats ppo_update(Learner& learner, const std::vector<Vec>& inputs, const std::vector<Vec>& actions,
                       const std::vector<double>& old_logp, std::vector<double> advantages,
                       const std::vector<double>& returns, const PpoConfig& cfg, Rng& rng) {
  const std::size_t n = inputs.size();
  UpdateStats stats;
  if (n == 0) return stats;
  if (cfg.normalize_advantages && n > 1) {
    const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / n);
    for (double& a : advantages) a = (a - mean) / (sd + 1e-8);
  }

  learner.policy_opt.learning_rate = cfg.learning_rate;
  learner.value_opt.learning_rate = cfg.learning_rate;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t mb = std::min<std::size_t>(cfg.minibatch_size, n);

  auto batch_kl = [&] {
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      kl += approx_kl_from_log_ratio(log_prob(forward(learner.policy, inputs[i]), actions[i]) - old_logp[i]);
    }
    return kl / n;
  };

  for (int epoch = 0; epoch < cfg.epochs && !stats.early_stopped; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double pl_sum = 0.0;
    double vl_sum = 0.0;
    double ent_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t end = std::min(n, start + mb);
      const double inv = 1.0 / static_cast<double>(end - start);
      Vec gp = Vec::Zero(learner.policy.size());
      Vec gv = Vec::Zero(learner.value.size());
      double pl = 0.0;
      double vl = 0.0;
      double kl = 0.0;
      double ent = 0.0;
      ForwardCache cache;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const auto out = forward(learner.policy, inputs[i], &cache);
        const double lr = log_prob(out, actions[i]) - old_logp[i];
        const double ratio = std::exp(lr);
        const double a = advantages[i];
        pl -= ppo_clip_objective(ratio, a, cfg.clip_epsilon);
        kl += approx_kl_from_log_ratio(lr);
        ent += entropy(out);
        const double g = ppo_clip_gradient(ratio, a, cfg.clip_epsilon) * ratio;
        if (g != 0.0) accumulate_log_prob_gradient(learner.policy, cache, out, actions[i], -g * inv, gp);

        ForwardCache vcache;
        const double v = mlp_forward(learner.value, inputs[i], &vcache)[0];
        const double err = v - returns[i];
        vl += 0.5 * err * err;
        Vec go(1);
        go[0] = err * inv;
        mlp_backward(learner.value, vcache, go, gv);
      }
      if (cfg.entropy_coef != 0.0 && learner.policy.has_log_std()) {
        gp.tail(learner.policy.log_std.size()).array() -= cfg.entropy_coef;
      }
      if (!std::isfinite(pl) || !std::isfinite(vl) || !gp.allFinite() || !gv.allFinite()) {
        throw NumericError("ppo_update: non-finite loss or gradient in epoch " + std::to_string(epoch));
      }
      if (kl * inv > 1.5 * cfg.kl_target) {
        stats.early_stopped = true;
        break;
      }
      clip_by_global_norm(gp, cfg.max_grad_norm);
      clip_by_global_norm(gv, cfg.max_grad_norm);
      Vec pflat = learner.policy.flat();
      learner.policy_opt.step(pflat, gp);
      learner.policy.set_flat(pflat);
      learner.value_opt.step(learner.value.weights, gv);
      pl_sum += pl;
      vl_sum += vl;
      ent_sum += ent;
      seen += end - start;
    }
    if (seen > 0) {
      stats.policy_loss = pl_sum / seen;
      stats.value_loss = vl_sum / seen;
      stats.entropy = ent_sum / seen;
    }
    if (seen == n) {
      ++stats.epochs_completed;
      stats.approx_kl = batch_kl();
      stats.max_epoch_kl = std::max(stats.max_epoch_kl, stats.approx_kl);
      if (stats.approx_kl > cfg.kl_target) stats.early_stopped = true;
    } else if (seen > 0) {
      const double kl = batch_kl();
      stats.approx_kl = kl;
      stats.max_epoch_kl = std::max(stats.max_epoch_kl, kl);
    }
  }
  return stats;
}

struct TrainLog {
  int iteration = 0;
  std::size_t steps = 0;
  std::size_t episodes = 0;
  double mean_episode_reward = 0.0;
  double mean_adversary_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;
  double max_epoch_kl = 0.0;
  double entropy = 0.0;
  int epochs_completed = 0;
  double adversary_policy_loss = 0.0;
  double adversary_value_loss = 0.0;
  double adversary_approx_kl = 0.0;
  bool aborted = false;
  std::string diagnostic;
};

struct TrainContext {
  PpoConfig ppo;
  RolloutChannels channels;  // adversary fields are filled in by the trainer
  std::int64_t seed = 0;
};

inline double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

namespace detail {

inline GaeResult gae_for(const RolloutBatch& b, bool adversary, const PpoConfig& cfg) {
  if (!adversary) return compute_gae(b.rewards, b.values, b.ends, b.bootstrap, cfg.gamma, cfg.gae_lambda);
  std::vector<double> neg(b.rewards.size());
  std::transform(b.rewards.begin(), b.rewards.end(), neg.begin(), [](double r) { return -r; });
  return compute_gae(neg, b.adv_values, b.ends, b.adv_bootstrap, cfg.gamma, cfg.gae_lambda);
}

}  // namespace detail

// Collects a batch with the current snapshot and runs one PPO update of the
// agent (and, when given, the adversary, on the negated reward). On a
// non-finite update both learners are restored and the log is marked aborted.
inline TrainLog train_iteration_impl(Learner& agent, Learner* adversary, bool zero_adversary,
                                     std::vector<RoundaboutEnv>& envs, const TrainContext& ctx, int iteration) {
  ctx.ppo.validate();
  if (envs.empty()) throw ContractError("train_iteration: empty env pool");
  RolloutChannels ch = ctx.channels;
  if (adversary != nullptr) {
    if (adversary->policy.input_dim() != obs::kSize || adversary->policy.output_dim() != kAdversaryDim) {
      throw ContractError("adversary dims must be 62 -> 22");
    }
    ch.adversary = AdversaryBehavior::kPolicy;
    ch.adversary_policy = &adversary->policy;
    ch.adversary_value = &adversary->value;
  } else if (zero_adversary) {
    ch.adversary = AdversaryBehavior::kZero;
  } else {
    ch.adversary = AdversaryBehavior::kNone;
  }
  const auto it = static_cast<std::uint64_t>(iteration);
  RolloutBatch batch = collect_rollouts(envs, agent.policy, agent.value, ch, ctx.ppo.batch_size, ctx.seed, it);

  TrainLog log;
  log.iteration = iteration;
  log.steps = batch.size();
  log.episodes = batch.episode_returns.size();
  log.mean_episode_reward = mean_of(batch.episode_returns);
  log.mean_adversary_reward = -log.mean_episode_reward;

  const Learner agent_backup = agent;
  std::optional<Learner> adversary_backup;
  if (adversary != nullptr) adversary_backup = *adversary;
  std::mt19937_64 update_rng(derive_seed(ctx.seed, {it, 1000}));
  try {
    const GaeResult g = detail::gae_for(batch, false, ctx.ppo);
    const UpdateStats s =
        ppo_update(agent, batch.agent_obs, batch.actions, batch.logp, g.advantages, g.returns, ctx.ppo, update_rng);
    log.policy_loss = s.policy_loss;
    log.value_loss = s.value_loss;
    log.approx_kl = s.approx_kl;
    log.max_epoch_kl = s.max_epoch_kl;
    log.entropy = s.entropy;
    log.epochs_completed = s.epochs_completed;
    if (adversary != nullptr) {
      const GaeResult ga = detail::gae_for(batch, true, ctx.ppo);
      const UpdateStats sa = ppo_update(*adversary, batch.true_obs, batch.adv_actions, batch.adv_logp,
                                        ga.advantages, ga.returns, ctx.ppo, update_rng);
      log.adversary_policy_loss = sa.policy_loss;
      log.adversary_value_loss = sa.value_loss;
      log.adversary_approx_kl = sa.approx_kl;
    }
  } catch (const NumericError& e) {
    agent = agent_backup;
    if (adversary != nullptr) *adversary = *adversary_backup;
    log.aborted = true;
    log.diagnostic = e.what();
  }
  return log;
}

inline TrainLog train_iteration(Learner& agent, std::vector<RoundaboutEnv>& envs, const TrainContext& ctx,
                                int iteration) {
  return train_iteration_impl(agent, nullptr, false, envs, ctx, iteration);
}

inline TrainLog adversarial_train_iteration(Learner& agent, Learner& adversary, std::vector<RoundaboutEnv>& envs,
                                            const TrainContext& ctx, int iteration) {
  return train_iteration_impl(agent, &adversary, false, envs, ctx, iteration);
}

// Adversarial pipeline with the adversary pinned to a zero output.
inline TrainLog zero_adversary_train_iteration(Learner& agent, std::vector<RoundaboutEnv>& envs,
                                               const TrainContext& ctx, int iteration) {
  return train_iteration_impl(agent, nullptr, true, envs, ctx, iteration);
}

inline std::vector<RoundaboutEnv> make_env_pool(const EnvConfig& cfg, int workers) {
  std::vector<RoundaboutEnv> envs;
  envs.reserve(workers);
  for (int i = 0; i < workers; ++i) envs.emplace_back(cfg);
  return envs;
}

}  // namespace rrl
