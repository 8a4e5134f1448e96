#include "cbfnav/rl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "cbfnav/num_format.hpp"
#include "cbfnav/parallel.hpp"

namespace cbfnav {

namespace {

// Per-component differential entropy of a Gaussian is log_std + this.
constexpr double kHalfLog2PiE = 1.4189385332046727;

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void xavier_init(const MlpSpec& spec, std::span<double> params, Rng& rng) {
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    const int in = spec.widths[l];
    const int out = spec.widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (int k = 0; k < out * in; ++k)
      params[offset + k] = rng.uniform(-limit, limit);
    offset += static_cast<std::size_t>(out) * in + out;  // biases stay zero
  }
}

}  // namespace

double discounted_return(std::span<const double> rewards, double gamma) {
  double g = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) g = rewards[t] + gamma * g;
  return g;
}

std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values, double gamma,
                        double lambda) {
  if (values.size() != rewards.size() + 1)
    throw ContractViolation("gae needs exactly one bootstrap value");
  std::vector<double> adv(rewards.size());
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    const double delta = rewards[t] + gamma * values[t + 1] - values[t];
    running = delta + gamma * lambda * running;
    adv[t] = running;
  }
  return adv;
}

void adam_step(std::span<const double> grad, std::vector<double>& params,
               AdamState& state, double learning_rate) {
  if (grad.size() != params.size())
    throw ContractViolation("gradient size differs from parameter size");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  state.t += 1;
  const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = kBeta1 * state.m[i] + (1.0 - kBeta1) * grad[i];
    state.v[i] = kBeta2 * state.v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    params[i] -=
        learning_rate * (state.m[i] / bias1) / (std::sqrt(state.v[i] / bias2) + kEps);
  }
}

std::vector<double> init_critic_params(const CriticArch& arch, Rng& rng) {
  std::vector<double> params(arch.head.param_count(), 0.0);
  xavier_init(arch.head, params, rng);
  return params;
}

double critic_value(const GnnArch& arch, std::span<const double> theta,
                    const CriticArch& critic_arch,
                    std::span<const double> critic_params,
                    const RolloutSample& sample) {
  if (critic_arch.head.input_dim() != arch.feature_dim())
    throw ContractViolation("critic input does not match the feature width");
  std::vector<double> aggregate(arch.feature_dim());
  gnn_aggregate(arch, theta, sample.features, aggregate);
  double v = 0.0;
  mlp_forward(critic_arch.head, critic_params, aggregate, std::span<double>(&v, 1));
  return v;
}

PpoGradients ppo_minibatch_gradient(const RolloutBatch& batch,
                                    std::span<const int> indices,
                                    const GnnArch& arch,
                                    std::span<const double> theta,
                                    const CriticArch& critic_arch,
                                    std::span<const double> critic_params,
                                    const ParamBounds& bounds,
                                    const TrainConfig& cfg) {
  if (indices.empty()) throw ContractViolation("empty minibatch");
  if (static_cast<int>(theta.size()) != arch.param_count())
    throw ContractViolation("policy parameter count mismatch");
  if (static_cast<int>(critic_params.size()) != critic_arch.head.param_count())
    throw ContractViolation("critic parameter count mismatch");
  if (critic_arch.head.input_dim() != arch.feature_dim() ||
      critic_arch.head.output_dim() != 1)
    throw ContractViolation("critic head shape mismatch");

  const int dim = arch.feature_dim();
  const int na = arch.msg_agent.param_count();
  const int no = arch.msg_obstacle.param_count();
  const int nu = arch.update.param_count();
  std::span<const double> agent_params = theta.subspan(0, na);
  std::span<const double> obstacle_params = theta.subspan(na, no);
  std::span<const double> update_params = theta.subspan(na + no, nu);
  const int log_std_offset = arch.log_std_offset();

  PpoGradients g;
  g.theta.assign(theta.size(), 0.0);
  g.critic.assign(critic_params.size(), 0.0);
  std::span<double> grad_agent(g.theta.data(), na);
  std::span<double> grad_obstacle(g.theta.data() + na, no);
  std::span<double> grad_update(g.theta.data() + na + no, nu);

  std::vector<double> aggregate(dim);
  std::vector<double> d_aggregate(dim);
  std::vector<double> d_aggregate_sink(dim);
  std::vector<double> input_sink(std::max(4, dim));
  std::array<double, kActionDim> upstream_mean{};

  const double eps = cfg.clip_ratio;
  const double inv = 1.0 / static_cast<double>(indices.size());

  for (int idx : indices) {
    const RolloutSample& s = batch.samples[static_cast<std::size_t>(idx)];

    gnn_aggregate(arch, theta, s.features, aggregate);
    ActionDistribution dist;
    dist.bounds = bounds;
    mlp_forward(arch.update, update_params, aggregate,
                std::span<double>(dist.mean.data(), kActionDim));
    for (int k = 0; k < kActionDim; ++k)
      dist.log_std[k] = theta[log_std_offset + k];

    const double new_lp = action_log_prob(dist, s.raw);
    const double log_ratio = new_lp - s.old_log_prob;
    const double ratio = std::exp(log_ratio);
    const double a = s.advantage;

    const double surrogate =
        std::min(ratio * a, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * a);
    g.policy_loss += -surrogate * inv;

    double entropy = kActionDim * kHalfLog2PiE;
    for (int k = 0; k < kActionDim; ++k) entropy += dist.log_std[k];
    g.entropy += entropy * inv;

    g.sum_ratio += ratio;
    g.sum_kl += (ratio - 1.0) - log_ratio;
    if (ratio < 1.0 - eps || ratio > 1.0 + eps) g.clipped += 1;
    if (!std::isfinite(new_lp) || !std::isfinite(ratio)) g.finite = false;

    // The clipped branch is flat, so the likelihood gradient only flows
    // while the ratio sits inside the trust region for this advantage sign.
    const bool active =
        !((a >= 0.0 && ratio > 1.0 + eps) || (a < 0.0 && ratio < 1.0 - eps));
    if (active) {
      const double d_loss_d_lp = -ratio * a * inv;
      for (int k = 0; k < kActionDim; ++k) {
        const double sigma = std::exp(dist.log_std[k]);
        const double z = (s.raw[k] - dist.mean[k]) / sigma;
        upstream_mean[k] = d_loss_d_lp * z / sigma;
        g.theta[log_std_offset + k] += d_loss_d_lp * (z * z - 1.0);
      }
      mlp_backward(arch.update, update_params, aggregate, upstream_mean,
                   grad_update, d_aggregate);
      std::span<double> agent_in_sink(input_sink.data(),
                                      arch.msg_agent.input_dim());
      std::span<double> obstacle_in_sink(input_sink.data(),
                                         arch.msg_obstacle.input_dim());
      for (const auto& feat : s.features.agents)
        mlp_backward(arch.msg_agent, agent_params, feat, d_aggregate,
                     grad_agent, agent_in_sink);
      for (const auto& feat : s.features.obstacles)
        mlp_backward(arch.msg_obstacle, obstacle_params, feat, d_aggregate,
                     grad_obstacle, obstacle_in_sink);
    }
    for (int k = 0; k < kActionDim; ++k)
      g.theta[log_std_offset + k] -= cfg.entropy_coeff * inv;

    // Value head; the aggregate is treated as a constant here so no critic
    // gradient reaches the message networks.
    double v = 0.0;
    mlp_forward(critic_arch.head, critic_params, aggregate,
                std::span<double>(&v, 1));
    const double err = v - s.ret;
    g.value_loss += 0.5 * err * err * inv;
    const double dv = cfg.value_coeff * err * inv;
    mlp_backward(critic_arch.head, critic_params, aggregate,
                 std::span<const double>(&dv, 1), g.critic, d_aggregate_sink);
    if (!std::isfinite(v)) g.finite = false;
  }

  if (!all_finite(g.theta) || !all_finite(g.critic)) g.finite = false;
  return g;
}

PpoDiagnostics ppo_update(RolloutBatch& batch, const GnnArch& arch,
                          std::vector<double>& theta,
                          const CriticArch& critic_arch,
                          std::vector<double>& critic_params,
                          AdamState& theta_opt, AdamState& critic_opt,
                          const ParamBounds& bounds, const TrainConfig& cfg,
                          Rng& shuffle_rng) {
  PpoDiagnostics diag;
  const int n = static_cast<int>(batch.samples.size());
  if (n == 0) return diag;

  double mean = 0.0;
  for (const auto& s : batch.samples) mean += s.advantage;
  mean /= n;
  double var = 0.0;
  for (const auto& s : batch.samples) {
    const double d = s.advantage - mean;
    var += d * d;
  }
  const double scale = 1.0 / (std::sqrt(var / n) + 1e-8);
  for (auto& s : batch.samples) s.advantage = (s.advantage - mean) * scale;

  std::vector<int> indices(n);
  for (int i = 0; i < n; ++i) indices[i] = i;

  double sum_ratio = 0.0;
  double sum_kl = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  std::int64_t clipped = 0;
  std::int64_t processed = 0;

  auto finish = [&]() {
    if (processed > 0) {
      diag.mean_ratio = sum_ratio / static_cast<double>(processed);
      diag.clip_fraction = static_cast<double>(clipped) / static_cast<double>(processed);
      diag.approx_kl = sum_kl / static_cast<double>(processed);
      diag.policy_loss = policy_loss / static_cast<double>(processed);
      diag.value_loss = value_loss / static_cast<double>(processed);
    }
    return diag;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.uniform_int(0, i));
      std::swap(indices[i], indices[j]);
    }
    for (int start = 0; start < n; start += cfg.minibatch_size) {
      const int len = std::min(cfg.minibatch_size, n - start);
      PpoGradients g = ppo_minibatch_gradient(
          batch, std::span<const int>(indices.data() + start, len), arch, theta,
          critic_arch, critic_params, bounds, cfg);
      if (!g.finite) {
        diag.finite = false;
        return finish();
      }
      adam_step(g.theta, theta, theta_opt, cfg.learning_rate);
      adam_step(g.critic, critic_params, critic_opt, cfg.learning_rate);
      sum_ratio += g.sum_ratio;
      sum_kl += g.sum_kl;
      clipped += g.clipped;
      policy_loss += g.policy_loss * len;
      value_loss += g.value_loss * len;
      processed += len;
    }
  }
  return finish();
}

namespace {

// Stochastic rollout policy: samples from the current distribution and
// stashes (features, raw draw, log density) into a (t, agent) slot table so
// the trainer can rebuild the batch after the episode. Slot writes are
// disjoint across agents, which keeps the per-agent control loop parallel-safe.
class RecordingGnnPolicy final : public Policy {
 public:
  struct Slot {
    GnnFeatures features;
    std::array<double, kActionDim> raw{};
    double log_prob = 0.0;
    bool used = false;
  };

  RecordingGnnPolicy(const GnnArch& arch, std::span<const double> theta,
                     const ParamBounds& bounds, const WorldConfig& config)
      : arch_(arch),
        theta_(theta),
        bounds_(bounds),
        agents_(static_cast<int>(config.agents.size())) {
    for (int i = 0; i < agents_; ++i) index_by_id_[config.agents[i].id] = i;
    slots_.resize(static_cast<std::size_t>(config.max_steps) * agents_);
  }

  CbfParams act(const LocalView& view, int t,
                std::uint64_t episode_seed) const override {
    ActionDistribution dist = gnn_forward(arch_, theta_, view, bounds_);
    Rng rng(Rng::derive(episode_seed,
                        {0x6a11ULL, static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(view.self_id)}));
    SampledAction action = sample_action(dist, rng);
    Slot& slot = slots_[static_cast<std::size_t>(t) * agents_ +
                        index_by_id_.at(view.self_id)];
    slot.features = relative_features(view);
    slot.raw = action.raw;
    slot.log_prob = action.log_prob;
    slot.used = true;
    return action.params;
  }

  const Slot& slot(int t, int agent_index) const {
    return slots_[static_cast<std::size_t>(t) * agents_ + agent_index];
  }

 private:
  GnnArch arch_;
  std::span<const double> theta_;
  ParamBounds bounds_;
  int agents_;
  std::map<int, int> index_by_id_;
  mutable std::vector<Slot> slots_;
};

void validate_train_config(const TrainConfig& cfg, const RewardConfig& reward_cfg) {
  if (cfg.iterations < 0) throw ConfigError("iterations must be non-negative");
  if (cfg.episodes_per_iteration < 1)
    throw ConfigError("episodes_per_iteration must be at least 1");
  if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (cfg.minibatch_size < 1) throw ConfigError("minibatch_size must be at least 1");
  if (!(cfg.clip_ratio > 0.0 && cfg.clip_ratio < 1.0))
    throw ConfigError("clip_ratio must lie in (0, 1)");
  if (!(cfg.gae_lambda >= 0.0 && cfg.gae_lambda <= 1.0))
    throw ConfigError("gae_lambda must lie in [0, 1]");
  if (!(reward_cfg.gamma >= 0.0 && reward_cfg.gamma <= 1.0))
    throw ConfigError("gamma must lie in [0, 1]");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (!(cfg.entropy_coeff >= 0.0)) throw ConfigError("entropy_coeff must be non-negative");
  if (!(cfg.value_coeff >= 0.0)) throw ConfigError("value_coeff must be non-negative");
  if (!(cfg.init_std > 0.0)) throw ConfigError("init_std must be positive");
}

}  // namespace

void write_learning_curve_csv(std::ostream& out,
                              const std::vector<IterationRow>& rows) {
  out << "iteration,mean_reward,success_rate,infeasible_steps,clip_fraction,approx_kl\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_double(r.mean_reward) << ','
        << format_double(r.success_rate) << ','
        << format_double(r.infeasible_steps) << ','
        << format_double(r.clip_fraction) << ','
        << format_double(r.approx_kl) << '\n';
  }
}

TrainResult train(const ScenarioSpec& family, const TrainConfig& cfg,
                  const RewardConfig& reward_cfg,
                  const ControllerConfig& controller_cfg,
                  const std::function<void(const IterationRow&)>& on_iteration) {
  validate_train_config(cfg, reward_cfg);

  GnnArch arch;
  CriticArch critic_arch;
  critic_arch.head.widths.front() = arch.feature_dim();
  const ParamBounds bounds = controller_cfg.bounds;

  Rng policy_rng(Rng::derive(cfg.seed, {0x1dULL}));
  std::vector<double> theta = init_policy_params(arch, policy_rng, cfg.init_std);
  Rng critic_rng(Rng::derive(cfg.seed, {0x2dULL}));
  std::vector<double> critic_params = init_critic_params(critic_arch, critic_rng);
  Rng shuffle_rng(Rng::derive(cfg.seed, {0x3dULL}));
  AdamState theta_opt;
  AdamState critic_opt;

  TrainResult result;
  const int jobs = resolve_jobs(cfg.jobs);

  struct EpisodeSlot {
    WorldConfig scenario;
    Trajectory traj;
    std::unique_ptr<RecordingGnnPolicy> recorder;
    std::exception_ptr error;
  };

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const int episodes = cfg.episodes_per_iteration;
    std::vector<EpisodeSlot> slots(episodes);
    parallel_for(episodes, jobs, [&](int e) {
      EpisodeSlot& slot = slots[e];
      try {
        slot.scenario = make_scenario(
            family, Rng::derive(cfg.seed, {0x5cULL, static_cast<std::uint64_t>(iter),
                                           static_cast<std::uint64_t>(e)}));
        slot.recorder = std::make_unique<RecordingGnnPolicy>(arch, theta, bounds,
                                                             slot.scenario);
        EpisodeOptions options;
        options.controller = controller_cfg;
        options.reward = reward_cfg;
        options.jobs = 1;
        slot.traj = run_episode(
            slot.scenario, *slot.recorder,
            Rng::derive(cfg.seed, {0x5eULL, static_cast<std::uint64_t>(iter),
                                   static_cast<std::uint64_t>(e)}),
            options);
      } catch (...) {
        slot.error = std::current_exception();
      }
    });
    for (const auto& slot : slots)
      if (slot.error) std::rethrow_exception(slot.error);

    RolloutBatch batch;
    double reward_sum = 0.0;
    double success_sum = 0.0;
    double infeasible_sum = 0.0;
    for (const auto& slot : slots) {
      const Trajectory& traj = slot.traj;
      const int n = static_cast<int>(slot.scenario.agents.size());
      int arrived = 0;
      for (char c : traj.arrived) arrived += c != 0;
      success_sum += static_cast<double>(arrived) / n;
      infeasible_sum += traj.infeasible_steps();

      for (int i = 0; i < n; ++i) {
        std::vector<RolloutSample> sequence;
        std::vector<double> rewards;
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
          const AgentStepRecord& rec = traj.steps[t].agents[i];
          if (rec.done) break;  // arrival freezes the agent for good
          const auto& slot_rec = slot.recorder->slot(static_cast<int>(t), i);
          if (!slot_rec.used)
            throw ContractViolation("missing rollout record");
          RolloutSample sample;
          sample.features = slot_rec.features;
          sample.raw = slot_rec.raw;
          sample.old_log_prob = slot_rec.log_prob;
          sample.reward = rec.reward;
          sequence.push_back(std::move(sample));
          rewards.push_back(rec.reward);
          reward_sum += rec.reward;
        }
        if (sequence.empty()) continue;
        std::vector<double> values(sequence.size() + 1, 0.0);
        for (std::size_t k = 0; k < sequence.size(); ++k)
          values[k] = critic_value(arch, theta, critic_arch, critic_params,
                                   sequence[k]);
        std::vector<double> adv =
            gae(rewards, values, reward_cfg.gamma, cfg.gae_lambda);
        for (std::size_t k = 0; k < sequence.size(); ++k) {
          sequence[k].value = values[k];
          sequence[k].advantage = adv[k];
          sequence[k].ret = adv[k] + values[k];
        }
        for (auto& sample : sequence) batch.samples.push_back(std::move(sample));
      }
    }

    PpoDiagnostics diag;
    if (!batch.samples.empty())
      diag = ppo_update(batch, arch, theta, critic_arch, critic_params,
                        theta_opt, critic_opt, bounds, cfg, shuffle_rng);

    IterationRow row;
    row.iteration = iter;
    row.mean_reward = reward_sum / episodes;
    row.success_rate = success_sum / episodes;
    row.infeasible_steps = infeasible_sum / episodes;
    row.clip_fraction = diag.clip_fraction;
    row.approx_kl = diag.approx_kl;
    result.curve.push_back(row);
    if (on_iteration) on_iteration(row);

    if (!diag.finite) {
      result.aborted_non_finite = true;
      break;
    }
  }

  result.policy = Checkpoint{arch, bounds, std::move(theta)};
  result.critic_params = std::move(critic_params);
  return result;
}

}  // namespace cbfnav
