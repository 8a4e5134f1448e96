#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "cbfnav/checkpoint.hpp"
#include "cbfnav/policy.hpp"
#include "cbfnav/reward.hpp"
#include "cbfnav/scenarios.hpp"
#include "cbfnav/sim.hpp"

namespace cbfnav {

// Sum of gamma^t * rewards[t].
double discounted_return(std::span<const double> rewards, double gamma);

// Generalized advantage estimation over one contiguous trajectory segment.
// values must hold rewards.size() + 1 entries; the final entry is the
// bootstrap value for the state after the last reward (0 when the segment
// ends the episode, whether by arrival or by step cutoff).
std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values, double gamma,
                        double lambda);

struct TrainConfig {
  int iterations = 150;
  int episodes_per_iteration = 8;
  int epochs = 4;
  int minibatch_size = 256;
  double clip_ratio = 0.2;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  double entropy_coeff = 1e-3;
  double value_coeff = 0.5;
  double init_std = 0.5;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// One decision point: everything needed to re-evaluate the policy and the
// value head at update time.
struct RolloutSample {
  GnnFeatures features;
  std::array<double, kActionDim> raw{};
  double old_log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

struct RolloutBatch {
  std::vector<RolloutSample> samples;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

// Takes one descent step on params in place. grad and params must match in
// size; the state resizes itself on first use.
void adam_step(std::span<const double> grad, std::vector<double>& params,
               AdamState& state, double learning_rate);

// Value head applied to the aggregated message features. The aggregation
// reuses the policy's message networks but gradients never flow back into
// them; the head owns its parameters separately.
struct CriticArch {
  MlpSpec head{{64, 64, 1}};
};

std::vector<double> init_critic_params(const CriticArch& arch, Rng& rng);

double critic_value(const GnnArch& arch, std::span<const double> theta,
                    const CriticArch& critic_arch,
                    std::span<const double> critic_params,
                    const RolloutSample& sample);

// Minibatch gradient of the clipped-surrogate objective plus entropy bonus
// (into grad_theta) and of the squared value-error term (into grad_critic).
// Losses and gradients are averaged over the selected samples.
struct PpoGradients {
  std::vector<double> theta;
  std::vector<double> critic;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double sum_ratio = 0.0;
  double sum_kl = 0.0;
  int clipped = 0;
  bool finite = true;
};

PpoGradients ppo_minibatch_gradient(const RolloutBatch& batch,
                                    std::span<const int> indices,
                                    const GnnArch& arch,
                                    std::span<const double> theta,
                                    const CriticArch& critic_arch,
                                    std::span<const double> critic_params,
                                    const ParamBounds& bounds,
                                    const TrainConfig& cfg);

struct PpoDiagnostics {
  double mean_ratio = 1.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  bool finite = true;
};

// One PPO update: normalizes advantages in place, then runs cfg.epochs
// shuffled minibatch passes of Adam on theta and critic_params. On a
// non-finite loss or gradient the offending step is discarded, finite is
// cleared, and both parameter vectors keep their last good values.
PpoDiagnostics ppo_update(RolloutBatch& batch, const GnnArch& arch,
                          std::vector<double>& theta,
                          const CriticArch& critic_arch,
                          std::vector<double>& critic_params,
                          AdamState& theta_opt, AdamState& critic_opt,
                          const ParamBounds& bounds, const TrainConfig& cfg,
                          Rng& shuffle_rng);

struct IterationRow {
  int iteration = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;
  double infeasible_steps = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

void write_learning_curve_csv(std::ostream& out,
                              const std::vector<IterationRow>& rows);

struct TrainResult {
  Checkpoint policy;
  std::vector<double> critic_params;
  std::vector<IterationRow> curve;
  // Set when an update produced a non-finite loss; policy then holds the
  // parameters from before the aborted update.
  bool aborted_non_finite = false;
};

// Collects episodes_per_iteration rollouts per iteration from freshly
// generated scenarios of the given family and runs PPO on them. Fully
// deterministic for a fixed config, including across jobs settings.
// on_iteration, when set, observes each curve row as it is produced.
TrainResult train(const ScenarioSpec& family, const TrainConfig& cfg,
                  const RewardConfig& reward_cfg,
                  const ControllerConfig& controller_cfg,
                  const std::function<void(const IterationRow&)>& on_iteration = {});

}  // namespace cbfnav
