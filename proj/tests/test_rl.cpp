#include "cbfnav/rl.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "cbfnav/scenarios.hpp"
#include "doctest.h"

using namespace cbfnav;

namespace {

constexpr double kGaussEntropyPerDim = 1.4189385332046727;

LocalView crowded_view() {
  LocalView v;
  v.self_id = 0;
  v.self.position = Vec2(0.25, -0.5);
  v.self.velocity = Vec2(0.1, 0.0);
  v.goal = Vec2(2.0, 1.0);

  NeighborAgent a;
  a.id = 2;
  a.state.position = Vec2(1.0, 0.5);
  a.state.velocity = Vec2(-0.3, 0.2);
  v.agents.push_back(a);

  NeighborAgent b;
  b.id = 5;
  b.state.position = Vec2(-0.75, 0.25);
  b.state.velocity = Vec2(0.0, -0.4);
  v.agents.push_back(b);

  NeighborObstacle o;
  o.id = 1;
  o.center = Vec2(0.5, -1.25);
  v.obstacles.push_back(o);
  return v;
}

LocalView obstacle_only_view() {
  LocalView v;
  v.self_id = 3;
  v.self.position = Vec2(-1.5, 0.75);
  v.self.velocity = Vec2(-0.05, 0.2);
  v.goal = Vec2(0.5, -2.0);
  NeighborObstacle o;
  o.id = 4;
  o.center = Vec2(-0.9, 0.1);
  v.obstacles.push_back(o);
  NeighborObstacle p;
  p.id = 6;
  p.center = Vec2(-2.2, 1.4);
  v.obstacles.push_back(p);
  return v;
}

LocalView empty_view() {
  LocalView v;
  v.self_id = 7;
  v.self.position = Vec2(3.0, -1.0);
  v.goal = Vec2(-1.0, 2.0);
  return v;
}

GnnFeatures features_for(int which) {
  switch (which % 3) {
    case 0: return relative_features(crowded_view());
    case 1: return relative_features(obstacle_only_view());
    default: return relative_features(empty_view());
  }
}

// Recomputes the log density the optimizer assigns to a stored raw draw,
// going through the same aggregate -> update -> log_std path.
double policy_log_prob(const GnnArch& arch, std::span<const double> theta,
                       const ParamBounds& bounds, const RolloutSample& s) {
  const int na = arch.msg_agent.param_count();
  const int no = arch.msg_obstacle.param_count();
  std::vector<double> aggregate(static_cast<std::size_t>(arch.feature_dim()));
  gnn_aggregate(arch, theta, s.features, aggregate);
  ActionDistribution dist;
  dist.bounds = bounds;
  mlp_forward(arch.update, theta.subspan(na + no, arch.update.param_count()),
              aggregate, std::span<double>(dist.mean.data(), kActionDim));
  for (int k = 0; k < kActionDim; ++k)
    dist.log_std[k] = theta[static_cast<std::size_t>(arch.log_std_offset()) + k];
  return action_log_prob(dist, s.raw);
}

struct FdSetup {
  GnnArch arch;
  CriticArch critic_arch;
  ParamBounds bounds;
  std::vector<double> theta;
  std::vector<double> critic;
  RolloutBatch batch;
  std::vector<int> indices;
  TrainConfig cfg;
};

// Five samples with ratios pinned at {1.0, 1.1, 0.95, 1.35, 0.7}; the last
// two sit outside the clip interval on the flat side of their advantage.
FdSetup make_fd_setup() {
  FdSetup s;
  s.critic_arch.head.widths.front() = s.arch.feature_dim();
  Rng theta_rng(0x77aa01ULL);
  s.theta = init_policy_params(s.arch, theta_rng, 0.5);
  Rng critic_rng(0x88bb02ULL);
  s.critic = init_critic_params(s.critic_arch, critic_rng);

  const double ratios[5] = {1.0, 1.1, 0.95, 1.35, 0.7};
  const double advantages[5] = {0.8, -0.5, 1.2, 0.6, -0.9};
  const double rets[5] = {0.3, -0.4, 1.1, 0.0, 0.7};
  Rng raw_rng(0x5a5a03ULL);
  for (int i = 0; i < 5; ++i) {
    RolloutSample sample;
    sample.features = features_for(i);
    for (int k = 0; k < kActionDim; ++k) sample.raw[k] = raw_rng.uniform(-1.2, 1.2);
    sample.old_log_prob =
        policy_log_prob(s.arch, s.theta, s.bounds, sample) - std::log(ratios[i]);
    sample.advantage = advantages[i];
    sample.ret = rets[i];
    s.batch.samples.push_back(std::move(sample));
    s.indices.push_back(i);
  }
  return s;
}

double theta_objective(const FdSetup& s, std::span<const double> theta) {
  PpoGradients g = ppo_minibatch_gradient(s.batch, s.indices, s.arch, theta,
                                          s.critic_arch, s.critic, s.bounds, s.cfg);
  return g.policy_loss - s.cfg.entropy_coeff * g.entropy;
}

double critic_objective(const FdSetup& s, std::span<const double> critic) {
  PpoGradients g = ppo_minibatch_gradient(s.batch, s.indices, s.arch, s.theta,
                                          s.critic_arch, critic, s.bounds, s.cfg);
  return s.cfg.value_coeff * g.value_loss;
}

double rel_gap(double fd, double an) {
  return std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
}

RolloutBatch make_training_batch(int n, const GnnArch& arch,
                                 std::span<const double> theta,
                                 const ParamBounds& bounds, Rng& rng) {
  RolloutBatch batch;
  for (int i = 0; i < n; ++i) {
    RolloutSample sample;
    sample.features = features_for(i);
    for (int k = 0; k < kActionDim; ++k) sample.raw[k] = rng.uniform(-1.5, 1.5);
    sample.old_log_prob =
        policy_log_prob(arch, theta, bounds, sample) - rng.uniform(-0.15, 0.15);
    sample.advantage = rng.uniform(-1.5, 1.5);
    sample.ret = rng.uniform(-1.0, 1.0);
    batch.samples.push_back(std::move(sample));
  }
  return batch;
}

}  // namespace

TEST_CASE("discounted_return folds rewards from the tail") {
  const double rewards[] = {1.0, 2.0, 3.0};
  CHECK(discounted_return(rewards, 0.5) == 2.75);
  CHECK(discounted_return(rewards, 0.0) == 1.0);
  CHECK(discounted_return(std::span<const double>{}, 0.9) == 0.0);
  const double single[] = {-2.5};
  CHECK(discounted_return(single, 0.99) == -2.5);
}

TEST_CASE("gae matches the explicit double sum") {
  const double gamma = 0.97;
  const double lambda = 0.9;
  Rng rng(0xac3f21ULL);
  std::vector<double> rewards(17);
  std::vector<double> values(18);
  for (auto& r : rewards) r = rng.uniform(-1.0, 1.0);
  for (auto& v : values) v = rng.uniform(-1.0, 1.0);

  const std::vector<double> adv = gae(rewards, values, gamma, lambda);
  REQUIRE(adv.size() == rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    double expected = 0.0;
    double weight = 1.0;
    for (std::size_t l = t; l < rewards.size(); ++l) {
      const double delta = rewards[l] + gamma * values[l + 1] - values[l];
      expected += weight * delta;
      weight *= gamma * lambda;
    }
    CHECK(std::abs(adv[t] - expected) <= 1e-12);
  }
}

TEST_CASE("gae limits reduce to one-step deltas and discounted returns") {
  const double gamma = 0.95;
  Rng rng(0xbeef7ULL);
  std::vector<double> rewards(11);
  std::vector<double> values(12);
  for (auto& r : rewards) r = rng.uniform(-2.0, 2.0);
  for (auto& v : values) v = rng.uniform(-2.0, 2.0);

  const std::vector<double> td = gae(rewards, values, gamma, 0.0);
  for (std::size_t t = 0; t < rewards.size(); ++t)
    CHECK(td[t] == rewards[t] + gamma * values[t + 1] - values[t]);

  // lambda = 1 telescopes into the discounted return minus the value.
  const std::vector<double> mc = gae(rewards, values, gamma, 1.0);
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    const std::span<const double> tail(rewards.data() + t, rewards.size() - t);
    const double horizon =
        std::pow(gamma, static_cast<double>(rewards.size() - t)) * values.back();
    CHECK(std::abs(mc[t] - (discounted_return(tail, gamma) + horizon - values[t])) <=
          1e-12);
  }
}

TEST_CASE("gae requires exactly one bootstrap value") {
  const std::vector<double> rewards(4, 0.5);
  const std::vector<double> values(4, 0.0);
  CHECK_THROWS_AS((void)gae(rewards, values, 0.9, 0.9), ContractViolation);
}

TEST_CASE("adam_step honors the bias-corrected first step") {
  std::vector<double> params = {1.0, -0.25};
  const std::vector<double> grad = {2.0, -0.5};
  AdamState state;
  adam_step(grad, params, state, 0.1);
  CHECK(state.t == 1);
  for (int i = 0; i < 2; ++i) {
    const double m = 0.1 * grad[i];
    const double v = 0.001 * grad[i] * grad[i];
    const double expected = (i == 0 ? 1.0 : -0.25) -
                            0.1 * (m / 0.1) / (std::sqrt(v / 0.001) + 1e-8);
    CHECK(params[i] == doctest::Approx(expected).epsilon(1e-15));
  }
  adam_step(grad, params, state, 0.1);
  CHECK(state.t == 2);
}

TEST_CASE("adam_step with zero learning rate leaves parameters untouched") {
  Rng rng(0x1234fULL);
  std::vector<double> params(40);
  std::vector<double> grad(40);
  for (auto& p : params) p = rng.uniform(-3.0, 3.0);
  for (auto& g : grad) g = rng.uniform(-3.0, 3.0);
  const std::vector<double> before = params;
  AdamState state;
  adam_step(grad, params, state, 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) CHECK(params[i] == before[i]);
}

TEST_CASE("adam_step resets state when the parameter shape changes") {
  std::vector<double> params = {0.5, 0.5, 0.5};
  const std::vector<double> grad = {1.0, 1.0, 1.0};
  AdamState state;
  adam_step(grad, params, state, 0.01);
  adam_step(grad, params, state, 0.01);
  CHECK(state.t == 2);

  std::vector<double> smaller = {0.5};
  const std::vector<double> g1 = {1.0};
  adam_step(g1, smaller, state, 0.01);
  CHECK(state.t == 1);
  CHECK(state.m.size() == 1);

  const std::vector<double> mismatched = {1.0, 2.0};
  CHECK_THROWS_AS(adam_step(mismatched, smaller, state, 0.01), ContractViolation);
}

TEST_CASE("critic_value applies the head to the message aggregate") {
  GnnArch arch;
  CriticArch critic_arch;
  critic_arch.head.widths.front() = arch.feature_dim();
  Rng theta_rng(0x40aULL);
  const std::vector<double> theta = init_policy_params(arch, theta_rng, 0.5);
  Rng critic_rng(0x41bULL);
  const std::vector<double> critic = init_critic_params(critic_arch, critic_rng);

  RolloutSample sample;
  sample.features = relative_features(crowded_view());
  const double v = critic_value(arch, theta, critic_arch, critic, sample);

  std::vector<double> aggregate(static_cast<std::size_t>(arch.feature_dim()));
  gnn_aggregate(arch, theta, sample.features, aggregate);
  double expected = 0.0;
  mlp_forward(critic_arch.head, critic, aggregate, std::span<double>(&expected, 1));
  CHECK(v == expected);

  CriticArch wrong;
  wrong.head.widths.front() = arch.feature_dim() + 1;
  Rng wrong_rng(0x42cULL);
  const std::vector<double> wrong_params = init_critic_params(wrong, wrong_rng);
  CHECK_THROWS_AS((void)critic_value(arch, theta, wrong, wrong_params, sample),
                  ContractViolation);
}

TEST_CASE("minibatch loss terms match hand recomputation") {
  const FdSetup s = make_fd_setup();
  const PpoGradients g = ppo_minibatch_gradient(
      s.batch, s.indices, s.arch, s.theta, s.critic_arch, s.critic, s.bounds, s.cfg);
  REQUIRE(g.finite);

  const double ratios[5] = {1.0, 1.1, 0.95, 1.35, 0.7};
  double surrogate_sum = 0.0;
  double kl_sum = 0.0;
  double ratio_sum = 0.0;
  double value_sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    const RolloutSample& sample = s.batch.samples[static_cast<std::size_t>(i)];
    const double r = std::exp(policy_log_prob(s.arch, s.theta, s.bounds, sample) -
                              sample.old_log_prob);
    CHECK(std::abs(r - ratios[i]) <= 1e-12);
    surrogate_sum += std::min(r * sample.advantage,
                              std::clamp(r, 0.8, 1.2) * sample.advantage);
    kl_sum += (r - 1.0) - std::log(r);
    ratio_sum += r;
    const double v = critic_value(s.arch, s.theta, s.critic_arch, s.critic, sample);
    value_sum += 0.5 * (v - sample.ret) * (v - sample.ret);
  }
  CHECK(g.policy_loss == doctest::Approx(-surrogate_sum / 5.0).epsilon(1e-12));
  CHECK(g.value_loss == doctest::Approx(value_sum / 5.0).epsilon(1e-12));
  CHECK(g.sum_kl == doctest::Approx(kl_sum).epsilon(1e-12));
  CHECK(g.sum_ratio == doctest::Approx(ratio_sum).epsilon(1e-12));
  CHECK(g.clipped == 2);
  const double log_half = std::log(0.5);
  CHECK(g.entropy ==
        doctest::Approx(kActionDim * (kGaussEntropyPerDim + log_half)).epsilon(1e-13));

  CHECK_THROWS_AS((void)ppo_minibatch_gradient(s.batch, std::span<const int>{}, s.arch,
                                               s.theta, s.critic_arch, s.critic,
                                               s.bounds, s.cfg),
                  ContractViolation);
}

TEST_CASE("policy gradient matches central differences") {
  FdSetup s = make_fd_setup();
  const PpoGradients g = ppo_minibatch_gradient(
      s.batch, s.indices, s.arch, s.theta, s.critic_arch, s.critic, s.bounds, s.cfg);
  REQUIRE(g.finite);

  std::vector<std::size_t> coords;
  const std::size_t na = static_cast<std::size_t>(s.arch.msg_agent.param_count());
  const std::size_t no = static_cast<std::size_t>(s.arch.msg_obstacle.param_count());
  const std::size_t nu = static_cast<std::size_t>(s.arch.update.param_count());
  coords.push_back(0);
  coords.push_back(na - 1);
  coords.push_back(na);
  coords.push_back(na + no - 1);
  coords.push_back(na + no);
  coords.push_back(na + no + nu - 1);
  for (int k = 0; k < kActionDim; ++k)
    coords.push_back(static_cast<std::size_t>(s.arch.log_std_offset()) + k);
  Rng pick(0x90210ULL);
  for (int i = 0; i < 90; ++i)
    coords.push_back(static_cast<std::size_t>(
        pick.uniform_int(0, static_cast<std::int64_t>(s.theta.size()) - 1)));

  std::vector<double> perturbed = s.theta;
  for (std::size_t j : coords) {
    const double h = 1e-5 * std::max(1.0, std::abs(s.theta[j]));
    perturbed[j] = s.theta[j] + h;
    const double up = theta_objective(s, perturbed);
    perturbed[j] = s.theta[j] - h;
    const double down = theta_objective(s, perturbed);
    perturbed[j] = s.theta[j];
    CHECK(rel_gap((up - down) / (2.0 * h), g.theta[j]) <= 1e-6);
  }
}

TEST_CASE("critic gradient matches central differences") {
  FdSetup s = make_fd_setup();
  const PpoGradients g = ppo_minibatch_gradient(
      s.batch, s.indices, s.arch, s.theta, s.critic_arch, s.critic, s.bounds, s.cfg);
  REQUIRE(g.finite);
  REQUIRE(g.critic.size() == s.critic.size());

  std::vector<std::size_t> coords = {0, s.critic.size() - 1};
  Rng pick(0x60606ULL);
  for (int i = 0; i < 60; ++i)
    coords.push_back(static_cast<std::size_t>(
        pick.uniform_int(0, static_cast<std::int64_t>(s.critic.size()) - 1)));

  std::vector<double> perturbed = s.critic;
  for (std::size_t j : coords) {
    const double h = 1e-5 * std::max(1.0, std::abs(s.critic[j]));
    perturbed[j] = s.critic[j] + h;
    const double up = critic_objective(s, perturbed);
    perturbed[j] = s.critic[j] - h;
    const double down = critic_objective(s, perturbed);
    perturbed[j] = s.critic[j];
    CHECK(rel_gap((up - down) / (2.0 * h), g.critic[j]) <= 1e-6);
  }
}

TEST_CASE("clipped samples on the flat branch get no likelihood gradient") {
  GnnArch arch;
  CriticArch critic_arch;
  critic_arch.head.widths.front() = arch.feature_dim();
  ParamBounds bounds;
  Rng theta_rng(0x3c3c3cULL);
  const std::vector<double> theta = init_policy_params(arch, theta_rng, 0.5);
  Rng critic_rng(0x4d4d4dULL);
  const std::vector<double> critic = init_critic_params(critic_arch, critic_rng);
  TrainConfig cfg;
  cfg.entropy_coeff = 0.0;

  auto single = [&](double ratio, double advantage) {
    RolloutBatch batch;
    RolloutSample sample;
    sample.features = relative_features(crowded_view());
    sample.raw = {0.3, -0.8, 0.1, 0.9};
    sample.old_log_prob =
        policy_log_prob(arch, theta, bounds, sample) - std::log(ratio);
    sample.advantage = advantage;
    sample.ret = 0.25;
    batch.samples.push_back(std::move(sample));
    const int idx[] = {0};
    return ppo_minibatch_gradient(batch, idx, arch, theta, critic_arch, critic,
                                  bounds, cfg);
  };

  // Positive advantage above 1 + eps and negative below 1 - eps are flat.
  for (const auto& [ratio, advantage] : {std::pair{1.5, 1.0}, std::pair{0.7, -1.0}}) {
    const PpoGradients g = single(ratio, advantage);
    CHECK(g.clipped == 1);
    for (double v : g.theta) CHECK(v == 0.0);
    CHECK(g.policy_loss == doctest::Approx(-std::clamp(ratio, 0.8, 1.2) * advantage)
                               .epsilon(1e-12));
    bool critic_nonzero = false;
    for (double v : g.critic) critic_nonzero = critic_nonzero || v != 0.0;
    CHECK(critic_nonzero);
  }

  // A large ratio with a negative advantage stays on the unclipped branch.
  const PpoGradients active = single(1.5, -1.0);
  CHECK(active.clipped == 1);
  bool theta_nonzero = false;
  for (double v : active.theta) theta_nonzero = theta_nonzero || v != 0.0;
  CHECK(theta_nonzero);
}

TEST_CASE("non-finite samples poison the gradient flag") {
  FdSetup s = make_fd_setup();
  s.batch.samples[2].old_log_prob = -std::numeric_limits<double>::infinity();
  const PpoGradients g = ppo_minibatch_gradient(
      s.batch, s.indices, s.arch, s.theta, s.critic_arch, s.critic, s.bounds, s.cfg);
  CHECK(!g.finite);
}

TEST_CASE("ppo_update normalizes advantages in place") {
  GnnArch arch;
  CriticArch critic_arch;
  critic_arch.head.widths.front() = arch.feature_dim();
  ParamBounds bounds;
  Rng theta_rng(0x111213ULL);
  std::vector<double> theta = init_policy_params(arch, theta_rng, 0.5);
  Rng critic_rng(0x141516ULL);
  std::vector<double> critic = init_critic_params(critic_arch, critic_rng);
  Rng batch_rng(0x171819ULL);
  RolloutBatch batch = make_training_batch(24, arch, theta, bounds, batch_rng);

  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  const std::vector<double> theta_before = theta;
  const std::vector<double> critic_before = critic;
  AdamState theta_opt;
  AdamState critic_opt;
  Rng shuffle_rng(0x42ULL);
  const PpoDiagnostics diag = ppo_update(batch, arch, theta, critic_arch, critic,
                                         theta_opt, critic_opt, bounds, cfg,
                                         shuffle_rng);
  CHECK(diag.finite);
  CHECK(diag.clip_fraction >= 0.0);
  CHECK(diag.clip_fraction <= 1.0);

  // Zero learning rate keeps every parameter bit-identical.
  for (std::size_t i = 0; i < theta.size(); ++i) CHECK(theta[i] == theta_before[i]);
  for (std::size_t i = 0; i < critic.size(); ++i) CHECK(critic[i] == critic_before[i]);

  double mean = 0.0;
  for (const auto& sample : batch.samples) mean += sample.advantage;
  mean /= static_cast<double>(batch.samples.size());
  double var = 0.0;
  for (const auto& sample : batch.samples)
    var += (sample.advantage - mean) * (sample.advantage - mean);
  var /= static_cast<double>(batch.samples.size());
  CHECK(std::abs(mean) <= 1e-12);
  CHECK(std::abs(var - 1.0) <= 1e-6);
}

TEST_CASE("ppo_update is deterministic for a fixed shuffle seed") {
  GnnArch arch;
  CriticArch critic_arch;
  critic_arch.head.widths.front() = arch.feature_dim();
  ParamBounds bounds;
  Rng theta_rng(0x212223ULL);
  const std::vector<double> theta0 = init_policy_params(arch, theta_rng, 0.5);
  Rng critic_rng(0x242526ULL);
  const std::vector<double> critic0 = init_critic_params(critic_arch, critic_rng);
  Rng batch_rng(0x272829ULL);
  const RolloutBatch batch0 = make_training_batch(24, arch, theta0, bounds, batch_rng);

  TrainConfig cfg;
  cfg.minibatch_size = 8;  // three shuffled minibatches per epoch

  auto run = [&](std::uint64_t shuffle_seed) {
    RolloutBatch batch = batch0;
    std::vector<double> theta = theta0;
    std::vector<double> critic = critic0;
    AdamState theta_opt;
    AdamState critic_opt;
    Rng shuffle_rng(shuffle_seed);
    const PpoDiagnostics diag = ppo_update(batch, arch, theta, critic_arch, critic,
                                           theta_opt, critic_opt, bounds, cfg,
                                           shuffle_rng);
    return std::tuple{theta, critic, diag};
  };

  const auto [theta_a, critic_a, diag_a] = run(0x99ULL);
  const auto [theta_b, critic_b, diag_b] = run(0x99ULL);
  CHECK(diag_a.finite);
  CHECK(theta_a == theta_b);
  CHECK(critic_a == critic_b);
  CHECK(diag_a.mean_ratio == diag_b.mean_ratio);
  CHECK(diag_a.approx_kl == diag_b.approx_kl);
  CHECK(diag_a.policy_loss == diag_b.policy_loss);

  bool moved = false;
  for (std::size_t i = 0; i < theta_a.size(); ++i)
    moved = moved || theta_a[i] != theta0[i];
  CHECK(moved);
}

TEST_CASE("ppo_update discards a non-finite step and keeps old parameters") {
  GnnArch arch;
  CriticArch critic_arch;
  critic_arch.head.widths.front() = arch.feature_dim();
  ParamBounds bounds;
  Rng theta_rng(0x313233ULL);
  std::vector<double> theta = init_policy_params(arch, theta_rng, 0.5);
  Rng critic_rng(0x343536ULL);
  std::vector<double> critic = init_critic_params(critic_arch, critic_rng);
  Rng batch_rng(0x373839ULL);
  RolloutBatch batch = make_training_batch(3, arch, theta, bounds, batch_rng);
  batch.samples[1].old_log_prob = -std::numeric_limits<double>::infinity();

  const std::vector<double> theta_before = theta;
  const std::vector<double> critic_before = critic;
  AdamState theta_opt;
  AdamState critic_opt;
  Rng shuffle_rng(0x31ULL);
  TrainConfig cfg;
  const PpoDiagnostics diag = ppo_update(batch, arch, theta, critic_arch, critic,
                                         theta_opt, critic_opt, bounds, cfg,
                                         shuffle_rng);
  CHECK(!diag.finite);
  CHECK(theta == theta_before);
  CHECK(critic == critic_before);

  RolloutBatch empty;
  const PpoDiagnostics idle = ppo_update(empty, arch, theta, critic_arch, critic,
                                         theta_opt, critic_opt, bounds, cfg,
                                         shuffle_rng);
  CHECK(idle.finite);
  CHECK(idle.mean_ratio == 1.0);
}

TEST_CASE("write_learning_curve_csv uses shortest round-trip decimals") {
  std::vector<IterationRow> rows(2);
  rows[0].iteration = 0;
  rows[0].mean_reward = 1.5;
  rows[0].success_rate = 0.875;
  rows[0].infeasible_steps = 0.0;
  rows[0].clip_fraction = 0.25;
  rows[0].approx_kl = 0.001;
  rows[1].iteration = 1;
  rows[1].mean_reward = -3.25;
  rows[1].success_rate = 1.0;
  rows[1].infeasible_steps = 2.0;
  rows[1].clip_fraction = 0.0;
  rows[1].approx_kl = 1e-9;

  std::ostringstream out;
  write_learning_curve_csv(out, rows);
  CHECK(out.str() ==
        "iteration,mean_reward,success_rate,infeasible_steps,clip_fraction,approx_kl\n"
        "0,1.5,0.875,0,0.25,0.001\n"
        "1,-3.25,1,2,0,1e-09\n");
}

TEST_CASE("train rejects out-of-range configuration") {
  const ScenarioSpec family = default_spec(ScenarioKind::Singularity);
  const RewardConfig reward;
  const ControllerConfig controller;
  TrainConfig cfg;
  cfg.iterations = 0;

  TrainConfig bad = cfg;
  bad.iterations = -1;
  CHECK_THROWS_AS((void)train(family, bad, reward, controller), ConfigError);
  bad = cfg;
  bad.clip_ratio = 1.0;
  CHECK_THROWS_AS((void)train(family, bad, reward, controller), ConfigError);
  bad = cfg;
  bad.gae_lambda = -0.1;
  CHECK_THROWS_AS((void)train(family, bad, reward, controller), ConfigError);
  bad = cfg;
  bad.init_std = 0.0;
  CHECK_THROWS_AS((void)train(family, bad, reward, controller), ConfigError);
  bad = cfg;
  bad.minibatch_size = 0;
  CHECK_THROWS_AS((void)train(family, bad, reward, controller), ConfigError);
}

TEST_CASE("train with zero iterations returns the seeded initialization") {
  const ScenarioSpec family = default_spec(ScenarioKind::Singularity);
  TrainConfig cfg;
  cfg.iterations = 0;
  cfg.seed = 77;
  const TrainResult result = train(family, cfg, RewardConfig{}, ControllerConfig{});
  CHECK(result.curve.empty());
  CHECK(!result.aborted_non_finite);

  GnnArch arch;
  Rng policy_rng(Rng::derive(cfg.seed, {0x1dULL}));
  const std::vector<double> expected_theta =
      init_policy_params(arch, policy_rng, cfg.init_std);
  CHECK(result.policy.theta == expected_theta);

  CriticArch critic_arch;
  critic_arch.head.widths.front() = arch.feature_dim();
  Rng critic_rng(Rng::derive(cfg.seed, {0x2dULL}));
  CHECK(result.critic_params == init_critic_params(critic_arch, critic_rng));
}

TEST_CASE("short training runs are bitwise repeatable") {
  const ScenarioSpec family = default_spec(ScenarioKind::Singularity);
  TrainConfig cfg;
  cfg.iterations = 2;
  cfg.episodes_per_iteration = 2;
  cfg.seed = 11;

  std::vector<IterationRow> seen;
  const TrainResult a = train(family, cfg, RewardConfig{}, ControllerConfig{},
                              [&](const IterationRow& row) { seen.push_back(row); });
  const TrainResult b = train(family, cfg, RewardConfig{}, ControllerConfig{});

  REQUIRE(a.curve.size() == 2);
  CHECK(!a.aborted_non_finite);
  CHECK(a.policy.theta == b.policy.theta);
  CHECK(a.critic_params == b.critic_params);
  REQUIRE(seen.size() == 2);
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].iteration == static_cast<int>(i));
    CHECK(a.curve[i].mean_reward == b.curve[i].mean_reward);
    CHECK(a.curve[i].approx_kl == b.curve[i].approx_kl);
    CHECK(a.curve[i].mean_reward == seen[i].mean_reward);
    CHECK(std::isfinite(a.curve[i].mean_reward));
  }
}
