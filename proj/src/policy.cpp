#include "cbfnav/policy.hpp"

#include <cmath>

namespace cbfnav {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double logistic(double x) {
  double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  // Keep squashed values strictly interior even for saturated inputs.
  if (s < 1e-12) s = 1e-12;
  if (s > 1.0 - 1e-12) s = 1.0 - 1e-12;
  return s;
}

const Interval& interval_for(const ParamBounds& bounds, int k) {
  return (k == 0 || k == 2) ? bounds.zeta : bounds.eta;
}

}  // namespace

GnnFeatures relative_features(const LocalView& view) {
  GnnFeatures f;
  f.agents.reserve(view.agents.size());
  for (const auto& nb : view.agents) {
    Vec2 dp = nb.state.position - view.self.position;
    Vec2 dv = nb.state.velocity - view.self.velocity;
    f.agents.push_back({dp.x(), dp.y(), dv.x(), dv.y()});
  }
  f.obstacles.reserve(view.obstacles.size());
  for (const auto& ob : view.obstacles) {
    Vec2 dp = ob.center - view.self.position;
    f.obstacles.push_back({dp.x(), dp.y()});
  }
  return f;
}

void gnn_aggregate(const GnnArch& arch, std::span<const double> theta,
                   const GnnFeatures& features, std::span<double> aggregate) {
  const int dim = arch.feature_dim();
  if (static_cast<int>(aggregate.size()) != dim)
    throw ContractViolation("aggregate size mismatch");
  if (static_cast<int>(theta.size()) != arch.param_count())
    throw ContractViolation("policy parameter count mismatch");

  std::span<const double> agent_params = theta.subspan(0, arch.msg_agent.param_count());
  std::span<const double> obstacle_params =
      theta.subspan(arch.msg_agent.param_count(), arch.msg_obstacle.param_count());

  for (int k = 0; k < dim; ++k) aggregate[k] = 0.0;
  std::vector<double> msg(dim);
  for (const auto& feat : features.agents) {
    mlp_forward(arch.msg_agent, agent_params, feat, msg);
    for (int k = 0; k < dim; ++k) aggregate[k] += msg[k];
  }
  for (const auto& feat : features.obstacles) {
    mlp_forward(arch.msg_obstacle, obstacle_params, feat, msg);
    for (int k = 0; k < dim; ++k) aggregate[k] += msg[k];
  }
}

ActionDistribution gnn_forward(const GnnArch& arch, std::span<const double> theta,
                               const LocalView& view, const ParamBounds& bounds) {
  GnnFeatures features = relative_features(view);
  std::vector<double> aggregate(arch.feature_dim());
  gnn_aggregate(arch, theta, features, aggregate);

  std::span<const double> update_params = theta.subspan(
      arch.msg_agent.param_count() + arch.msg_obstacle.param_count(),
      arch.update.param_count());

  ActionDistribution dist;
  dist.bounds = bounds;
  mlp_forward(arch.update, update_params, aggregate,
              std::span<double>(dist.mean.data(), kActionDim));
  for (int k = 0; k < kActionDim; ++k)
    dist.log_std[k] = theta[arch.log_std_offset() + k];
  return dist;
}

CbfParams squash(const std::array<double, kActionDim>& raw,
                 const ParamBounds& bounds) {
  auto one = [&bounds](double x, int k) {
    const Interval& iv = interval_for(bounds, k);
    return iv.lo + (iv.hi - iv.lo) * logistic(x);
  };
  CbfParams p;
  p.zeta_agent = one(raw[0], 0);
  p.eta_agent = one(raw[1], 1);
  p.zeta_obstacle = one(raw[2], 2);
  p.eta_obstacle = one(raw[3], 3);
  return p;
}

double action_log_prob(const ActionDistribution& dist,
                       const std::array<double, kActionDim>& raw) {
  double lp = 0.0;
  for (int k = 0; k < kActionDim; ++k) {
    const double sigma = std::exp(dist.log_std[k]);
    const double z = (raw[k] - dist.mean[k]) / sigma;
    lp += -dist.log_std[k] - 0.5 * z * z - 0.5 * std::log(kTwoPi);
    const Interval& iv = interval_for(dist.bounds, k);
    const double s = logistic(raw[k]);
    lp -= std::log((iv.hi - iv.lo) * s * (1.0 - s));  // squash Jacobian
  }
  return lp;
}

SampledAction sample_action(const ActionDistribution& dist, Rng& rng) {
  SampledAction action;
  for (int k = 0; k < kActionDim; ++k) {
    const double eps = rng.normal();
    action.raw[k] = dist.mean[k] + std::exp(dist.log_std[k]) * eps;
  }
  action.params = squash(action.raw, dist.bounds);
  action.log_prob = action_log_prob(dist, action.raw);
  return action;
}

std::vector<double> init_policy_params(const GnnArch& arch, Rng& rng,
                                       double init_std) {
  std::vector<double> theta(arch.param_count(), 0.0);
  std::size_t offset = 0;
  for (const MlpSpec* spec : {&arch.msg_agent, &arch.msg_obstacle, &arch.update}) {
    for (std::size_t l = 0; l + 1 < spec->widths.size(); ++l) {
      const int in = spec->widths[l];
      const int out = spec->widths[l + 1];
      const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      for (int k = 0; k < out * in; ++k)
        theta[offset + k] = rng.uniform(-limit, limit);
      offset += static_cast<std::size_t>(out) * in + out;  // biases stay zero
    }
  }
  for (int k = 0; k < kActionDim; ++k)
    theta[arch.log_std_offset() + k] = std::log(init_std);
  return theta;
}

CbfParams RandomPolicy::act(const LocalView& view, int t,
                            std::uint64_t episode_seed) const {
  Rng rng(Rng::derive(episode_seed,
                      {0x9a4dULL, static_cast<std::uint64_t>(view.self_id),
                       static_cast<std::uint64_t>(t / period_)}));
  CbfParams p;
  p.zeta_agent = rng.uniform(bounds_.zeta.lo, bounds_.zeta.hi);
  p.eta_agent = rng.uniform(bounds_.eta.lo, bounds_.eta.hi);
  p.zeta_obstacle = rng.uniform(bounds_.zeta.lo, bounds_.zeta.hi);
  p.eta_obstacle = rng.uniform(bounds_.eta.lo, bounds_.eta.hi);
  return p;
}

GnnPolicy::GnnPolicy(const GnnArch& arch, std::vector<double> theta,
                     const ParamBounds& bounds)
    : arch_(arch), theta_(std::move(theta)), bounds_(bounds) {
  if (static_cast<int>(theta_.size()) != arch_.param_count())
    throw ContractViolation("policy parameter count mismatch");
}

CbfParams GnnPolicy::act(const LocalView& view, int, std::uint64_t) const {
  ActionDistribution dist = gnn_forward(arch_, theta_, view, bounds_);
  return squash(dist.mean, bounds_);
}

}  // namespace cbfnav
