#pragma once

#include <array>
#include <span>
#include <vector>

#include "cbfnav/mlp.hpp"
#include "cbfnav/rng.hpp"
#include "cbfnav/sim.hpp"
#include "cbfnav/types.hpp"

namespace cbfnav {

inline constexpr int kActionDim = 4;  // (zeta_a, eta_a, zeta_o, eta_o)

// Message-passing architecture: per-neighbor message nets whose outputs are
// summed in ascending-id order, then an update net producing the Gaussian
// mean. A state-independent log_std tail completes the distribution. The
// flat parameter layout is [msg_agent | msg_obstacle | update | log_std].
struct GnnArch {
  MlpSpec msg_agent{{4, 64, 64}};    // input (p_j - p_i, v_j - v_i)
  MlpSpec msg_obstacle{{2, 64, 64}}; // input (p_l - p_i)
  MlpSpec update{{64, 64, kActionDim}};

  int feature_dim() const { return update.input_dim(); }
  int param_count() const {
    return msg_agent.param_count() + msg_obstacle.param_count() +
           update.param_count() + kActionDim;
  }
  int log_std_offset() const { return param_count() - kActionDim; }
};

// Relative quantities only; absolute positions never reach the networks,
// which is what makes translation invariance exact.
struct GnnFeatures {
  std::vector<std::array<double, 4>> agents;
  std::vector<std::array<double, 2>> obstacles;
};

GnnFeatures relative_features(const LocalView& view);

// Sum of message-net outputs in canonical order (the feature lists are
// already ascending by id). Empty neighborhoods yield the zero-input sum.
void gnn_aggregate(const GnnArch& arch, std::span<const double> theta,
                   const GnnFeatures& features, std::span<double> aggregate);

struct ActionDistribution {
  std::array<double, kActionDim> mean{};     // pre-squash
  std::array<double, kActionDim> log_std{};
  ParamBounds bounds;
};

ActionDistribution gnn_forward(const GnnArch& arch, std::span<const double> theta,
                               const LocalView& view, const ParamBounds& bounds);

// Elementwise logistic squash lo + (hi - lo) * s(raw); strictly inside the
// bounds. Components 0 and 2 use the zeta interval, 1 and 3 the eta interval.
CbfParams squash(const std::array<double, kActionDim>& raw,
                 const ParamBounds& bounds);

struct SampledAction {
  CbfParams params;
  std::array<double, kActionDim> raw{};  // pre-squash draw
  double log_prob = 0.0;
};

// Draws raw = mean + exp(log_std) * eps with eps iid standard normal (four
// calls to rng.normal() in component order) and squashes. log_prob is the
// density of the squashed sample, i.e. including the Jacobian correction.
SampledAction sample_action(const ActionDistribution& dist, Rng& rng);

// Density of an existing raw draw under a (possibly different) distribution;
// used to recompute PPO likelihood ratios.
double action_log_prob(const ActionDistribution& dist,
                       const std::array<double, kActionDim>& raw);

// Xavier-uniform weights, zero biases, log_std tail at log(init_std).
std::vector<double> init_policy_params(const GnnArch& arch, Rng& rng,
                                       double init_std);

class FixedPolicy : public Policy {
 public:
  explicit FixedPolicy(const CbfParams& params) : params_(params) {}
  CbfParams act(const LocalView&, int, std::uint64_t) const override {
    return params_;
  }

 private:
  CbfParams params_;
};

// Redraws uniform parameters every `period` steps and holds them in between.
// Draws are keyed by (episode_seed, agent id, t / period): hold semantics
// without mutable state.
class RandomPolicy : public Policy {
 public:
  RandomPolicy(const ParamBounds& bounds, int period)
      : bounds_(bounds), period_(period) {}
  CbfParams act(const LocalView& view, int t, std::uint64_t episode_seed) const override;

 private:
  ParamBounds bounds_;
  int period_;
};

// Deterministic evaluation policy: squash of the Gaussian mean.
class GnnPolicy : public Policy {
 public:
  GnnPolicy(const GnnArch& arch, std::vector<double> theta, const ParamBounds& bounds);
  CbfParams act(const LocalView& view, int t, std::uint64_t episode_seed) const override;

  const GnnArch& arch() const { return arch_; }
  const std::vector<double>& theta() const { return theta_; }
  const ParamBounds& bounds() const { return bounds_; }

 private:
  GnnArch arch_;
  std::vector<double> theta_;
  ParamBounds bounds_;
};

}  // namespace cbfnav
