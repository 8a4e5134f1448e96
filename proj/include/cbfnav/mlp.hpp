#pragma once

#include <span>
#include <vector>

namespace cbfnav {

// Fully connected net, tanh hidden activations, linear output. Parameters are
// a flat vector: per layer, the weight matrix row-major [out][in] followed by
// the bias [out].
struct MlpSpec {
  std::vector<int> widths;  // [in, hidden..., out]

  int param_count() const;
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
};

void mlp_forward(const MlpSpec& spec, std::span<const double> params,
                 std::span<const double> input, std::span<double> output);

// Exact reverse-mode differentiation of upstream . output. Accumulates into
// param_grads (callers zero it once per batch); input_grad is overwritten.
void mlp_backward(const MlpSpec& spec, std::span<const double> params,
                  std::span<const double> input, std::span<const double> upstream,
                  std::span<double> param_grads, std::span<double> input_grad);

}  // namespace cbfnav
