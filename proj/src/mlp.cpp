#include "cbfnav/mlp.hpp"

#include <cmath>

#include "cbfnav/types.hpp"

namespace cbfnav {

int MlpSpec::param_count() const {
  int count = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    count += (widths[l] + 1) * widths[l + 1];
  return count;
}

namespace {

void check_sizes(const MlpSpec& spec, std::span<const double> params,
                 std::span<const double> input) {
  if (spec.widths.size() < 2) throw ContractViolation("mlp needs >= 2 widths");
  if (static_cast<int>(params.size()) != spec.param_count())
    throw ContractViolation("mlp parameter count mismatch");
  if (static_cast<int>(input.size()) != spec.input_dim())
    throw ContractViolation("mlp input size mismatch");
}

}  // namespace

void mlp_forward(const MlpSpec& spec, std::span<const double> params,
                 std::span<const double> input, std::span<double> output) {
  check_sizes(spec, params, input);
  if (static_cast<int>(output.size()) != spec.output_dim())
    throw ContractViolation("mlp output size mismatch");

  std::vector<double> a(input.begin(), input.end());
  std::vector<double> z;
  std::size_t offset = 0;
  const std::size_t layers = spec.widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.widths[l];
    const int out = spec.widths[l + 1];
    z.assign(out, 0.0);
    for (int r = 0; r < out; ++r) {
      double acc = params[offset + static_cast<std::size_t>(out) * in + r];  // bias
      const double* w = params.data() + offset + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) acc += w[c] * a[c];
      z[r] = acc;
    }
    offset += static_cast<std::size_t>(out) * in + out;
    if (l + 1 < layers) {
      for (double& v : z) v = std::tanh(v);
    }
    a = z;
  }
  for (int r = 0; r < spec.output_dim(); ++r) output[r] = a[r];
}

void mlp_backward(const MlpSpec& spec, std::span<const double> params,
                  std::span<const double> input, std::span<const double> upstream,
                  std::span<double> param_grads, std::span<double> input_grad) {
  check_sizes(spec, params, input);
  if (static_cast<int>(upstream.size()) != spec.output_dim())
    throw ContractViolation("mlp upstream size mismatch");
  if (param_grads.size() != params.size())
    throw ContractViolation("mlp param grad size mismatch");
  if (static_cast<int>(input_grad.size()) != spec.input_dim())
    throw ContractViolation("mlp input grad size mismatch");

  const std::size_t layers = spec.widths.size() - 1;

  // Forward pass keeping every activation; acts[l] feeds layer l.
  std::vector<std::vector<double>> acts(layers + 1);
  acts[0].assign(input.begin(), input.end());
  std::vector<std::size_t> offsets(layers);
  {
    std::size_t offset = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      offsets[l] = offset;
      const int in = spec.widths[l];
      const int out = spec.widths[l + 1];
      acts[l + 1].assign(out, 0.0);
      for (int r = 0; r < out; ++r) {
        double acc = params[offset + static_cast<std::size_t>(out) * in + r];
        const double* w = params.data() + offset + static_cast<std::size_t>(r) * in;
        for (int c = 0; c < in; ++c) acc += w[c] * acts[l][c];
        acts[l + 1][r] = (l + 1 < layers) ? std::tanh(acc) : acc;
      }
      offset += static_cast<std::size_t>(out) * in + out;
    }
  }

  // Reverse pass: dz is the gradient at each layer's pre-activation.
  std::vector<double> dz(upstream.begin(), upstream.end());
  for (std::size_t li = layers; li-- > 0;) {
    const int in = spec.widths[li];
    const int out = spec.widths[li + 1];
    const std::size_t offset = offsets[li];
    if (li + 1 < layers) {  // undo tanh: acts[li+1] already holds tanh(z)
      for (int r = 0; r < out; ++r) dz[r] *= 1.0 - acts[li + 1][r] * acts[li + 1][r];
    }
    double* wg = param_grads.data() + offset;
    double* bg = param_grads.data() + offset + static_cast<std::size_t>(out) * in;
    const double* w = params.data() + offset;
    std::vector<double> da(in, 0.0);
    for (int r = 0; r < out; ++r) {
      const double g = dz[r];
      bg[r] += g;
      const double* wr = w + static_cast<std::size_t>(r) * in;
      double* wgr = wg + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) {
        wgr[c] += g * acts[li][c];
        da[c] += g * wr[c];
      }
    }
    dz = da;
  }
  for (int c = 0; c < spec.input_dim(); ++c) input_grad[c] = dz[c];
}

}  // namespace cbfnav
