#include "ibnet/dropout.hpp"

#include "ibnet/error.hpp"

namespace ibnet {

DropoutMask sample_mask(double keep_prob, std::mt19937_64& rng, std::size_t arity) {
  if (!(keep_prob >= 0.0 && keep_prob <= 1.0)) throw ContractError("keep probability must lie in [0,1]");
  DropoutMask mask{std::vector<std::uint8_t>(arity, keep_prob > 0.0 ? 1 : 0), keep_prob};
  if (keep_prob == 0.0 || keep_prob == 1.0) return mask;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& r : mask.values) r = u(rng) < keep_prob ? 1 : 0;
  return mask;
}

std::vector<double> dropout_forward(const ModelKind& kind, std::span<const double> weights, double bias,
                                    std::span<const double> inputs, const NeuronParams& params,
                                    const DropoutMask& mask, int gate) {
  auto y = forward(kind, weights, bias, inputs, params);
  if (gate == 0) return y;
  if (mask.values.size() != y.size()) throw ContractError("dropout mask arity mismatch");
  for (std::size_t r = 0; r < y.size(); ++r) y[r] *= mask.values[r];
  return y;
}

CorrectionFactor dropout_correction(const ModelKind& kind, std::span<const double> outputs,
                                    std::optional<std::span<const double>> references,
                                    std::span<const double> incoming, const DropoutMask& mask,
                                    DerivativeMode mode) {
  return correction_factor(kind, outputs, references, incoming, mode, mask.values);
}

std::vector<double> dropout_conv_update(const ModelKind& kind, std::span<const double> weights,
                                        std::span<const double> inputs, const DropoutMask& mask,
                                        std::span<const double> errors, int gate, const NeuronParams& params) {
  if (kind.tag != ModelTag::Convolutional) throw ContractError("dropout_conv_update needs a convolutional unit");
  const std::size_t m = kind.conv_outputs;
  if (errors.size() != m || mask.values.size() != m || inputs.size() != kind.conv_kernel * m) {
    throw ContractError("convolutional dropout update arity mismatch");
  }
  std::vector<double> w(weights.begin(), weights.end());
  if (gate == 0) return w;
  for (std::size_t k = 0; k < kind.conv_kernel; ++k) {
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double e = kind.has_reference ? errors[r] : errors[r] * mask.values[r];
      acc += inputs[k * m + r] * e;
    }
    w[k] -= params.mu * acc;
  }
  return w;
}

}  // namespace ibnet
