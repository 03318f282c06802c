#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ibnet/models.hpp"

namespace ibnet {

// Bernoulli keep mask over the outputs of one unit. Dropped outputs read 0
// during gated steps; there is no 1/keep rescaling at inference.
struct DropoutMask {
  std::vector<std::uint8_t> values;
  double keep_prob = 1.0;
};

// Independent Bernoulli(keep_prob) draws. keep_prob 1 and 0 consume no
// randomness.
DropoutMask sample_mask(double keep_prob, std::mt19937_64& rng, std::size_t arity);

// gate 0: plain forward. gate 1: outputs multiplied by the mask.
std::vector<double> dropout_forward(const ModelKind& kind, std::span<const double> weights, double bias,
                                    std::span<const double> inputs, const NeuronParams& params,
                                    const DropoutMask& mask, int gate);

// Non-reference branch: incoming error times the mask. Reference branch
// is left untouched.
CorrectionFactor dropout_correction(const ModelKind& kind, std::span<const double> outputs,
                                    std::optional<std::span<const double>> references,
                                    std::span<const double> incoming, const DropoutMask& mask,
                                    DerivativeMode mode = DerivativeMode::Corrected);

// Convolutional weight step with per-output errors masked before the
// sum over outputs. `errors` are residuals (reference units, unmasked) or
// incoming error sums (others).
std::vector<double> dropout_conv_update(const ModelKind& kind, std::span<const double> weights,
                                        std::span<const double> inputs, const DropoutMask& mask,
                                        std::span<const double> errors, int gate, const NeuronParams& params);

}  // namespace ibnet
