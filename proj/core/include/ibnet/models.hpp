#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ibnet/core.hpp"

namespace ibnet {

enum class ModelTag : std::uint8_t {
  Sigmoid,            // y = 1 / (1 + exp(-2 alpha z)), z = sum w x + b
  Tanh,               // y = tanh(z)
  Linear,             // y = z
  EuclideanDistance,  // y = sqrt(sum (w - x)^2)
  Convolutional,      // y_r = sum_k w_k x_{k r}
  ReLuBlock,          // y = max(0, x)
  PoolBlock,          // y = max(x_1 .. x_n)
  GaussBlock,         // y = exp(-beta x^2)
  MulBlock,           // y = x1 x2
  SumBlock,           // y = x1 + x2
  TanhBlock,          // y = tanh(x)
};

std::string_view to_string(ModelTag tag);
std::optional<ModelTag> parse_model_tag(std::string_view name);

struct ModelKind {
  ModelTag tag = ModelTag::Linear;
  bool has_reference = false;
  // Convolutional only: kernel length n and output count m. The unit then
  // owns n*m input slots bound as slot (k1-1)*m + k2 -> x_{k1 k2}.
  std::uint32_t conv_kernel = 0;
  std::uint32_t conv_outputs = 0;

  static constexpr ModelKind of(ModelTag tag, bool reference = false) { return {tag, reference, 0, 0}; }
  static constexpr ModelKind conv(std::uint32_t kernel, std::uint32_t outputs, bool reference = false) {
    return {ModelTag::Convolutional, reference, kernel, outputs};
  }

  friend bool operator==(const ModelKind&, const ModelKind&) = default;
};

// Blocks carry no weights and no bias.
bool is_block(ModelTag tag);
// Weighted-sum kinds: Sigmoid, Tanh, Linear. Only these have a bias and
// only these may carry adjustable connections.
bool is_weighted_sum(ModelTag tag);

std::size_t output_arity(const ModelKind& kind);
std::size_t weight_count(const ModelKind& kind, std::size_t slots);
// Throws ModelError if `slots` input slots are not valid for the kind.
void check_arity(const ModelKind& kind, std::size_t slots);

// Derivative conventions. Corrected (default) makes every backpropagation
// coefficient the exact partial derivative of the implemented forward pass.
// Printed evaluates the textbook expressions verbatim: the Gaussian
// square-root derivative, the smooth ReLU derivative paired with a hard
// max forward, the scalar-delta convolution coefficients and the
// Euclidean coefficient without the sign/scale fix.
enum class DerivativeMode : std::uint8_t { Corrected, Printed };

// Per-neuron values a learning rule needs. `outputs` are the activation
// values before any dropout mask.
struct NeuronSignals {
  std::span<const double> weights;
  double bias = 0.0;
  std::span<const double> inputs;
  std::span<const double> outputs;
};

// General correction factor. `value` is the scalar delta; `per_output`
// is the error attributed to each output (one entry for scalar kinds).
struct CorrectionFactor {
  double value = 0.0;
  std::vector<double> per_output;
};

struct WeightUpdate {
  std::vector<double> weights;
  double bias = 0.0;
};

struct BackpropCoeffs {
  std::vector<double> values;
  // Set when a Euclidean unit sits at y ~ 0 and its coefficients were
  // zeroed instead of dividing by y.
  bool degenerate = false;
};

inline constexpr double kEuclideanSingularity = 1e-12;

// Activation values for the given inputs. Throws ModelError on arity
// mismatch.
std::vector<double> forward(const ModelKind& kind, std::span<const double> weights, double bias,
                            std::span<const double> inputs, const NeuronParams& params);
void forward_into(const ModelKind& kind, std::span<const double> weights, double bias,
                  std::span<const double> inputs, const NeuronParams& params, std::span<double> out);

// Scalar activation of a weighted-sum kind applied to a pre-activation z.
double activate(ModelTag tag, double z, const NeuronParams& params);

// references: one entry per output when kind.has_reference; ignored
// otherwise. incoming: summed downstream coefficients per output.
// mask: optional dropout mask per output, applied to the non-reference
// branch only.
CorrectionFactor correction_factor(const ModelKind& kind, std::span<const double> outputs,
                                   std::optional<std::span<const double>> references,
                                   std::span<const double> incoming,
                                   DerivativeMode mode = DerivativeMode::Corrected,
                                   std::span<const std::uint8_t> mask = {});

BackpropCoeffs backprop_coeffs(const ModelKind& kind, const NeuronSignals& s,
                               const CorrectionFactor& delta, int gate, const NeuronParams& params,
                               DerivativeMode mode = DerivativeMode::Corrected);

// Signed weight and bias changes of one gated step; update_weights adds
// them to the current values.
WeightUpdate weight_increments(const ModelKind& kind, const NeuronSignals& s, const CorrectionFactor& delta,
                               int gate, const NeuronParams& params);

WeightUpdate update_weights(const ModelKind& kind, const NeuronSignals& s,
                            const CorrectionFactor& delta, int gate, const NeuronParams& params,
                            DerivativeMode mode = DerivativeMode::Corrected);

// Paralysis: 1 iff sum |w_k| > 0.7 * omega_max * n. Weightless units never
// report paralysis.
int detect_paralysis(std::span<const double> weights, const NeuronParams& params);

// Local minimum over the last t_xi entries of the per-weight change history:
// 1 iff sum_k |sum_tau dw_k(tau)| < omega_min * n * prod_tau gate(tau).
// Fewer than t_xi entries yields 0.
int detect_local_min(std::span<const std::vector<double>> weight_deltas, std::span<const int> gates,
                     const NeuronParams& params);

}  // namespace ibnet
