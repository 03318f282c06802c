#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ibnet/network.hpp"

namespace ibnet {

// Index helpers for window arithmetic (x, y >= 1).
// theta: y if y | x, else x mod y.
// lambda_plus: x / y if y | x, else floor(x / y) + 1.
// lambda_minus: x / y - 1 if y | x, else floor(x / y).
std::uint32_t theta(std::uint32_t x, std::uint32_t y);
std::uint32_t lambda_plus(std::uint32_t x, std::uint32_t y);
std::uint32_t lambda_minus(std::uint32_t x, std::uint32_t y);

// Single conv + pool stage over an l x w x h image, unit stride.
struct ConvGeometry {
  std::uint32_t l = 0, w = 0, h = 1;
  std::uint32_t f = 1;   // conv window side
  std::uint32_t g = 1;   // pool window side
  std::uint32_t n1 = 1;  // conv neurons
  std::uint32_t m3 = 1;  // output group size

  std::uint32_t l1() const { return l - f + 1; }
  std::uint32_t w1() const { return w - f + 1; }
  std::uint32_t m1() const { return l1() * w1(); }
  std::uint32_t l2() const { return l1() / g; }
  std::uint32_t w2() const { return w1() / g; }
  std::uint32_t m2() const { return l2() * w2(); }
  std::uint32_t kernel() const { return f * f * h; }
  // f <= l, f <= w, g | l1, g | w1, all sizes positive.
  bool valid() const;
};

// Image flattening: pixel (a, b, c), 1-based along l, w, h, is external
// input a + l (b - 1) + l w (c - 1).
std::uint32_t pixel_index(const ConvGeometry& geo, std::uint32_t a, std::uint32_t b, std::uint32_t c);

// Printed reproduces the published wiring expressions verbatim. They agree
// with the window enumeration only for h = 1 (conv) and l = w (pool);
// Corrected agrees everywhere.
enum class IndexFormula : std::uint8_t { Corrected, Printed };

// External input read by kernel cell alpha (1..f^2 h) at window position
// beta (1..m1). Cells run along l fastest, then w, then colour slice;
// positions run along w fastest. Throws IndexError out of range.
std::uint32_t conv_input_index(const ConvGeometry& geo, std::uint32_t alpha, std::uint32_t beta,
                               IndexFormula formula = IndexFormula::Corrected);

// Layer-2 unit read by pooling cell kk (1..g^2) of pool unit beta (1..m2)
// in channel alpha (1..n1). Pool units run down l fastest; cells run along
// w fastest. Throws IndexError out of range.
std::uint32_t pool_input_index(const ConvGeometry& geo, std::uint32_t alpha, std::uint32_t beta, std::uint32_t kk,
                               IndexFormula formula = IndexFormula::Corrected);

struct LstmitOptions {
  std::uint32_t max_m = 32;
  // Layer 1 with adjustable links: half of its external links start
  // disabled, recurrent links may not be pruned, no deep or recurrent
  // link creation.
  bool adjustable = false;
};

// Nine-layer LSTM with stacks. Gates and layer-1 units read every
// external input and the previous outputs of layer 9.
LayerPlan build_lstmit(std::uint32_t n, std::uint32_t m, const NeuronParams& params, const LstmitOptions& options = {});

struct RbfOptions {
  // Output unit with adjustable links, initially wired to the first
  // ceil(m / 2) Gaussian units.
  bool adjustable = false;
  // Initial interval of the Euclidean centres.
  std::pair<double, double> centre_range{-1.0, 1.0};
};

// Euclidean distance -> Gaussian -> single Linear unit with reference.
LayerPlan build_rbfit(std::uint32_t n, std::uint32_t m, const NeuronParams& params, const RbfOptions& options = {});

// Recurrent RBF for one-step series prediction: summation blocks adding
// X_1 to the previous network output, distances, Gaussians and a Tanh
// output unit with reference. Adjustable variant wires the output to one
// Gaussian unit initially.
LayerPlan build_rrbf_chaotic(std::uint32_t m, std::uint32_t max_m, const NeuronParams& params,
                             const RbfOptions& options = {});

struct ConvitOptions {
  IndexFormula formula = IndexFormula::Corrected;
  // Output layer with adjustable links, initially wired to the first half
  // (rounded up) of the pooling units.
  bool adjustable = false;
};

// Conv -> ReLU -> pool -> Sigmoid with references. Throws BuildError when
// the geometry is invalid.
LayerPlan build_convit(const ConvGeometry& geo, const NeuronParams& params, const ConvitOptions& options = {});

struct PercitOptions {
  // Fraction of non-blank initial slots in adjustable layers.
  double initial_density = 0.25;
  // Weight initialisation interval; defaults to +-10 omega_min.
  std::optional<std::pair<double, double>> init_range;
};

// Multilayer perceptron: layer 1 fully wired to the external inputs, the
// remaining layers adjustable with a sparse random initial wiring to the
// previous layer; the last layer carries references. layer_sizes holds at
// least three entries.
LayerPlan build_percit(std::uint32_t input_count, std::span<const std::uint32_t> layer_sizes,
                       const NeuronParams& params, std::uint64_t seed, const PercitOptions& options = {});

}  // namespace ibnet
