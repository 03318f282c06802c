#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace ibnet {

// (layer, unit, output) descriptor of where a neuron input reads from.
// All three components are 1-based; zero is the "nothing" sentinel.
struct ConnectionTriple {
  std::uint32_t layer = 0;
  std::uint32_t unit = 0;
  std::uint32_t output = 0;

  constexpr bool empty() const noexcept { return layer == 0 && unit == 0 && output == 0; }
  constexpr bool external() const noexcept { return layer == 0 && unit == 0 && output != 0; }

  friend constexpr auto operator<=>(const ConnectionTriple&, const ConnectionTriple&) = default;
};

constexpr ConnectionTriple kDisconnected{};
constexpr ConnectionTriple external_input(std::uint32_t index) { return {0, 0, index}; }

enum class LinkMode : std::uint8_t {
  Disconnected,  // (0,0,0): input reads 0
  External,      // (0,0,m): input reads X_m(t)
  Ordinary,      // l < own layer: reads y(t)
  Recurrent,     // l >= own layer: reads y(t-1)
};

// Classifies a triple relative to the layer of the neuron that owns it.
// Throws TopologyError for triples that fit none of the four modes, e.g.
// (0,3,1) or (2,0,1).
LinkMode classify(const ConnectionTriple& c, std::uint32_t own_layer);

std::string to_string(const ConnectionTriple& c);

// Training gate: 1 iff a > 0.
constexpr int training_gate(double a) noexcept { return a > 0.0 ? 1 : 0; }

// Per-neuron parameter block. Not every field is used by every model kind;
// beta only matters for Gaussian blocks, max_m only for recurrent units,
// the plasticity fields only for adjustable units.
struct NeuronParams {
  double omega_max = 5.0;
  double omega_min = 0.01;
  std::uint32_t t_xi = 8;     // local-minimum window length (steps)
  double mu = 0.05;           // training rate
  double alpha = 1.0;         // sigmoid / softplus stiffness, >= 1
  double beta = 1.0;          // Gaussian width
  std::uint32_t max_m = 32;   // stack depth
  double x_max = 1.0;
  std::uint32_t t_o = 4;      // deletion window length (steps)
  double p_deep1 = 0.1;
  double p_rec = 0.0;
  double dropout_keep = 1.0;

  friend bool operator==(const NeuronParams&, const NeuronParams&) = default;
};

// Throws ContractError when a field is outside its documented range.
void validate(const NeuronParams& p);

}  // namespace ibnet
