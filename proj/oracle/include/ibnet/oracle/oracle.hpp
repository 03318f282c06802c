#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ibnet/architectures.hpp"
#include "ibnet/network.hpp"

// Verification machinery that shares no evaluation code with the engine:
// networks are read as plain data (connections, kinds, weights) and
// re-evaluated with the oracle's own activation functions.
namespace ibnet::oracle {

// Trainable parameter of unit (layer, unit). index < weight count names a
// weight; index == weight count names the bias of a weighted-sum unit.
// Canonical order: layers ascending, units ascending, weights then bias.
struct ParamId {
  std::uint32_t layer = 0;
  std::uint32_t unit = 0;
  std::uint32_t index = 0;
  bool bias = false;

  friend bool operator==(const ParamId&, const ParamId&) = default;
};

std::vector<ParamId> parameter_ids(const Network& net);

// One time step of data.
struct Frame {
  std::vector<double> external;
  std::vector<double> references;
};

// Half squared error summed over every reference output and every frame,
// evaluated from zero initial activity. Recurrent reads see the previous
// frame's outputs.
double sequence_loss(const Network& net, std::span<const Frame> frames);
// Same with parameters replaced by `params` (canonical order).
double sequence_loss(const Network& net, std::span<const Frame> frames, std::span<const double> params);

// Per-step outputs of every unit, [frame][layer][unit][output].
std::vector<ValueTable> sequence_trace(const Network& net, std::span<const Frame> frames);

// Central differences of sequence_loss (long double evaluation).
std::vector<double> finite_diff_grad(const Network& net, std::span<const Frame> frames, double h);
std::vector<double> finite_diff_grad(const Network& net, std::span<const double> external,
                                     std::span<const double> references, double h);

// Reverse-mode gradient of sequence_loss through the explicitly unrolled
// m-step graph.
std::vector<double> unrolled_bptt_grad(const Network& net, std::span<const Frame> frames);

struct GradientEntry {
  ParamId id;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradientReport {
  std::vector<GradientEntry> entries;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

// |a - b| / max(|a|, |b|, 1e-12).
double relative_error(double a, double b);

GradientReport compare_gradients(std::span<const ParamId> ids, std::span<const double> analytic,
                                 std::span<const double> numeric, double tolerance);

// Fixed-width text table of a report; at most `max_rows` entries, worst first.
std::string format_report(const GradientReport& report, std::size_t max_rows = 20);

// Classical LSTM without peepholes. Gate activation is
// 1 / (1 + exp(-2 alpha z)); candidate and output squashing are tanh.
struct LstmWeights {
  std::uint32_t n = 0, m = 0;
  double alpha = 1.0;
  // Per gate: [unit][n inputs then m recurrent], and bias[unit].
  // Gates: 0 candidate, 1 input, 2 forget, 3 output.
  std::vector<std::vector<double>> w[4];
  std::vector<double> b[4];
};

// Reads the gate weights out of a network built by build_lstmit.
LstmWeights lstm_weights(const Network& net);

// Outputs h(t) for each input vector, from zero initial state.
std::vector<std::vector<double>> reference_lstm_forward(const LstmWeights& weights,
                                                        std::span<const std::vector<double>> inputs);

// Literal window enumeration for one conv + pool stage.
struct ConvWiring {
  // conv[(alpha - 1) m1 + beta - 1] = external input index.
  std::vector<std::uint32_t> conv;
  // pool[(a - 1) m2 + b - 1][kk - 1] = layer-2 unit index.
  std::vector<std::vector<std::uint32_t>> pool;
};

ConvWiring brute_force_conv_wiring(const ConvGeometry& geo);

// Number of slots where a CONVIT plan disagrees with the enumeration.
std::size_t count_wiring_mismatches(const LayerPlan& plan, const ConvWiring& wiring);

}  // namespace ibnet::oracle
