#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ibnet/models.hpp"

namespace ibnet {

// Fixed-depth LIFO shift register with cells 0..depth. Writing shifts every
// cell up and stores the new value in cell 0 (the value in cell `depth`
// falls off); reading shifts every cell down and zero-fills cell `depth`.
class StackMemory {
 public:
  StackMemory() = default;
  explicit StackMemory(std::uint32_t depth) : cells_(std::size_t{depth} + 1, 0.0) {}

  std::uint32_t depth() const noexcept {
    return cells_.empty() ? 0 : static_cast<std::uint32_t>(cells_.size() - 1);
  }
  double head() const noexcept { return cells_.empty() ? 0.0 : cells_[0]; }
  std::span<const double> cells() const noexcept { return cells_; }

  void push(double value);
  void pop();
  void reset();
  bool zero() const noexcept;

  static StackMemory from_cells(std::vector<double> cells);

  friend bool operator==(const StackMemory&, const StackMemory&) = default;

 private:
  std::vector<double> cells_;
};

// gate 0 writes `incoming`, gate 1 reads (pops).
StackMemory stack_step(StackMemory stack, int gate, double incoming);

// Inputs actually seen by a recurrent unit: with the gate on, every
// stack-bound slot is replaced by the head of its stack.
std::vector<double> effective_inputs(std::span<const double> live, std::span<const std::uint8_t> stack_bound,
                                     std::span<const StackMemory> stacks, int gate);

std::vector<double> recurrent_forward(const ModelKind& kind, std::span<const double> weights, double bias,
                                      std::span<const double> live_inputs,
                                      std::span<const std::uint8_t> stack_bound,
                                      std::span<const StackMemory> stacks, int gate, const NeuronParams& params);

// Weight step of a recurrent unit. `s.inputs` are the live inputs; stack
// heads substitute for bound slots when the gate is on.
WeightUpdate recurrent_update_weights(const ModelKind& kind, const NeuronSignals& s,
                                      std::span<const std::uint8_t> stack_bound,
                                      std::span<const StackMemory> stacks, const CorrectionFactor& delta,
                                      int gate, const NeuronParams& params,
                                      DerivativeMode mode = DerivativeMode::Corrected);

}  // namespace ibnet
