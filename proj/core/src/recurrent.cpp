#include "ibnet/recurrent.hpp"

#include <algorithm>

#include "ibnet/error.hpp"

namespace ibnet {

void StackMemory::push(double value) {
  if (cells_.empty()) return;
  std::copy_backward(cells_.begin(), cells_.end() - 1, cells_.end());
  cells_[0] = value;
}

void StackMemory::pop() {
  if (cells_.empty()) return;
  std::copy(cells_.begin() + 1, cells_.end(), cells_.begin());
  cells_.back() = 0.0;
}

void StackMemory::reset() { std::fill(cells_.begin(), cells_.end(), 0.0); }

bool StackMemory::zero() const noexcept {
  return std::all_of(cells_.begin(), cells_.end(), [](double v) { return v == 0.0; });
}

StackMemory StackMemory::from_cells(std::vector<double> cells) {
  StackMemory s;
  s.cells_ = std::move(cells);
  return s;
}

StackMemory stack_step(StackMemory stack, int gate, double incoming) {
  if (gate == 0) {
    stack.push(incoming);
  } else {
    stack.pop();
  }
  return stack;
}

std::vector<double> effective_inputs(std::span<const double> live, std::span<const std::uint8_t> bound,
                                     std::span<const StackMemory> stacks, int gate) {
  std::vector<double> x(live.begin(), live.end());
  if (gate == 0) return x;
  if (bound.size() != live.size() || stacks.size() != live.size()) {
    throw ContractError("stack bindings must cover every input slot");
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (bound[k]) x[k] = stacks[k].head();
  }
  return x;
}

std::vector<double> recurrent_forward(const ModelKind& kind, std::span<const double> weights, double bias,
                                      std::span<const double> live, std::span<const std::uint8_t> bound,
                                      std::span<const StackMemory> stacks, int gate,
                                      const NeuronParams& params) {
  const auto x = effective_inputs(live, bound, stacks, gate);
  return forward(kind, weights, bias, x, params);
}

WeightUpdate recurrent_update_weights(const ModelKind& kind, const NeuronSignals& s,
                                      std::span<const std::uint8_t> bound, std::span<const StackMemory> stacks,
                                      const CorrectionFactor& delta, int gate, const NeuronParams& params,
                                      DerivativeMode mode) {
  const auto x = effective_inputs(s.inputs, bound, stacks, gate);
  NeuronSignals eff = s;
  eff.inputs = x;
  return update_weights(kind, eff, delta, gate, params, mode);
}

}  // namespace ibnet
