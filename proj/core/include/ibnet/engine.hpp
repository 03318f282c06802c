#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ibnet/network.hpp"
#include "ibnet/plasticity.hpp"

namespace ibnet {

// Everything phase A derives for one unit from the time-t snapshot.
struct UnitStep {
  std::vector<double> live_inputs;  // resolved reads; pushed onto stacks when the gate is off
  std::vector<double> inputs;       // effective inputs (stack heads substituted)
  std::vector<double> activation;   // unmasked outputs
  std::vector<double> references;   // live reference values
  std::vector<std::uint8_t> mask;
  double delta = 0.0;
  std::vector<double> weight_increments;
  double bias_increment = 0.0;
  std::vector<double> deletion_terms;
  int paralysis = 0;
  bool degenerate = false;
  std::optional<LinkCandidate> creation;
  PlasticityTrigger trigger = PlasticityTrigger::Saturation;
};

// The complete t -> t+1 transition, computed without touching the network.
struct PendingStep {
  std::uint64_t step = 0;
  double control = 0.0;
  int gate = 0;
  ValueTable outputs;
  ValueTable coeffs;
  std::vector<std::vector<UnitStep>> units;
  std::mt19937_64 rng;
  double squared_error = 0.0;
  std::size_t reference_outputs = 0;
};

struct StepReport {
  std::uint64_t step = 0;  // index of the step just taken
  double mse = 0.0;        // mean squared residual over reference outputs
  int xi = 0;
  int p = 0;
  std::size_t link_count = 0;
  std::size_t degenerate = 0;
  std::vector<PlasticityEvent> events;
};

// Phase A. Reads `net` only. Throws StepError on arity mismatch.
PendingStep compute_step(const Network& net, std::span<const double> external, std::span<const double> references,
                         double control);
// Phase B. Applies a pending step computed from the current state of `net`.
StepReport commit_step(Network& net, PendingStep pending);
StepReport step(Network& net, std::span<const double> external, std::span<const double> references, double control);

struct GlobalFlags {
  int xi = 0;
  int p = 0;
  friend bool operator==(const GlobalFlags&, const GlobalFlags&) = default;
};
// OR over the per-unit local-minimum and paralysis flags.
GlobalFlags global_flags(const Network& net);

// "step mse xi p link_count"
std::string format_metrics(const StepReport& r);

struct Sample {
  std::vector<double> external;
  std::vector<double> references;
};

struct EpisodeOptions {
  // Zero outputs, coefficients and stacks before the fill phase.
  bool reset_state = true;
};

struct EpisodeReport {
  std::size_t steps = 0;
  double fill_mse = 0.0;  // mean of the fill-phase step errors
  // Summed per-step increments, [layer][unit][weight] and [layer][unit].
  std::vector<std::vector<std::vector<double>>> weight_changes;
  std::vector<std::vector<double>> bias_changes;
  std::vector<PlasticityEvent> events;
};

// Fill phase: m steps with the gate off feeding the samples. Drain phase:
// m steps with the gate on and zero external and reference inputs, so the
// stacks replay the fill phase backwards. Throws CapacityError when m
// exceeds the stack depth of any recurrent unit.
EpisodeReport run_training_episode(Network& net, std::span<const Sample> samples, const EpisodeOptions& options = {});

// Update direction of one gated step, divided by -mu of each unit. Order:
// layers, units, weights, then the bias of weighted-sum units.
std::vector<double> integrated_gradient(const Network& net, std::span<const double> external,
                                        std::span<const double> references);
// Cumulative episode changes divided by -mu, in the same order.
std::vector<double> episode_gradient(const Network& net, const EpisodeReport& report);

struct HierarchyLink {
  std::size_t controller = 0;
  std::size_t controlled = 0;
  ConnectionTriple gate_source;  // output of the controller that gates training
  double threshold = 0.5;
};

struct NetworkInput {
  std::vector<double> external;
  std::vector<double> references;
  double control = 0.0;  // used only by networks without a controller
};

// Steps a set of networks where some gate the training of others.
class CompositeStepper {
 public:
  CompositeStepper(std::vector<Network> nets, std::vector<HierarchyLink> links);

  // One composite step. inputs[i] feeds network i.
  std::vector<StepReport> step(std::span<const NetworkInput> inputs);

  const std::vector<std::size_t>& order() const { return order_; }
  std::size_t size() const { return nets_.size(); }
  Network& net(std::size_t i) { return nets_.at(i); }
  const Network& net(std::size_t i) const { return nets_.at(i); }
  // Control value applied to each network in the last step.
  const std::vector<double>& last_controls() const { return controls_; }

 private:
  std::vector<Network> nets_;
  std::vector<HierarchyLink> links_;
  std::vector<std::optional<std::size_t>> controller_of_;  // link index per network
  std::vector<std::size_t> order_;
  std::vector<double> controls_;
};

// Validates the link graph (indices, gate sources, single controller per
// network, no cycles) and returns the stepper. Throws CompositionError.
CompositeStepper compose_hierarchy(std::vector<Network> nets, std::vector<HierarchyLink> links);

}  // namespace ibnet
