#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ibnet/core.hpp"
#include "ibnet/models.hpp"
#include "ibnet/recurrent.hpp"
#include "ibnet/window.hpp"

namespace ibnet {

// What the stack memories of a recurrent unit buffer during the fill
// phase. ExternalOnly stacks only slots bound to external inputs.
// ExternalAndRecurrent also stacks recurrent-mode slots, so the drain
// phase replays the exact forward values of each time step.
enum class ReplayMode : std::uint8_t { ExternalAndRecurrent, ExternalOnly };

struct UnitPlan {
  ModelKind kind;
  std::vector<ConnectionTriple> connections;
  NeuronParams params;
  bool recurrent = false;
  bool adjustable = false;
  // Forbids pruning of recurrent-mode links (LSTMIT adjustable variant).
  bool protect_recurrent_links = false;
  // 1-based indices into the reference vector E, one per output. Non-empty
  // exactly when kind.has_reference.
  std::vector<std::uint32_t> reference_slots;
  // Uniform initialisation interval for weights; defaults to
  // [-10 omega_min, 10 omega_min].
  std::optional<std::pair<double, double>> init_range;
};

struct LayerPlan {
  std::string name;
  std::uint32_t input_count = 0;
  std::uint32_t reference_count = 0;
  std::vector<std::vector<UnitPlan>> layers;
  // Designated network outputs Y.
  std::vector<ConnectionTriple> outputs;

  std::size_t unit_count() const;
};

// Throws TopologyError / ModelError if any triple dangles, an arity is
// wrong or a reference binding is malformed.
void validate(const LayerPlan& plan);

// Per-unit state that persists between steps. Values labelled "last step"
// are those committed by the most recent step.
struct NeuronState {
  ModelKind kind;
  NeuronParams params;
  bool recurrent = false;
  bool adjustable = false;
  bool protect_recurrent_links = false;

  std::vector<ConnectionTriple> connections;
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<std::uint32_t> reference_slots;

  std::vector<double> inputs;  // effective inputs, last step
  double delta = 0.0;          // correction factor, last step
  double training_signal = 0.0;
  int paralysis = 0;
  int local_min = 0;

  std::vector<StackMemory> input_stacks;      // per slot, recurrent units only
  std::vector<StackMemory> reference_stacks;  // per output, recurrent reference units only
  SlidingWindow weight_changes;               // t_xi entries of per-weight changes
  SlidingWindow deletion_terms;               // t_o entries, adjustable units only
  std::vector<std::uint8_t> dropout_mask;     // per output

  bool stack_bound(std::size_t slot, std::uint32_t own_layer, ReplayMode replay) const;

  friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

// [layer][unit][index] table holding one value family (outputs or
// backpropagation coefficients) at a single time step. Indices are 0-based
// here; the triple accessors translate from 1-based.
using ValueTable = std::vector<std::vector<std::vector<double>>>;

struct Consumer {
  std::uint32_t layer;  // 1-based
  std::uint32_t unit;   // 1-based
  std::uint32_t slot;   // 0-based input slot
};

// For every (layer, unit, output) the list of input slots reading it.
class ConsumerIndex {
 public:
  ConsumerIndex() = default;
  explicit ConsumerIndex(const struct Network& net);
  std::span<const Consumer> consumers(std::uint32_t layer, std::uint32_t unit, std::uint32_t output) const;

 private:
  std::vector<std::vector<std::vector<std::vector<Consumer>>>> table_;
};

struct Network {
  std::string name;
  std::uint32_t input_count = 0;
  std::uint32_t reference_count = 0;
  std::vector<ConnectionTriple> output_bindings;
  std::vector<std::vector<NeuronState>> layers;

  ValueTable outputs;  // y, last step
  ValueTable coeffs;   // Delta, last step

  DerivativeMode derivative = DerivativeMode::Corrected;
  ReplayMode replay = ReplayMode::ExternalAndRecurrent;

  std::uint64_t step = 0;
  double control = 0.0;  // a, last step
  int xi = 0;
  int p = 0;
  std::mt19937_64 rng;
  std::uint64_t topology_version = 0;

  static Network from_plan(const LayerPlan& plan, std::uint64_t seed,
                           DerivativeMode derivative = DerivativeMode::Corrected,
                           ReplayMode replay = ReplayMode::ExternalAndRecurrent);

  std::uint32_t layer_count() const { return static_cast<std::uint32_t>(layers.size()); }
  std::uint32_t unit_count(std::uint32_t layer) const {
    return static_cast<std::uint32_t>(layers.at(layer - 1).size());
  }
  NeuronState& unit(std::uint32_t layer, std::uint32_t u) { return layers.at(layer - 1).at(u - 1); }
  const NeuronState& unit(std::uint32_t layer, std::uint32_t u) const { return layers.at(layer - 1).at(u - 1); }

  double output(const ConnectionTriple& c) const { return outputs[c.layer - 1][c.unit - 1][c.output - 1]; }
  bool has_output(const ConnectionTriple& c) const;
  std::vector<double> network_outputs() const;
  std::size_t link_count() const;
  std::size_t neuron_count() const;

  // Zeroes outputs, coefficients, stacks and last-step inputs/deltas.
  // Weights, topology, histories and the rng are untouched.
  void reset_activity();
  // Marks the topology as edited, invalidating the cached consumer index.
  void touch_topology() { ++topology_version; }

  const ConsumerIndex& consumer_index() const;

  // Compares all persistent state (cached indices excluded).
  bool same_state(const Network& other) const;

 private:
  // Copies start with an empty cache: a copy may diverge from its source
  // while sharing a topology_version value.
  struct ConsumerCache {
    std::shared_ptr<const ConsumerIndex> index;
    std::uint64_t version = 0;

    ConsumerCache() = default;
    ConsumerCache(const ConsumerCache&) {}
    ConsumerCache& operator=(const ConsumerCache&) {
      index.reset();
      return *this;
    }
    ConsumerCache(ConsumerCache&&) noexcept = default;
    ConsumerCache& operator=(ConsumerCache&&) noexcept = default;
  };
  mutable ConsumerCache cache_;
};

ValueTable make_output_table(const Network& net);
ValueTable make_coeff_table(const Network& net);

// Value of one input slot per the four link modes. `current` holds outputs
// of time t (only layers below own_layer are read), `previous` those of t-1.
double resolve_input(const ConnectionTriple& c, std::uint32_t own_layer, const ValueTable& current,
                     const ValueTable& previous, std::span<const double> external);

// Checks that every triple of every unit resolves. Throws TopologyError.
void check_resolvable(const Network& net);

// Sum of Delta over every slot in the network bound to `target`, by full
// scan of all connection tables.
double aggregate_incoming_error(const Network& net, const ValueTable& coeffs, const ConnectionTriple& target);

// Time-split incoming error: consumers in layers above the target
// contribute Delta(t) from `current`; consumers in the target's layer or
// below (recurrent links) contribute Delta(t-1) from `previous`.
double aggregate_incoming_error(const ConsumerIndex& index, const ValueTable& current, const ValueTable& previous,
                                const ConnectionTriple& target);

}  // namespace ibnet
