#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ibnet/core.hpp"
#include "ibnet/models.hpp"
#include "ibnet/network.hpp"

namespace ibnet {

enum class PlasticityKind : std::uint8_t { Created, Deleted };
enum class PlasticityTrigger : std::uint8_t { Saturation, Oscillation, LowWeight };

struct PlasticityEvent {
  PlasticityKind kind = PlasticityKind::Created;
  std::uint32_t layer = 0;  // neuron (i, j), 1-based
  std::uint32_t unit = 0;
  std::uint32_t slot = 0;   // 1-based input slot
  ConnectionTriple target;
  std::uint64_t step = 0;
  PlasticityTrigger trigger = PlasticityTrigger::Saturation;

  friend bool operator==(const PlasticityEvent&, const PlasticityEvent&) = default;
};

std::string_view to_string(PlasticityKind kind);
std::string_view to_string(PlasticityTrigger trigger);
// "step (i,j) kind slot (l,m,r) trigger"
std::string format_event(const PlasticityEvent& e);

// C_new1: even pushing every weight to 0.7 omega_max against the error
// would move the output by less than |delta|.
int check_saturation_trigger(ModelTag tag, double y, double bias, std::span<const double> inputs, double delta,
                             const NeuronParams& params);

// C_new2: the correction factor changed sign while the inputs barely moved.
int check_oscillation_trigger(double prev_delta, double delta, std::span<const double> inputs,
                              std::span<const double> prev_inputs, const NeuronParams& params);

struct LinkCandidate {
  std::uint32_t slot = 0;  // 0-based free slot
  ConnectionTriple target;

  friend bool operator==(const LinkCandidate&, const LinkCandidate&) = default;
};

// Picks a free slot and a target for neuron (layer, unit). `current` holds
// outputs of time t, net.outputs those of t-1.
std::optional<LinkCandidate> select_candidate(const Network& net, const ValueTable& current, std::uint32_t layer,
                                              std::uint32_t unit, std::mt19937_64& rng);

// Initial weight of a created link: +omega_min for delta <= 0, else -omega_min.
double new_link_weight(double delta, const NeuronParams& params);

// Binds slot k (0-based) to `target`. Throws ContractError if occupied.
void create_link(NeuronState& state, std::uint32_t slot, const ConnectionTriple& target, double delta);

// Deletion terms (|w_k| - omega_min) * gate for the slots of one unit;
// empty slots contribute 0.
std::vector<double> deletion_terms(const NeuronState& state, int gate);

// C_del per slot from the unit's deletion window: 1 iff the windowed sum
// of deletion terms is negative.
std::vector<std::uint8_t> check_deletion(const NeuronState& state);

// Disconnects every flagged slot except external links, empty slots,
// slots listed in `created` and, when the unit protects them, recurrent
// links. Returns the removed (slot, target) pairs as Deleted events.
std::vector<PlasticityEvent> prune_links(NeuronState& state, std::uint32_t own_layer, std::uint32_t own_unit,
                                         std::span<const std::uint8_t> flags, std::span<const std::uint32_t> created,
                                         std::uint64_t step);

}  // namespace ibnet
