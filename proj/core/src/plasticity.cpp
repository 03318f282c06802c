#include "ibnet/plasticity.hpp"

#include <algorithm>
#include <cmath>

#include "ibnet/error.hpp"

namespace ibnet {

std::string_view to_string(PlasticityKind kind) { return kind == PlasticityKind::Created ? "created" : "deleted"; }

std::string_view to_string(PlasticityTrigger trigger) {
  switch (trigger) {
    case PlasticityTrigger::Saturation:
      return "saturation";
    case PlasticityTrigger::Oscillation:
      return "oscillation";
    case PlasticityTrigger::LowWeight:
      return "low_weight";
  }
  return "unknown";
}

std::string format_event(const PlasticityEvent& e) {
  std::string s = std::to_string(e.step) + " (" + std::to_string(e.layer) + "," + std::to_string(e.unit) + ") ";
  s += to_string(e.kind);
  s += " " + std::to_string(e.slot) + " " + to_string(e.target) + " ";
  s += to_string(e.trigger);
  return s;
}

int check_saturation_trigger(ModelTag tag, double y, double bias, std::span<const double> inputs, double delta,
                             const NeuronParams& params) {
  double reach = 0.0;
  for (double x : inputs) reach += x;
  reach *= 0.7 * params.omega_max;
  const double sign = delta < 0.0 ? -1.0 : 1.0;
  const double probe = activate(tag, bias - sign * reach, params);
  return std::abs(y - probe) < std::abs(delta) ? 1 : 0;
}

int check_oscillation_trigger(double prev_delta, double delta, std::span<const double> inputs,
                              std::span<const double> prev_inputs, const NeuronParams& params) {
  if (!(prev_delta * delta < 0.0)) return 0;
  if (inputs.size() != prev_inputs.size()) throw ContractError("input histories differ in length");
  double moved = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) moved += std::abs(inputs[k] - prev_inputs[k]);
  return moved < 0.1 * static_cast<double>(inputs.size()) * params.x_max ? 1 : 0;
}

namespace {

bool connected_to(const NeuronState& s, const ConnectionTriple& c) {
  return std::find(s.connections.begin(), s.connections.end(), c) != s.connections.end();
}

// Tracks the maximisers of a score, breaking ties uniformly at random.
class ArgMax {
 public:
  void offer(double score, const ConnectionTriple& c) {
    if (ties_.empty() || score > best_) {
      best_ = score;
      ties_.assign(1, c);
    } else if (score == best_) {
      ties_.push_back(c);
    }
  }
  std::optional<ConnectionTriple> pick(std::mt19937_64& rng) const {
    if (ties_.empty()) return std::nullopt;
    if (ties_.size() == 1) return ties_.front();
    std::uniform_int_distribution<std::size_t> d(0, ties_.size() - 1);
    return ties_[d(rng)];
  }

 private:
  double best_ = 0.0;
  std::vector<ConnectionTriple> ties_;
};

void scan_layer(const ValueTable& values, const NeuronState& self, std::uint32_t layer, std::uint32_t own_layer,
                std::uint32_t own_unit, double scale, ArgMax& best) {
  const auto& units = values[layer - 1];
  for (std::uint32_t p = 1; p <= units.size(); ++p) {
    if (layer == own_layer && p == own_unit) continue;
    for (std::uint32_t r = 1; r <= units[p - 1].size(); ++r) {
      const ConnectionTriple c{layer, p, r};
      if (connected_to(self, c)) continue;
      best.offer(std::abs(units[p - 1][r - 1] * scale), c);
    }
  }
}

}  // namespace

std::optional<LinkCandidate> select_candidate(const Network& net, const ValueTable& current, std::uint32_t layer,
                                              std::uint32_t unit, std::mt19937_64& rng) {
  const NeuronState& self = net.unit(layer, unit);
  const auto free_slot = std::find_if(self.connections.begin(), self.connections.end(),
                                      [](const ConnectionTriple& c) { return c.empty(); });
  if (free_slot == self.connections.end()) return std::nullopt;
  const auto slot = static_cast<std::uint32_t>(free_slot - self.connections.begin());

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (!(coin(rng) < self.params.p_deep1) && layer >= 2) {
    ArgMax best;
    scan_layer(current, self, layer - 1, layer, unit, 1.0, best);
    if (auto c = best.pick(rng)) return LinkCandidate{slot, *c};
  }

  ArgMax best;
  if (self.recurrent && coin(rng) < self.params.p_rec) {
    for (std::uint32_t l = layer; l <= net.layer_count(); ++l) scan_layer(net.outputs, self, l, layer, unit, 1.0, best);
  } else if (self.params.p_deep1 > 0.0) {
    // With p_deep1 = 0 a full previous layer yields no candidate rather
    // than a deep link.
    for (std::uint32_t l = 1; l + 1 < layer; ++l) {
      scan_layer(current, self, l, layer, unit, std::ldexp(1.0, -static_cast<int>(layer - l)), best);
    }
  }
  if (auto c = best.pick(rng)) return LinkCandidate{slot, *c};
  return std::nullopt;
}

double new_link_weight(double delta, const NeuronParams& params) {
  return delta <= 0.0 ? params.omega_min : -params.omega_min;
}

void create_link(NeuronState& state, std::uint32_t slot, const ConnectionTriple& target, double delta) {
  if (slot >= state.connections.size()) throw ContractError("link slot out of range");
  if (!state.connections[slot].empty()) throw ContractError("cannot create a link in an occupied slot");
  if (target.empty()) throw ContractError("a created link needs a target");
  state.connections[slot] = target;
  state.weights[slot] = new_link_weight(delta, state.params);
  if (state.deletion_terms.width() == state.connections.size()) state.deletion_terms.reset_column(slot);
}

std::vector<double> deletion_terms(const NeuronState& state, int gate) {
  std::vector<double> terms(state.connections.size(), 0.0);
  if (gate == 0) return terms;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (!state.connections[k].empty()) terms[k] = std::abs(state.weights[k]) - state.params.omega_min;
  }
  return terms;
}

std::vector<std::uint8_t> check_deletion(const NeuronState& state) {
  std::vector<std::uint8_t> flags(state.connections.size(), 0);
  const auto sums = state.deletion_terms.sums();
  if (sums.size() != flags.size()) return flags;
  for (std::size_t k = 0; k < flags.size(); ++k) flags[k] = sums[k] < 0.0 ? 1 : 0;
  return flags;
}

std::vector<PlasticityEvent> prune_links(NeuronState& state, std::uint32_t own_layer, std::uint32_t own_unit,
                                         std::span<const std::uint8_t> flags, std::span<const std::uint32_t> created,
                                         std::uint64_t step) {
  std::vector<PlasticityEvent> events;
  for (std::size_t k = 0; k < flags.size() && k < state.connections.size(); ++k) {
    if (!flags[k]) continue;
    const ConnectionTriple c = state.connections[k];
    if (c.empty() || c.external()) continue;
    if (std::find(created.begin(), created.end(), k) != created.end()) continue;
    if (state.protect_recurrent_links && classify(c, own_layer) == LinkMode::Recurrent) continue;
    state.connections[k] = kDisconnected;
    state.weights[k] = 0.0;
    if (state.deletion_terms.width() == state.connections.size()) state.deletion_terms.reset_column(k);
    events.push_back({PlasticityKind::Deleted, own_layer, own_unit, static_cast<std::uint32_t>(k + 1), c, step,
                      PlasticityTrigger::LowWeight});
  }
  return events;
}

}  // namespace ibnet
