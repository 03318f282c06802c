#include "ibnet/network.hpp"

#include <algorithm>

#include "ibnet/error.hpp"

namespace ibnet {

std::size_t LayerPlan::unit_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.size();
  return n;
}

namespace {

std::string where(std::size_t layer, std::size_t unit) {
  return "unit (" + std::to_string(layer) + "," + std::to_string(unit) + ")";
}

void check_triple(const LayerPlan& plan, std::uint32_t own_layer, std::size_t own_unit,
                  const ConnectionTriple& c) {
  const auto mode = classify(c, own_layer);
  if (mode == LinkMode::Disconnected) return;
  if (mode == LinkMode::External) {
    if (c.output > plan.input_count) {
      throw TopologyError(where(own_layer, own_unit) + " reads missing external input " + to_string(c));
    }
    return;
  }
  if (c.layer > plan.layers.size() || c.unit > plan.layers[c.layer - 1].size()) {
    throw TopologyError(where(own_layer, own_unit) + " reads missing unit " + to_string(c));
  }
  if (c.output > output_arity(plan.layers[c.layer - 1][c.unit - 1].kind)) {
    throw TopologyError(where(own_layer, own_unit) + " reads missing output " + to_string(c));
  }
}

}  // namespace

void validate(const LayerPlan& plan) {
  for (std::size_t li = 0; li < plan.layers.size(); ++li) {
    const auto layer = static_cast<std::uint32_t>(li + 1);
    for (std::size_t ui = 0; ui < plan.layers[li].size(); ++ui) {
      const UnitPlan& u = plan.layers[li][ui];
      check_arity(u.kind, u.connections.size());
      validate(u.params);
      for (const auto& c : u.connections) check_triple(plan, layer, ui + 1, c);
      if (u.kind.has_reference) {
        if (u.reference_slots.size() != output_arity(u.kind)) {
          throw TopologyError(where(layer, ui + 1) + " needs one reference slot per output");
        }
        for (auto r : u.reference_slots) {
          if (r == 0 || r > plan.reference_count) {
            throw TopologyError(where(layer, ui + 1) + " binds a missing reference input");
          }
        }
      } else if (!u.reference_slots.empty()) {
        throw TopologyError(where(layer, ui + 1) + " has reference slots but no reference input");
      }
      if (u.adjustable && !is_weighted_sum(u.kind.tag)) {
        throw ModelError(where(layer, ui + 1) + ": only weighted-sum units can adjust their links");
      }
    }
  }
  for (const auto& c : plan.outputs) {
    if (c.layer == 0) throw TopologyError("network output " + to_string(c) + " must name a unit output");
    check_triple(plan, static_cast<std::uint32_t>(plan.layers.size() + 1), 0, c);
  }
}

bool NeuronState::stack_bound(std::size_t slot, std::uint32_t own_layer, ReplayMode replay) const {
  if (!recurrent) return false;
  const auto& c = connections[slot];
  if (c.external()) return true;
  return replay == ReplayMode::ExternalAndRecurrent && c.layer >= own_layer && c.layer != 0;
}

Network Network::from_plan(const LayerPlan& plan, std::uint64_t seed, DerivativeMode derivative,
                           ReplayMode replay) {
  validate(plan);
  Network net;
  net.name = plan.name;
  net.input_count = plan.input_count;
  net.reference_count = plan.reference_count;
  net.output_bindings = plan.outputs;
  net.derivative = derivative;
  net.replay = replay;
  net.rng.seed(seed);

  net.layers.resize(plan.layers.size());
  for (std::size_t li = 0; li < plan.layers.size(); ++li) {
    for (const UnitPlan& u : plan.layers[li]) {
      NeuronState s;
      s.kind = u.kind;
      s.params = u.params;
      s.recurrent = u.recurrent;
      s.adjustable = u.adjustable;
      s.protect_recurrent_links = u.protect_recurrent_links;
      s.connections = u.connections;
      s.reference_slots = u.reference_slots;
      const std::size_t slots = u.connections.size();
      const std::size_t nw = weight_count(u.kind, slots);
      const auto [lo, hi] = u.init_range.value_or(std::pair{-10.0 * u.params.omega_min, 10.0 * u.params.omega_min});
      std::uniform_real_distribution<double> init(lo, hi);
      s.weights.resize(nw);
      for (auto& w : s.weights) w = init(net.rng);
      // Empty slots start with zero weight.
      if (u.kind.tag != ModelTag::Convolutional) {
        for (std::size_t k = 0; k < nw; ++k) {
          if (u.connections[k].empty()) s.weights[k] = 0.0;
        }
      }
      s.inputs.assign(slots, 0.0);
      if (u.recurrent) {
        s.input_stacks.assign(slots, StackMemory(u.params.max_m));
        if (u.kind.has_reference) s.reference_stacks.assign(output_arity(u.kind), StackMemory(u.params.max_m));
      }
      s.weight_changes = SlidingWindow(u.params.t_xi, nw);
      if (u.adjustable) s.deletion_terms = SlidingWindow(u.params.t_o, slots);
      s.dropout_mask.assign(output_arity(u.kind), 1);
      net.layers[li].push_back(std::move(s));
    }
  }
  net.outputs = make_output_table(net);
  net.coeffs = make_coeff_table(net);
  return net;
}

bool Network::has_output(const ConnectionTriple& c) const {
  return c.layer >= 1 && c.layer <= layers.size() && c.unit >= 1 && c.unit <= layers[c.layer - 1].size() &&
         c.output >= 1 && c.output <= output_arity(layers[c.layer - 1][c.unit - 1].kind);
}

std::vector<double> Network::network_outputs() const {
  std::vector<double> y;
  y.reserve(output_bindings.size());
  for (const auto& c : output_bindings) y.push_back(output(c));
  return y;
}

std::size_t Network::link_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    for (const auto& u : layer) {
      n += static_cast<std::size_t>(std::count_if(u.connections.begin(), u.connections.end(),
                                                  [](const ConnectionTriple& c) { return !c.empty(); }));
    }
  }
  return n;
}

std::size_t Network::neuron_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.size();
  return n;
}

void Network::reset_activity() {
  for (auto& layer : outputs)
    for (auto& u : layer) std::fill(u.begin(), u.end(), 0.0);
  for (auto& layer : coeffs)
    for (auto& u : layer) std::fill(u.begin(), u.end(), 0.0);
  for (auto& layer : layers) {
    for (auto& u : layer) {
      for (auto& s : u.input_stacks) s.reset();
      for (auto& s : u.reference_stacks) s.reset();
      std::fill(u.inputs.begin(), u.inputs.end(), 0.0);
      u.delta = 0.0;
    }
  }
}

const ConsumerIndex& Network::consumer_index() const {
  if (!cache_.index || cache_.version != topology_version) {
    cache_.index = std::make_shared<const ConsumerIndex>(*this);
    cache_.version = topology_version;
  }
  return *cache_.index;
}

bool Network::same_state(const Network& o) const {
  return name == o.name && input_count == o.input_count && reference_count == o.reference_count &&
         output_bindings == o.output_bindings && layers == o.layers && outputs == o.outputs && coeffs == o.coeffs &&
         derivative == o.derivative && replay == o.replay && step == o.step && control == o.control && xi == o.xi &&
         p == o.p && rng == o.rng;
}

ValueTable make_output_table(const Network& net) {
  ValueTable t(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    t[l].reserve(net.layers[l].size());
    for (const auto& u : net.layers[l]) t[l].emplace_back(output_arity(u.kind), 0.0);
  }
  return t;
}

ValueTable make_coeff_table(const Network& net) {
  ValueTable t(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    t[l].reserve(net.layers[l].size());
    for (const auto& u : net.layers[l]) t[l].emplace_back(u.connections.size(), 0.0);
  }
  return t;
}

namespace {

double table_at(const ValueTable& t, const ConnectionTriple& c) {
  if (c.layer > t.size() || c.unit > t[c.layer - 1].size() || c.output > t[c.layer - 1][c.unit - 1].size()) {
    throw TopologyError("dangling connection " + to_string(c));
  }
  return t[c.layer - 1][c.unit - 1][c.output - 1];
}

}  // namespace

double resolve_input(const ConnectionTriple& c, std::uint32_t own_layer, const ValueTable& current,
                     const ValueTable& previous, std::span<const double> external) {
  switch (classify(c, own_layer)) {
    case LinkMode::Disconnected:
      return 0.0;
    case LinkMode::External:
      if (c.output > external.size()) throw TopologyError("dangling external input " + to_string(c));
      return external[c.output - 1];
    case LinkMode::Ordinary:
      return table_at(current, c);
    case LinkMode::Recurrent:
      return table_at(previous, c);
  }
  return 0.0;
}

void check_resolvable(const Network& net) {
  const std::vector<double> zeros(net.input_count, 0.0);
  for (std::uint32_t l = 1; l <= net.layer_count(); ++l) {
    for (const auto& u : net.layers[l - 1]) {
      for (const auto& c : u.connections) resolve_input(c, l, net.outputs, net.outputs, zeros);
    }
  }
}

double aggregate_incoming_error(const Network& net, const ValueTable& coeffs, const ConnectionTriple& target) {
  double sum = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t p = 0; p < net.layers[l].size(); ++p) {
      const auto& conns = net.layers[l][p].connections;
      for (std::size_t k = 0; k < conns.size(); ++k) {
        if (conns[k] == target) sum += coeffs[l][p][k];
      }
    }
  }
  return sum;
}

ConsumerIndex::ConsumerIndex(const Network& net) {
  table_.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    table_[l].resize(net.layers[l].size());
    for (std::size_t u = 0; u < net.layers[l].size(); ++u) table_[l][u].resize(output_arity(net.layers[l][u].kind));
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t p = 0; p < net.layers[l].size(); ++p) {
      const auto& conns = net.layers[l][p].connections;
      for (std::size_t k = 0; k < conns.size(); ++k) {
        const auto& c = conns[k];
        if (c.layer == 0) continue;
        table_.at(c.layer - 1).at(c.unit - 1).at(c.output - 1).push_back(
            {static_cast<std::uint32_t>(l + 1), static_cast<std::uint32_t>(p + 1), static_cast<std::uint32_t>(k)});
      }
    }
  }
}

std::span<const Consumer> ConsumerIndex::consumers(std::uint32_t layer, std::uint32_t unit,
                                                   std::uint32_t output) const {
  return table_[layer - 1][unit - 1][output - 1];
}

double aggregate_incoming_error(const ConsumerIndex& index, const ValueTable& current, const ValueTable& previous,
                                const ConnectionTriple& target) {
  double sum = 0.0;
  for (const Consumer& c : index.consumers(target.layer, target.unit, target.output)) {
    const ValueTable& t = c.layer > target.layer ? current : previous;
    sum += t[c.layer - 1][c.unit - 1][c.slot];
  }
  return sum;
}

}  // namespace ibnet
