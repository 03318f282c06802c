#include "ibnet/engine.hpp"

#include <charconv>
#include <cmath>
#include <deque>

#include "ibnet/dropout.hpp"
#include "ibnet/error.hpp"

namespace ibnet {

namespace {

void forward_unit(const Network& net, const NeuronState& s, std::uint32_t layer, std::span<const double> external,
                  std::span<const double> refs, PendingStep& ps, UnitStep& us, std::vector<double>& y) {
  const std::size_t n = s.connections.size();
  us.live_inputs.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    us.live_inputs[k] = resolve_input(s.connections[k], layer, ps.outputs, net.outputs, external);
  }
  us.inputs = us.live_inputs;
  if (s.recurrent && ps.gate == 1) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s.stack_bound(k, layer, net.replay)) us.inputs[k] = s.input_stacks[k].head();
    }
  }

  const std::size_t arity = output_arity(s.kind);
  if (ps.gate == 1 && s.params.dropout_keep < 1.0) {
    us.mask = sample_mask(s.params.dropout_keep, ps.rng, arity).values;
  } else {
    us.mask.assign(arity, 1);
  }

  us.activation.resize(arity);
  forward_into(s.kind, s.weights, s.bias, us.inputs, s.params, us.activation);
  y.resize(arity);
  for (std::size_t r = 0; r < arity; ++r) y[r] = ps.gate == 1 ? us.activation[r] * us.mask[r] : us.activation[r];

  if (s.kind.has_reference) {
    us.references.resize(arity);
    for (std::size_t r = 0; r < arity; ++r) us.references[r] = refs[s.reference_slots[r] - 1];
  }
}

std::vector<double> effective_references(const NeuronState& s, const UnitStep& us, int gate) {
  std::vector<double> e = us.references;
  if (s.recurrent && gate == 1) {
    for (std::size_t r = 0; r < e.size(); ++r) e[r] = s.reference_stacks[r].head();
  }
  return e;
}

void backward_unit(const Network& net, const NeuronState& s, std::uint32_t layer, std::uint32_t unit,
                   const ConsumerIndex& index, PendingStep& ps, UnitStep& us) {
  const std::size_t arity = output_arity(s.kind);
  std::vector<double> incoming(arity);
  for (std::uint32_t r = 1; r <= arity; ++r) {
    incoming[r - 1] = aggregate_incoming_error(index, ps.coeffs, net.coeffs, {layer, unit, r});
  }
  const auto& y = ps.outputs[layer - 1][unit - 1];
  std::optional<std::span<const double>> ref_view;
  std::vector<double> refs;
  if (s.kind.has_reference) {
    refs = effective_references(s, us, ps.gate);
    ref_view = refs;
    for (std::size_t r = 0; r < arity; ++r) {
      const double d = y[r] - refs[r];
      ps.squared_error += d * d;
    }
    ps.reference_outputs += arity;
  }
  const CorrectionFactor cf = correction_factor(s.kind, y, ref_view, incoming, net.derivative, us.mask);
  const NeuronSignals sig{s.weights, s.bias, us.inputs, us.activation};
  BackpropCoeffs bc = backprop_coeffs(s.kind, sig, cf, ps.gate, s.params, net.derivative);
  us.degenerate = bc.degenerate;
  ps.coeffs[layer - 1][unit - 1] = std::move(bc.values);

  WeightUpdate inc = weight_increments(s.kind, sig, cf, ps.gate, s.params);
  us.weight_increments = std::move(inc.weights);
  us.bias_increment = inc.bias;
  us.delta = cf.value;
  us.paralysis = detect_paralysis(s.weights, s.params);

  if (!s.adjustable) return;
  us.deletion_terms = deletion_terms(s, ps.gate);
  if (ps.gate == 0) return;
  if (check_saturation_trigger(s.kind.tag, us.activation[0], s.bias, us.inputs, us.delta, s.params)) {
    us.trigger = PlasticityTrigger::Saturation;
  } else if (check_oscillation_trigger(s.delta, us.delta, us.inputs, s.inputs, s.params)) {
    us.trigger = PlasticityTrigger::Oscillation;
  } else {
    return;
  }
  us.creation = select_candidate(net, ps.outputs, layer, unit, ps.rng);
}

int local_min_from_window(const SlidingWindow& w, const NeuronParams& params) {
  if (w.width() == 0 || w.size() < params.t_xi || !w.all_gated()) return 0;
  double lhs = 0.0;
  for (double s : w.sums()) lhs += std::abs(s);
  return lhs < params.omega_min * static_cast<double>(w.width()) ? 1 : 0;
}

}  // namespace

PendingStep compute_step(const Network& net, std::span<const double> external, std::span<const double> references,
                         double control) {
  if (external.size() != net.input_count) {
    throw StepError("expected " + std::to_string(net.input_count) + " external inputs, got " +
                    std::to_string(external.size()));
  }
  if (references.size() != net.reference_count) {
    throw StepError("expected " + std::to_string(net.reference_count) + " reference inputs, got " +
                    std::to_string(references.size()));
  }
  PendingStep ps;
  ps.step = net.step;
  ps.control = control;
  ps.gate = training_gate(control);
  ps.rng = net.rng;
  ps.outputs = net.outputs;
  ps.coeffs = net.coeffs;
  ps.units.resize(net.layers.size());

  for (std::uint32_t l = 1; l <= net.layer_count(); ++l) {
    const auto& layer = net.layers[l - 1];
    ps.units[l - 1].resize(layer.size());
    for (std::uint32_t u = 1; u <= layer.size(); ++u) {
      forward_unit(net, layer[u - 1], l, external, references, ps, ps.units[l - 1][u - 1], ps.outputs[l - 1][u - 1]);
    }
  }

  const ConsumerIndex& index = net.consumer_index();
  for (std::uint32_t l = net.layer_count(); l >= 1; --l) {
    const auto& layer = net.layers[l - 1];
    for (std::uint32_t u = 1; u <= layer.size(); ++u) {
      backward_unit(net, layer[u - 1], l, u, index, ps, ps.units[l - 1][u - 1]);
    }
  }
  return ps;
}

StepReport commit_step(Network& net, PendingStep ps) {
  if (ps.step != net.step || ps.units.size() != net.layers.size()) {
    throw StepError("pending step does not belong to this network state");
  }
  StepReport report;
  report.step = ps.step;
  report.mse = ps.reference_outputs == 0 ? 0.0 : ps.squared_error / static_cast<double>(ps.reference_outputs);
  const int gate = ps.gate;
  bool topology_changed = false;

  for (std::uint32_t l = 1; l <= net.layer_count(); ++l) {
    for (std::uint32_t u = 1; u <= net.layers[l - 1].size(); ++u) {
      NeuronState& s = net.layers[l - 1][u - 1];
      UnitStep& us = ps.units[l - 1][u - 1];

      for (std::size_t k = 0; k < s.weights.size(); ++k) s.weights[k] += us.weight_increments[k];
      s.bias += us.bias_increment;

      if (s.recurrent) {
        for (std::size_t k = 0; k < s.input_stacks.size(); ++k) {
          if (gate == 0) {
            s.input_stacks[k].push(us.live_inputs[k]);
          } else {
            s.input_stacks[k].pop();
          }
        }
        for (std::size_t r = 0; r < s.reference_stacks.size(); ++r) {
          if (gate == 0) {
            s.reference_stacks[r].push(us.references[r]);
          } else {
            s.reference_stacks[r].pop();
          }
        }
      }

      s.weight_changes.push(us.weight_increments, gate);
      s.local_min = local_min_from_window(s.weight_changes, s.params);
      s.paralysis = us.paralysis;
      s.inputs = std::move(us.inputs);
      s.delta = us.delta;
      s.training_signal = ps.control;
      s.dropout_mask = std::move(us.mask);
      if (us.degenerate) ++report.degenerate;

      if (!s.adjustable) continue;
      s.deletion_terms.push(us.deletion_terms, gate);
      std::vector<std::uint32_t> created;
      if (us.creation) {
        create_link(s, us.creation->slot, us.creation->target, us.delta);
        created.push_back(us.creation->slot);
        report.events.push_back({PlasticityKind::Created, l, u, us.creation->slot + 1, us.creation->target, ps.step,
                                 us.trigger});
        topology_changed = true;
      }
      auto removed = prune_links(s, l, u, check_deletion(s), created, ps.step);
      if (!removed.empty()) topology_changed = true;
      report.events.insert(report.events.end(), removed.begin(), removed.end());
    }
  }

  net.outputs = std::move(ps.outputs);
  net.coeffs = std::move(ps.coeffs);
  if (topology_changed) net.touch_topology();
  const GlobalFlags flags = global_flags(net);
  net.xi = flags.xi;
  net.p = flags.p;
  net.control = ps.control;
  net.rng = ps.rng;
  ++net.step;

  report.xi = flags.xi;
  report.p = flags.p;
  report.link_count = net.link_count();
  return report;
}

StepReport step(Network& net, std::span<const double> external, std::span<const double> references, double control) {
  return commit_step(net, compute_step(net, external, references, control));
}

GlobalFlags global_flags(const Network& net) {
  GlobalFlags f;
  for (const auto& layer : net.layers) {
    for (const auto& u : layer) {
      f.xi |= u.local_min;
      f.p |= u.paralysis;
    }
  }
  return f;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string format_metrics(const StepReport& r) {
  std::string s = std::to_string(r.step) + " ";
  append_double(s, r.mse);
  s += " " + std::to_string(r.xi) + " " + std::to_string(r.p) + " " + std::to_string(r.link_count);
  return s;
}

EpisodeReport run_training_episode(Network& net, std::span<const Sample> samples, const EpisodeOptions& options) {
  EpisodeReport report;
  const std::size_t m = samples.size();
  if (m == 0) return report;
  for (const auto& layer : net.layers) {
    for (const auto& u : layer) {
      if (u.recurrent && m > u.params.max_m) {
        throw CapacityError("episode of " + std::to_string(m) + " steps exceeds stack depth " +
                            std::to_string(u.params.max_m));
      }
    }
  }
  if (options.reset_state) net.reset_activity();

  report.weight_changes.resize(net.layers.size());
  report.bias_changes.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (const auto& u : net.layers[l]) {
      report.weight_changes[l].emplace_back(u.weights.size(), 0.0);
      report.bias_changes[l].push_back(0.0);
    }
  }
  auto run = [&](std::span<const double> x, std::span<const double> e, double a) {
    PendingStep ps = compute_step(net, x, e, a);
    for (std::size_t l = 0; l < ps.units.size(); ++l) {
      for (std::size_t u = 0; u < ps.units[l].size(); ++u) {
        const auto& inc = ps.units[l][u].weight_increments;
        auto& acc = report.weight_changes[l][u];
        for (std::size_t k = 0; k < inc.size() && k < acc.size(); ++k) acc[k] += inc[k];
        report.bias_changes[l][u] += ps.units[l][u].bias_increment;
      }
    }
    StepReport r = commit_step(net, std::move(ps));
    report.events.insert(report.events.end(), r.events.begin(), r.events.end());
    ++report.steps;
    return r;
  };

  double fill = 0.0;
  for (const Sample& s : samples) fill += run(s.external, s.references, 0.0).mse;
  report.fill_mse = fill / static_cast<double>(m);
  const std::vector<double> zx(net.input_count, 0.0);
  const std::vector<double> ze(net.reference_count, 0.0);
  for (std::size_t i = 0; i < m; ++i) run(zx, ze, 1.0);
  return report;
}

std::vector<double> integrated_gradient(const Network& net, std::span<const double> external,
                                        std::span<const double> references) {
  const PendingStep ps = compute_step(net, external, references, 1.0);
  std::vector<double> g;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t u = 0; u < net.layers[l].size(); ++u) {
      const NeuronState& s = net.layers[l][u];
      const UnitStep& us = ps.units[l][u];
      for (double d : us.weight_increments) g.push_back(-d / s.params.mu);
      if (is_weighted_sum(s.kind.tag)) g.push_back(-us.bias_increment / s.params.mu);
    }
  }
  return g;
}

std::vector<double> episode_gradient(const Network& net, const EpisodeReport& report) {
  std::vector<double> g;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t u = 0; u < net.layers[l].size(); ++u) {
      const NeuronState& s = net.layers[l][u];
      for (double d : report.weight_changes.at(l).at(u)) g.push_back(-d / s.params.mu);
      if (is_weighted_sum(s.kind.tag)) g.push_back(-report.bias_changes.at(l).at(u) / s.params.mu);
    }
  }
  return g;
}

CompositeStepper::CompositeStepper(std::vector<Network> nets, std::vector<HierarchyLink> links)
    : nets_(std::move(nets)), links_(std::move(links)), controller_of_(nets_.size()), controls_(nets_.size(), 0.0) {
  const std::size_t n = nets_.size();
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const HierarchyLink& link = links_[i];
    if (link.controller >= n || link.controlled >= n) throw CompositionError("hierarchy link names a missing network");
    if (!nets_[link.controller].has_output(link.gate_source)) {
      throw CompositionError("gate source " + to_string(link.gate_source) + " is not an output of network " +
                             std::to_string(link.controller));
    }
    if (controller_of_[link.controlled]) {
      throw CompositionError("network " + std::to_string(link.controlled) + " has more than one controller");
    }
    controller_of_[link.controlled] = i;
    children[link.controller].push_back(link.controlled);
    ++indegree[link.controlled];
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    const std::size_t i = ready.front();
    ready.pop_front();
    order_.push_back(i);
    for (std::size_t c : children[i]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (order_.size() != n) throw CompositionError("hierarchy links form a cycle");
}

std::vector<StepReport> CompositeStepper::step(std::span<const NetworkInput> inputs) {
  if (inputs.size() != nets_.size()) throw StepError("composite step needs one input per network");
  std::vector<StepReport> reports(nets_.size());
  for (std::size_t i : order_) {
    double a = inputs[i].control;
    if (const auto li = controller_of_[i]) {
      const HierarchyLink& link = links_[*li];
      a = nets_[link.controller].output(link.gate_source) > link.threshold ? 1.0 : 0.0;
    }
    controls_[i] = a;
    reports[i] = ibnet::step(nets_[i], inputs[i].external, inputs[i].references, a);
  }
  return reports;
}

CompositeStepper compose_hierarchy(std::vector<Network> nets, std::vector<HierarchyLink> links) {
  return CompositeStepper(std::move(nets), std::move(links));
}

}  // namespace ibnet
