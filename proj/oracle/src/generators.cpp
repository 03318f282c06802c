#include "ibnet/oracle/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ibnet::oracle {

namespace {

std::uint32_t draw(std::mt19937_64& rng, std::uint32_t lo, std::uint32_t hi) {
  return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
}

constexpr ModelTag kHiddenKinds[] = {
    ModelTag::Sigmoid,   ModelTag::Tanh,      ModelTag::Linear,   ModelTag::EuclideanDistance, ModelTag::ReLuBlock,
    ModelTag::PoolBlock, ModelTag::GaussBlock, ModelTag::MulBlock, ModelTag::SumBlock,          ModelTag::TanhBlock,
};

std::uint32_t fixed_arity(ModelTag tag) {
  switch (tag) {
    case ModelTag::MulBlock:
    case ModelTag::SumBlock:
      return 2;
    case ModelTag::ReLuBlock:
    case ModelTag::GaussBlock:
    case ModelTag::TanhBlock:
      return 1;
    default:
      return 0;
  }
}

struct Layout {
  std::uint32_t inputs = 1;
  std::vector<std::uint32_t> widths;
};

Layout draw_layout(std::mt19937_64& rng, const RandomNetOptions& o, std::uint32_t max_layers) {
  Layout lay;
  lay.inputs = draw(rng, 1, o.max_inputs);
  const std::uint32_t layers = draw(rng, 2, std::max<std::uint32_t>(2, max_layers));
  std::uint32_t budget = o.max_units;
  for (std::uint32_t l = 0; l < layers && budget > 0; ++l) {
    const std::uint32_t remaining_layers = layers - l - 1;
    const std::uint32_t cap = std::max<std::uint32_t>(1, std::min(o.max_width, budget - std::min(budget - 1, remaining_layers)));
    const std::uint32_t w = draw(rng, 1, cap);
    lay.widths.push_back(w);
    budget -= w;
  }
  return lay;
}

// Random source for a slot of a unit in `layer` (1-based). `allow` decides
// which layers may be read.
ConnectionTriple draw_source(std::mt19937_64& rng, const Layout& lay, std::uint32_t lo_layer, std::uint32_t hi_layer,
                             bool allow_external) {
  std::vector<ConnectionTriple> pool;
  if (allow_external) {
    for (std::uint32_t k = 1; k <= lay.inputs; ++k) pool.push_back(external_input(k));
  }
  for (std::uint32_t l = lo_layer; l <= hi_layer && l <= lay.widths.size(); ++l) {
    for (std::uint32_t u = 1; u <= lay.widths[l - 1]; ++u) pool.push_back({l, u, 1});
  }
  return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
}

UnitPlan draw_unit(std::mt19937_64& rng, ModelTag tag, bool reference, const RandomNetOptions& o) {
  UnitPlan u;
  u.kind = ModelKind::of(tag, reference);
  u.params.mu = o.mu;
  u.init_range = std::pair{-o.weight_range, o.weight_range};
  const std::uint32_t fixed = fixed_arity(tag);
  const std::uint32_t slots = fixed != 0 ? fixed : tag == ModelTag::PoolBlock ? draw(rng, 2, 3) : draw(rng, 1, 4);
  u.connections.resize(slots);
  return u;
}

LayerPlan assemble(std::mt19937_64& rng, const Layout& lay, const RandomNetOptions& o, bool recurrent,
                   std::uint32_t max_m) {
  LayerPlan plan;
  plan.name = recurrent ? "random_recurrent" : "random_feedforward";
  plan.input_count = lay.inputs;
  const auto layers = static_cast<std::uint32_t>(lay.widths.size());
  plan.layers.resize(layers);
  std::uniform_int_distribution<std::size_t> pick_kind(0, std::size(kHiddenKinds) - 1);
  for (std::uint32_t l = 1; l <= layers; ++l) {
    const bool last = l == layers;
    for (std::uint32_t j = 1; j <= lay.widths[l - 1]; ++j) {
      const ModelTag tag = kHiddenKinds[pick_kind(rng)];
      UnitPlan u = draw_unit(rng, tag, last, o);
      u.recurrent = recurrent;
      u.params.max_m = max_m;
      for (std::size_t k = 0; k < u.connections.size(); ++k) {
        if (k == 0 && l > 1) {
          // Keep every layer on a path from the one below.
          u.connections[k] = draw_source(rng, lay, l - 1, l - 1, false);
        } else if (recurrent) {
          u.connections[k] = draw_source(rng, lay, 1, layers, true);
        } else {
          u.connections[k] = draw_source(rng, lay, 1, l - 1, true);
        }
      }
      if (last) {
        u.reference_slots = {++plan.reference_count};
        plan.outputs.push_back({l, j, 1});
      }
      plan.layers[l - 1].push_back(std::move(u));
    }
  }
  validate(plan);
  return plan;
}

}  // namespace

LayerPlan random_feedforward_plan(std::mt19937_64& rng, const RandomNetOptions& options) {
  const Layout lay = draw_layout(rng, options, options.max_layers);
  return assemble(rng, lay, options, false, options.max_units);
}

LayerPlan random_recurrent_plan(std::mt19937_64& rng, std::uint32_t max_m, const RandomNetOptions& options) {
  const Layout lay = draw_layout(rng, options, options.max_layers);
  return assemble(rng, lay, options, true, max_m);
}

LayerPlan random_adjustable_plan(std::mt19937_64& rng, double p_deep1, double p_rec, const RandomNetOptions& o) {
  const Layout lay = draw_layout(rng, o, o.max_layers);
  constexpr ModelTag kinds[] = {ModelTag::Sigmoid, ModelTag::Tanh, ModelTag::Linear};
  std::bernoulli_distribution coin(0.5);
  LayerPlan plan;
  plan.name = "random_adjustable";
  plan.input_count = lay.inputs;
  const auto layers = static_cast<std::uint32_t>(lay.widths.size());
  plan.layers.resize(layers);
  for (std::uint32_t l = 1; l <= layers; ++l) {
    const bool last = l == layers;
    for (std::uint32_t j = 1; j <= lay.widths[l - 1]; ++j) {
      UnitPlan u;
      u.kind = ModelKind::of(kinds[draw(rng, 0, 2)], last);
      u.params.mu = o.mu;
      u.params.p_deep1 = p_deep1;
      u.params.p_rec = p_rec;
      u.params.max_m = 4;
      u.recurrent = coin(rng);
      u.adjustable = true;
      u.init_range = std::pair{-o.weight_range, o.weight_range};
      u.connections.resize(draw(rng, 2, 5));
      u.connections[0] = l > 1 ? draw_source(rng, lay, l - 1, l - 1, false) : external_input(draw(rng, 1, lay.inputs));
      for (std::size_t k = 1; k < u.connections.size(); ++k) {
        if (coin(rng)) continue;
        u.connections[k] = u.recurrent ? draw_source(rng, lay, 1, layers, true) : draw_source(rng, lay, 1, l - 1, true);
      }
      if (last) {
        u.reference_slots = {++plan.reference_count};
        plan.outputs.push_back({l, j, 1});
      }
      plan.layers[l - 1].push_back(std::move(u));
    }
  }
  validate(plan);
  return plan;
}

std::vector<Frame> random_frames(std::mt19937_64& rng, const Network& net, std::size_t count) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Frame> frames(count);
  for (auto& f : frames) {
    for (std::uint32_t k = 0; k < net.input_count; ++k) f.external.push_back(u(rng));
    for (std::uint32_t k = 0; k < net.reference_count; ++k) f.references.push_back(u(rng));
  }
  return frames;
}

double kink_margin(const Network& net, std::span<const Frame> frames) {
  const auto trace = sequence_trace(net, frames);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trace.size(); ++t) {
    for (std::uint32_t l = 1; l <= net.layers.size(); ++l) {
      for (std::size_t u = 0; u < net.layers[l - 1].size(); ++u) {
        const NeuronState& s = net.layers[l - 1][u];
        const ModelTag tag = s.kind.tag;
        if (tag == ModelTag::EuclideanDistance) {
          margin = std::min(margin, trace[t][l - 1][u][0]);
          continue;
        }
        if (tag != ModelTag::ReLuBlock && tag != ModelTag::PoolBlock) continue;
        std::vector<double> x;
        for (const auto& c : s.connections) {
          if (c.layer == 0) {
            x.push_back(c.output == 0 ? 0.0 : frames[t].external[c.output - 1]);
          } else if (c.layer < l) {
            x.push_back(trace[t][c.layer - 1][c.unit - 1][c.output - 1]);
          } else {
            x.push_back(t == 0 ? 0.0 : trace[t - 1][c.layer - 1][c.unit - 1][c.output - 1]);
          }
        }
        if (tag == ModelTag::ReLuBlock) {
          margin = std::min(margin, std::abs(x[0]));
        } else {
          std::sort(x.begin(), x.end(), std::greater<>());
          margin = std::min(margin, x[0] - x[1]);
        }
      }
    }
  }
  return margin;
}

}  // namespace ibnet::oracle
