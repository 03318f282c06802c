#include "ibnet/architectures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ibnet/error.hpp"

namespace ibnet {

std::uint32_t theta(std::uint32_t x, std::uint32_t y) { return x % y == 0 ? y : x % y; }
std::uint32_t lambda_plus(std::uint32_t x, std::uint32_t y) { return x % y == 0 ? x / y : x / y + 1; }
std::uint32_t lambda_minus(std::uint32_t x, std::uint32_t y) { return x % y == 0 ? x / y - 1 : x / y; }

bool ConvGeometry::valid() const {
  if (l == 0 || w == 0 || h == 0 || f == 0 || g == 0 || n1 == 0 || m3 == 0) return false;
  if (f > l || f > w) return false;
  return l1() % g == 0 && w1() % g == 0;
}

std::uint32_t pixel_index(const ConvGeometry& geo, std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  return a + geo.l * (b - 1) + geo.l * geo.w * (c - 1);
}

std::uint32_t conv_input_index(const ConvGeometry& geo, std::uint32_t alpha, std::uint32_t beta,
                               IndexFormula formula) {
  if (!geo.valid()) throw IndexError("invalid convolution geometry");
  if (alpha < 1 || alpha > geo.kernel() || beta < 1 || beta > geo.m1()) {
    throw IndexError("convolution index out of range");
  }
  const std::uint32_t f = geo.f, l = geo.l, w1 = geo.w1();
  const std::uint32_t column = formula == IndexFormula::Printed ? lambda_plus(alpha, f)
                                                                : lambda_plus(theta(alpha, f * f), f);
  return theta(alpha, f) + l * (column - 1) + l * geo.w * lambda_minus(alpha, f * f) + l * (theta(beta, w1) - 1) +
         lambda_minus(beta, w1);
}

std::uint32_t pool_input_index(const ConvGeometry& geo, std::uint32_t alpha, std::uint32_t beta, std::uint32_t kk,
                               IndexFormula formula) {
  if (!geo.valid()) throw IndexError("invalid convolution geometry");
  if (alpha < 1 || alpha > geo.n1 || beta < 1 || beta > geo.m2() || kk < 1 || kk > geo.g * geo.g) {
    throw IndexError("pooling index out of range");
  }
  const std::uint32_t g = geo.g;
  const std::uint32_t stride = formula == IndexFormula::Printed ? geo.l1() : geo.w1();
  const std::uint32_t blocks = formula == IndexFormula::Printed ? geo.w2() : geo.l2();
  return (alpha - 1) * geo.m1() + theta(kk, g) + stride * (lambda_plus(kk, g) - 1) +
         g * stride * (theta(beta, blocks) - 1) + g * lambda_minus(beta, blocks);
}

namespace {

UnitPlan unit(ModelKind kind, std::vector<ConnectionTriple> connections, const NeuronParams& params,
              bool recurrent = false) {
  UnitPlan u;
  u.kind = kind;
  u.connections = std::move(connections);
  u.params = params;
  u.recurrent = recurrent;
  return u;
}

void require_positive(std::uint32_t v, const char* what) {
  if (v == 0) throw BuildError(std::string(what) + " must be at least 1");
}

}  // namespace

LayerPlan build_lstmit(std::uint32_t n, std::uint32_t m, const NeuronParams& params, const LstmitOptions& options) {
  require_positive(n, "LSTMIT input count");
  require_positive(m, "LSTMIT unit count");
  NeuronParams p = params;
  p.max_m = options.max_m;
  LayerPlan plan;
  plan.name = "lstmit";
  plan.input_count = n;
  plan.reference_count = m;
  plan.layers.resize(9);

  std::vector<ConnectionTriple> gate_inputs;
  for (std::uint32_t k = 1; k <= n; ++k) gate_inputs.push_back(external_input(k));
  for (std::uint32_t k = 1; k <= m; ++k) gate_inputs.push_back({9, k, 1});

  const ModelKind sigmoid = ModelKind::of(ModelTag::Sigmoid);
  for (std::uint32_t j = 1; j <= m; ++j) {
    UnitPlan input = unit(ModelKind::of(ModelTag::Tanh), gate_inputs, p, true);
    if (options.adjustable) {
      input.adjustable = true;
      input.protect_recurrent_links = true;
      input.params.p_deep1 = 0.0;
      input.params.p_rec = 0.0;
      for (std::uint32_t k = 0; k < (n + 1) / 2; ++k) input.connections[k] = kDisconnected;
    }
    plan.layers[0].push_back(std::move(input));
    plan.layers[1].push_back(unit(sigmoid, gate_inputs, p, true));
    plan.layers[2].push_back(unit(ModelKind::of(ModelTag::MulBlock), {{1, j, 1}, {2, j, 1}}, p));
    plan.layers[3].push_back(unit(sigmoid, gate_inputs, p, true));
    plan.layers[4].push_back(unit(ModelKind::of(ModelTag::MulBlock), {{4, j, 1}, {6, j, 1}}, p, true));
    plan.layers[5].push_back(unit(ModelKind::of(ModelTag::SumBlock), {{3, j, 1}, {5, j, 1}}, p));
    plan.layers[6].push_back(unit(ModelKind::of(ModelTag::TanhBlock), {{6, j, 1}}, p));
    plan.layers[7].push_back(unit(sigmoid, gate_inputs, p, true));
    UnitPlan out = unit(ModelKind::of(ModelTag::MulBlock, true), {{7, j, 1}, {8, j, 1}}, p, true);
    out.reference_slots = {j};
    plan.layers[8].push_back(std::move(out));
    plan.outputs.push_back({9, j, 1});
  }
  validate(plan);
  return plan;
}

LayerPlan build_rbfit(std::uint32_t n, std::uint32_t m, const NeuronParams& params, const RbfOptions& options) {
  require_positive(n, "RBFIT input count");
  require_positive(m, "RBFIT unit count");
  LayerPlan plan;
  plan.name = "rbfit";
  plan.input_count = n;
  plan.reference_count = 1;
  plan.layers.resize(3);
  std::vector<ConnectionTriple> inputs;
  for (std::uint32_t k = 1; k <= n; ++k) inputs.push_back(external_input(k));
  for (std::uint32_t j = 1; j <= m; ++j) {
    UnitPlan centre = unit(ModelKind::of(ModelTag::EuclideanDistance), inputs, params);
    centre.init_range = options.centre_range;
    plan.layers[0].push_back(std::move(centre));
    plan.layers[1].push_back(unit(ModelKind::of(ModelTag::GaussBlock), {{1, j, 1}}, params));
  }
  std::vector<ConnectionTriple> readout;
  for (std::uint32_t k = 1; k <= m; ++k) readout.push_back({2, k, 1});
  UnitPlan out = unit(ModelKind::of(ModelTag::Linear, true), readout, params);
  out.reference_slots = {1};
  if (options.adjustable) {
    out.adjustable = true;
    out.params.p_deep1 = 0.0;
    out.params.p_rec = 0.0;
    for (std::uint32_t k = (m + 1) / 2; k < m; ++k) out.connections[k] = kDisconnected;
  }
  plan.layers[2].push_back(std::move(out));
  plan.outputs.push_back({3, 1, 1});
  validate(plan);
  return plan;
}

LayerPlan build_rrbf_chaotic(std::uint32_t m, std::uint32_t max_m, const NeuronParams& params,
                             const RbfOptions& options) {
  require_positive(m, "RRBF unit count");
  NeuronParams p = params;
  p.max_m = max_m;
  LayerPlan plan;
  plan.name = "rrbf";
  plan.input_count = 1;
  plan.reference_count = 1;
  plan.layers.resize(4);
  for (std::uint32_t j = 1; j <= m; ++j) {
    plan.layers[0].push_back(unit(ModelKind::of(ModelTag::SumBlock), {external_input(1), {4, 1, 1}}, p, true));
    UnitPlan centre = unit(ModelKind::of(ModelTag::EuclideanDistance), {{1, j, 1}}, p);
    centre.init_range = options.centre_range;
    plan.layers[1].push_back(std::move(centre));
    plan.layers[2].push_back(unit(ModelKind::of(ModelTag::GaussBlock), {{2, j, 1}}, p));
  }
  std::vector<ConnectionTriple> readout;
  for (std::uint32_t k = 1; k <= m; ++k) readout.push_back({3, k, 1});
  UnitPlan out = unit(ModelKind::of(ModelTag::Tanh, true), readout, p, true);
  out.reference_slots = {1};
  if (options.adjustable) {
    out.adjustable = true;
    out.params.p_deep1 = 0.0;
    out.params.p_rec = 0.0;
    for (std::uint32_t k = 1; k < m; ++k) out.connections[k] = kDisconnected;
  }
  plan.layers[3].push_back(std::move(out));
  plan.outputs.push_back({4, 1, 1});
  validate(plan);
  return plan;
}

LayerPlan build_convit(const ConvGeometry& geo, const NeuronParams& params, const ConvitOptions& options) {
  if (!geo.valid()) {
    throw BuildError("convolution geometry needs f <= l, f <= w and a pool side dividing both conv output sides");
  }
  const std::uint32_t m1 = geo.m1(), m2 = geo.m2(), n1 = geo.n1;
  LayerPlan plan;
  plan.name = "convit";
  plan.input_count = geo.l * geo.w * geo.h;
  plan.reference_count = n1 * geo.m3;
  plan.layers.resize(4);

  std::vector<ConnectionTriple> conv_inputs(std::size_t{geo.kernel()} * m1);
  for (std::uint32_t a = 1; a <= geo.kernel(); ++a) {
    for (std::uint32_t b = 1; b <= m1; ++b) {
      conv_inputs[(a - 1) * m1 + (b - 1)] = external_input(conv_input_index(geo, a, b, options.formula));
    }
  }
  for (std::uint32_t j = 1; j <= n1; ++j) {
    plan.layers[0].push_back(unit(ModelKind::conv(geo.kernel(), m1), conv_inputs, params));
  }
  for (std::uint32_t a = 1; a <= n1; ++a) {
    for (std::uint32_t b = 1; b <= m1; ++b) {
      plan.layers[1].push_back(unit(ModelKind::of(ModelTag::ReLuBlock), {{1, a, b}}, params));
    }
  }
  for (std::uint32_t a = 1; a <= n1; ++a) {
    for (std::uint32_t b = 1; b <= m2; ++b) {
      std::vector<ConnectionTriple> window;
      for (std::uint32_t kk = 1; kk <= geo.g * geo.g; ++kk) {
        window.push_back({2, pool_input_index(geo, a, b, kk, options.formula), 1});
      }
      plan.layers[2].push_back(unit(ModelKind::of(ModelTag::PoolBlock), std::move(window), params));
    }
  }
  std::vector<ConnectionTriple> readout;
  for (std::uint32_t k = 1; k <= n1 * m2; ++k) readout.push_back({3, k, 1});
  for (std::uint32_t j = 1; j <= n1 * geo.m3; ++j) {
    UnitPlan out = unit(ModelKind::of(ModelTag::Sigmoid, true), readout, params);
    out.reference_slots = {j};
    if (options.adjustable) {
      out.adjustable = true;
      out.params.p_deep1 = 0.0;
      out.params.p_rec = 0.0;
      for (std::size_t k = (readout.size() + 1) / 2; k < readout.size(); ++k) out.connections[k] = kDisconnected;
    }
    plan.layers[3].push_back(std::move(out));
    plan.outputs.push_back({4, j, 1});
  }
  validate(plan);
  return plan;
}

LayerPlan build_percit(std::uint32_t input_count, std::span<const std::uint32_t> layer_sizes,
                       const NeuronParams& params, std::uint64_t seed, const PercitOptions& options) {
  require_positive(input_count, "PERCIT input count");
  if (layer_sizes.size() < 3) throw BuildError("PERCIT needs at least three layers");
  for (auto s : layer_sizes) require_positive(s, "PERCIT layer size");
  if (!(options.initial_density > 0.0 && options.initial_density <= 1.0)) {
    throw BuildError("PERCIT initial density must lie in (0,1]");
  }
  NeuronParams p = params;
  p.p_rec = 0.0;
  p.p_deep1 = 0.1;
  p.t_o = 4;
  p.x_max = 1.0;

  std::mt19937_64 rng(seed);
  LayerPlan plan;
  plan.name = "percit";
  plan.input_count = input_count;
  plan.reference_count = layer_sizes.back();
  plan.layers.resize(layer_sizes.size());

  std::vector<ConnectionTriple> inputs;
  for (std::uint32_t k = 1; k <= input_count; ++k) inputs.push_back(external_input(k));
  for (std::uint32_t j = 1; j <= layer_sizes[0]; ++j) {
    UnitPlan u = unit(ModelKind::of(ModelTag::Sigmoid), inputs, params);
    u.init_range = options.init_range;
    plan.layers[0].push_back(std::move(u));
  }

  for (std::size_t li = 1; li < layer_sizes.size(); ++li) {
    const std::uint32_t prev = layer_sizes[li - 1];
    const auto linked = static_cast<std::uint32_t>(
        std::max<long>(1, std::lround(options.initial_density * static_cast<double>(prev))));
    const bool last = li + 1 == layer_sizes.size();
    std::vector<std::uint32_t> pool(prev);
    for (std::uint32_t j = 1; j <= layer_sizes[li]; ++j) {
      // Partial Fisher-Yates: the first `linked` entries become distinct targets.
      std::iota(pool.begin(), pool.end(), 1u);
      for (std::uint32_t k = 0; k < linked; ++k) {
        std::uniform_int_distribution<std::uint32_t> pick(k, prev - 1);
        std::swap(pool[k], pool[pick(rng)]);
      }
      std::vector<ConnectionTriple> conns(prev, kDisconnected);
      for (std::uint32_t k = 0; k < linked; ++k) conns[k] = {static_cast<std::uint32_t>(li), pool[k], 1};
      UnitPlan u = unit(ModelKind::of(ModelTag::Sigmoid, last), std::move(conns), p);
      u.adjustable = true;
      u.init_range = options.init_range;
      if (last) u.reference_slots = {j};
      plan.layers[li].push_back(std::move(u));
    }
  }
  for (std::uint32_t j = 1; j <= layer_sizes.back(); ++j) {
    plan.outputs.push_back({static_cast<std::uint32_t>(layer_sizes.size()), j, 1});
  }
  validate(plan);
  return plan;
}

}  // namespace ibnet
