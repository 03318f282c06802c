#include "ibnet/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "ibnet/oracle/tape.hpp"

namespace ibnet::oracle {

namespace {

bool has_bias(ModelTag tag) { return tag == ModelTag::Sigmoid || tag == ModelTag::Tanh || tag == ModelTag::Linear; }

std::size_t arity_of(const ModelKind& kind) { return kind.tag == ModelTag::Convolutional ? kind.conv_outputs : 1; }

// Scalar policies: how to lift a double into the evaluation type.
struct LongDoublePolicy {
  using T = long double;
  T lift(double v) const { return v; }
};

struct TapePolicy {
  using T = Var;
  Tape* tape;
  T lift(double v) const { return tape->constant(v); }
};

long double vmax(long double a, long double b) { return a >= b ? a : b; }
Var vmax(const Var& a, const Var& b) { return max(a, b); }

template <class T>
T scale(const T& x, double c) {
  return x * c;
}

template <class P>
std::vector<typename P::T> unit_forward(const P& pol, const NeuronState& s, const std::vector<typename P::T>& w,
                                        const typename P::T& b, const std::vector<typename P::T>& x) {
  using T = typename P::T;
  using std::exp;
  using std::sqrt;
  using std::tanh;
  const NeuronParams& p = s.params;
  switch (s.kind.tag) {
    case ModelTag::Sigmoid:
    case ModelTag::Tanh:
    case ModelTag::Linear: {
      T z = b;
      for (std::size_t k = 0; k < x.size(); ++k) z = z + w[k] * x[k];
      if (s.kind.tag == ModelTag::Linear) return {z};
      if (s.kind.tag == ModelTag::Tanh) return {tanh(z)};
      const T e = exp(scale(z, -2.0 * p.alpha));
      if constexpr (std::is_same_v<T, long double>) {
        return {1.0L / (1.0L + e)};
      } else {
        const T d = e + 1.0;
        const double inv = 1.0 / d.value;
        return {d.tape->record(inv, d.id, -inv * inv)};
      }
    }
    case ModelTag::EuclideanDistance: {
      T acc = pol.lift(0.0);
      for (std::size_t k = 0; k < x.size(); ++k) {
        const T d = w[k] - x[k];
        acc = acc + d * d;
      }
      return {sqrt(acc)};
    }
    case ModelTag::Convolutional: {
      const std::size_t n = s.kind.conv_kernel, m = s.kind.conv_outputs;
      std::vector<T> y;
      for (std::size_t r = 0; r < m; ++r) {
        T acc = pol.lift(0.0);
        for (std::size_t k = 0; k < n; ++k) acc = acc + w[k] * x[k * m + r];
        y.push_back(acc);
      }
      return y;
    }
    case ModelTag::ReLuBlock:
      return {vmax(pol.lift(0.0), x[0])};
    case ModelTag::PoolBlock: {
      T best = x[0];
      for (std::size_t k = 1; k < x.size(); ++k) best = vmax(best, x[k]);
      return {best};
    }
    case ModelTag::GaussBlock:
      return {exp(scale(x[0] * x[0], -p.beta))};
    case ModelTag::MulBlock:
      return {x[0] * x[1]};
    case ModelTag::SumBlock:
      return {x[0] + x[1]};
    case ModelTag::TanhBlock:
      return {tanh(x[0])};
  }
  throw std::logic_error("unknown model kind");
}

template <class T>
using Table = std::vector<std::vector<std::vector<T>>>;

template <class T, class P>
Table<T> zero_table(const Network& net, const P& pol) {
  Table<T> t(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (const auto& u : net.layers[l]) t[l].emplace_back(arity_of(u.kind), pol.lift(0.0));
  }
  return t;
}

// Runs the frames and accumulates the half squared error. `params` are in
// canonical order; `trace` (optional) receives double copies of outputs.
template <class P>
typename P::T run(const Network& net, std::span<const Frame> frames, const std::vector<typename P::T>& params,
                  const P& pol, std::vector<ValueTable>* trace) {
  using T = typename P::T;
  // Split the flat parameter vector per unit.
  std::vector<std::vector<std::vector<T>>> weights(net.layers.size());
  std::vector<std::vector<T>> biases(net.layers.size());
  std::size_t at = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (const auto& u : net.layers[l]) {
      weights[l].emplace_back(params.begin() + static_cast<std::ptrdiff_t>(at),
                              params.begin() + static_cast<std::ptrdiff_t>(at + u.weights.size()));
      at += u.weights.size();
      if (has_bias(u.kind.tag)) {
        biases[l].push_back(params[at++]);
      } else {
        biases[l].push_back(pol.lift(0.0));
      }
    }
  }

  T loss = pol.lift(0.0);
  Table<T> prev = zero_table<T>(net, pol);
  for (const Frame& f : frames) {
    Table<T> cur = zero_table<T>(net, pol);
    for (std::uint32_t l = 1; l <= net.layers.size(); ++l) {
      for (std::size_t u = 0; u < net.layers[l - 1].size(); ++u) {
        const NeuronState& s = net.layers[l - 1][u];
        std::vector<T> x;
        x.reserve(s.connections.size());
        for (const auto& c : s.connections) {
          if (c.layer == 0) {
            x.push_back(pol.lift(c.output == 0 ? 0.0 : f.external.at(c.output - 1)));
          } else if (c.layer < l) {
            x.push_back(cur[c.layer - 1][c.unit - 1][c.output - 1]);
          } else {
            x.push_back(prev[c.layer - 1][c.unit - 1][c.output - 1]);
          }
        }
        cur[l - 1][u] = unit_forward(pol, s, weights[l - 1][u], biases[l - 1][u], x);
        if (s.kind.has_reference) {
          for (std::size_t r = 0; r < cur[l - 1][u].size(); ++r) {
            const T d = cur[l - 1][u][r] + (-f.references.at(s.reference_slots[r] - 1));
            loss = loss + scale(d * d, 0.5);
          }
        }
      }
    }
    if (trace) {
      ValueTable t(cur.size());
      for (std::size_t l = 0; l < cur.size(); ++l) {
        for (const auto& u : cur[l]) {
          std::vector<double> v;
          for (const auto& y : u) v.push_back(value_of(y));
          t[l].push_back(std::move(v));
        }
      }
      trace->push_back(std::move(t));
    }
    prev = std::move(cur);
  }
  return loss;
}

std::vector<double> current_params(const Network& net) {
  std::vector<double> p;
  for (const auto& layer : net.layers) {
    for (const auto& u : layer) {
      p.insert(p.end(), u.weights.begin(), u.weights.end());
      if (has_bias(u.kind.tag)) p.push_back(u.bias);
    }
  }
  return p;
}

}  // namespace

std::vector<ParamId> parameter_ids(const Network& net) {
  std::vector<ParamId> ids;
  for (std::uint32_t l = 1; l <= net.layers.size(); ++l) {
    for (std::uint32_t u = 1; u <= net.layers[l - 1].size(); ++u) {
      const auto& s = net.layers[l - 1][u - 1];
      for (std::uint32_t k = 0; k < s.weights.size(); ++k) ids.push_back({l, u, k, false});
      if (has_bias(s.kind.tag)) ids.push_back({l, u, static_cast<std::uint32_t>(s.weights.size()), true});
    }
  }
  return ids;
}

double sequence_loss(const Network& net, std::span<const Frame> frames) {
  return sequence_loss(net, frames, current_params(net));
}

double sequence_loss(const Network& net, std::span<const Frame> frames, std::span<const double> params) {
  LongDoublePolicy pol;
  std::vector<long double> p(params.begin(), params.end());
  return static_cast<double>(run(net, frames, p, pol, nullptr));
}

std::vector<ValueTable> sequence_trace(const Network& net, std::span<const Frame> frames) {
  LongDoublePolicy pol;
  const auto base = current_params(net);
  std::vector<long double> p(base.begin(), base.end());
  std::vector<ValueTable> trace;
  run(net, frames, p, pol, &trace);
  return trace;
}

std::vector<double> finite_diff_grad(const Network& net, std::span<const Frame> frames, double h) {
  LongDoublePolicy pol;
  const auto base = current_params(net);
  std::vector<long double> p(base.begin(), base.end());
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = static_cast<long double>(base[i]) + h;
    const long double up = run(net, frames, p, pol, nullptr);
    p[i] = static_cast<long double>(base[i]) - h;
    const long double down = run(net, frames, p, pol, nullptr);
    p[i] = base[i];
    g[i] = static_cast<double>((up - down) / (2.0L * h));
  }
  return g;
}

std::vector<double> finite_diff_grad(const Network& net, std::span<const double> external,
                                     std::span<const double> references, double h) {
  const Frame f{{external.begin(), external.end()}, {references.begin(), references.end()}};
  return finite_diff_grad(net, std::span<const Frame>(&f, 1), h);
}

std::vector<double> unrolled_bptt_grad(const Network& net, std::span<const Frame> frames) {
  Tape tape;
  TapePolicy pol{&tape};
  const auto base = current_params(net);
  std::vector<Var> p;
  p.reserve(base.size());
  for (double v : base) p.push_back(tape.variable(v));
  const Var loss = run(net, frames, p, pol, nullptr);
  const auto adj = tape.gradient(loss);
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = adj[p[i].id];
  return g;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

GradientReport compare_gradients(std::span<const ParamId> ids, std::span<const double> analytic,
                                 std::span<const double> numeric, double tolerance) {
  if (ids.size() != analytic.size() || ids.size() != numeric.size()) {
    throw std::invalid_argument("gradient vectors differ in length");
  }
  GradientReport r;
  r.tolerance = tolerance;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double e = relative_error(analytic[i], numeric[i]);
    r.entries.push_back({ids[i], analytic[i], numeric[i], e});
    r.max_rel_error = std::max(r.max_rel_error, e);
  }
  r.pass = r.max_rel_error <= tolerance;
  return r;
}

std::string format_report(const GradientReport& report, std::size_t max_rows) {
  std::vector<std::size_t> order(report.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.entries[a].rel_error > report.entries[b].rel_error;
  });
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %22s %22s %12s\n", "parameter", "analytic", "numeric", "rel_error");
  out += line;
  for (std::size_t i = 0; i < order.size() && i < max_rows; ++i) {
    const auto& e = report.entries[order[i]];
    char name[40];
    if (e.id.bias) {
      std::snprintf(name, sizeof name, "(%u,%u).b", e.id.layer, e.id.unit);
    } else {
      std::snprintf(name, sizeof name, "(%u,%u).w%u", e.id.layer, e.id.unit, e.id.index + 1);
    }
    std::snprintf(line, sizeof line, "%-18s %22.15e %22.15e %12.3e\n", name, e.analytic, e.numeric, e.rel_error);
    out += line;
  }
  std::snprintf(line, sizeof line, "parameters %zu  max_rel_error %.3e  tolerance %.1e  %s\n", report.entries.size(),
                report.max_rel_error, report.tolerance, report.pass ? "PASS" : "FAIL");
  out += line;
  return out;
}

LstmWeights lstm_weights(const Network& net) {
  if (net.layers.size() != 9) throw std::invalid_argument("not an LSTMIT network");
  LstmWeights w;
  w.m = static_cast<std::uint32_t>(net.layers[0].size());
  w.n = net.input_count;
  w.alpha = net.layers[1].front().params.alpha;
  constexpr std::size_t layer_of[4] = {0, 1, 3, 7};
  for (std::size_t g = 0; g < 4; ++g) {
    for (const auto& u : net.layers[layer_of[g]]) {
      w.w[g].push_back(u.weights);
      w.b[g].push_back(u.bias);
    }
  }
  return w;
}

std::vector<std::vector<double>> reference_lstm_forward(const LstmWeights& wt,
                                                        std::span<const std::vector<double>> inputs) {
  const std::size_t n = wt.n, m = wt.m;
  std::vector<double> h(m, 0.0), c(m, 0.0);
  std::vector<std::vector<double>> out;
  auto pre = [&](std::size_t g, std::size_t j, const std::vector<double>& x) {
    double z = wt.b[g][j];
    for (std::size_t k = 0; k < n; ++k) z += wt.w[g][j][k] * x[k];
    for (std::size_t k = 0; k < m; ++k) z += wt.w[g][j][n + k] * h[k];
    return z;
  };
  auto gate = [&](double z) { return 1.0 / (1.0 + std::exp(-2.0 * wt.alpha * z)); };
  for (const auto& x : inputs) {
    std::vector<double> hn(m), cn(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double cand = std::tanh(pre(0, j, x));
      const double in = gate(pre(1, j, x));
      const double forget = gate(pre(2, j, x));
      const double outg = gate(pre(3, j, x));
      cn[j] = cand * in + forget * c[j];
      hn[j] = std::tanh(cn[j]) * outg;
    }
    h = hn;
    c = cn;
    out.push_back(h);
  }
  return out;
}

ConvWiring brute_force_conv_wiring(const ConvGeometry& geo) {
  ConvWiring wiring;
  const std::uint32_t f = geo.f, l1 = geo.l - f + 1, w1 = geo.w - f + 1, m1 = l1 * w1;
  wiring.conv.assign(std::size_t{f} * f * geo.h * m1, 0);
  // Window anchored at (sa, sb), cell (ca, cb) of colour slice c.
  for (std::uint32_t c = 0; c < geo.h; ++c) {
    for (std::uint32_t cb = 0; cb < f; ++cb) {
      for (std::uint32_t ca = 0; ca < f; ++ca) {
        const std::uint32_t alpha = c * f * f + cb * f + ca + 1;
        for (std::uint32_t sa = 0; sa < l1; ++sa) {
          for (std::uint32_t sb = 0; sb < w1; ++sb) {
            const std::uint32_t beta = sa * w1 + sb + 1;
            const std::uint32_t row = sa + ca + 1, col = sb + cb + 1;
            wiring.conv[(alpha - 1) * m1 + (beta - 1)] = row + geo.l * (col - 1) + geo.l * geo.w * c;
          }
        }
      }
    }
  }
  if (geo.g == 0 || l1 % geo.g != 0 || w1 % geo.g != 0) return wiring;
  const std::uint32_t g = geo.g, l2 = l1 / g, w2 = w1 / g, m2 = l2 * w2;
  wiring.pool.assign(std::size_t{geo.n1} * m2, std::vector<std::uint32_t>(std::size_t{g} * g, 0));
  for (std::uint32_t a = 0; a < geo.n1; ++a) {
    for (std::uint32_t pb = 0; pb < w2; ++pb) {
      for (std::uint32_t pa = 0; pa < l2; ++pa) {
        const std::uint32_t beta = pb * l2 + pa + 1;
        for (std::uint32_t ra = 0; ra < g; ++ra) {
          for (std::uint32_t rb = 0; rb < g; ++rb) {
            const std::uint32_t kk = ra * g + rb + 1;
            const std::uint32_t sa = pa * g + ra, sb = pb * g + rb;
            wiring.pool[a * m2 + beta - 1][kk - 1] = a * m1 + sa * w1 + sb + 1;
          }
        }
      }
    }
  }
  return wiring;
}

std::size_t count_wiring_mismatches(const LayerPlan& plan, const ConvWiring& wiring) {
  std::size_t bad = 0;
  if (plan.layers.size() < 3) return wiring.conv.size() + wiring.pool.size();
  for (const auto& u : plan.layers[0]) {
    if (u.connections.size() != wiring.conv.size()) {
      bad += wiring.conv.size();
      continue;
    }
    for (std::size_t s = 0; s < wiring.conv.size(); ++s) {
      if (!(u.connections[s] == external_input(wiring.conv[s]))) ++bad;
    }
  }
  const auto& pools = plan.layers[2];
  if (pools.size() != wiring.pool.size()) return bad + wiring.pool.size();
  for (std::size_t j = 0; j < pools.size(); ++j) {
    for (std::size_t kk = 0; kk < wiring.pool[j].size(); ++kk) {
      const ConnectionTriple want{2, wiring.pool[j][kk], 1};
      if (kk >= pools[j].connections.size() || !(pools[j].connections[kk] == want)) ++bad;
    }
  }
  return bad;
}

}  // namespace ibnet::oracle
