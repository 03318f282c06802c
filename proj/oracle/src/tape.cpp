#include "ibnet/oracle/tape.hpp"

#include <cmath>

namespace ibnet::oracle {

Var Tape::variable(double v) { return record(v, kNone, 0.0); }

Var Tape::record(double v, std::uint32_t a, double da, std::uint32_t b, double db) {
  nodes_.push_back({a, b, da, db});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1), v};
}

std::vector<double> Tape::gradient(const Var& out) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  adj[out.id] = 1.0;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (adj[i] == 0.0) continue;
    if (n.a != kNone) adj[n.a] += adj[i] * n.da;
    if (n.b != kNone) adj[n.b] += adj[i] * n.db;
  }
  return adj;
}

Var operator+(const Var& x, const Var& y) { return x.tape->record(x.value + y.value, x.id, 1.0, y.id, 1.0); }
Var operator-(const Var& x, const Var& y) { return x.tape->record(x.value - y.value, x.id, 1.0, y.id, -1.0); }
Var operator*(const Var& x, const Var& y) {
  return x.tape->record(x.value * y.value, x.id, y.value, y.id, x.value);
}
Var operator+(const Var& x, double c) { return x.tape->record(x.value + c, x.id, 1.0); }
Var operator*(const Var& x, double c) { return x.tape->record(x.value * c, x.id, c); }
Var operator-(const Var& x) { return x.tape->record(-x.value, x.id, -1.0); }

Var exp(const Var& x) {
  const double e = std::exp(x.value);
  return x.tape->record(e, x.id, e);
}

Var tanh(const Var& x) {
  const double t = std::tanh(x.value);
  return x.tape->record(t, x.id, 1.0 - t * t);
}

Var sqrt(const Var& x) {
  const double s = std::sqrt(x.value);
  return x.tape->record(s, x.id, s > 0.0 ? 0.5 / s : 0.0);
}

Var max(const Var& x, const Var& y) {
  return x.value >= y.value ? x.tape->record(x.value, x.id, 1.0, y.id, 0.0)
                            : x.tape->record(y.value, x.id, 0.0, y.id, 1.0);
}

}  // namespace ibnet::oracle
