#pragma once

#include <initializer_list>
#include <vector>

#include "ibnet/network.hpp"

namespace ibnet::test {

inline UnitPlan make_unit(ModelKind kind, std::initializer_list<ConnectionTriple> conns, bool recurrent = false) {
  UnitPlan u;
  u.kind = kind;
  u.connections = conns;
  u.recurrent = recurrent;
  return u;
}

// Sets every weight and bias to `w` (weights of empty slots stay 0).
inline void fill_weights(Network& net, double w, double b = 0.0) {
  for (auto& layer : net.layers) {
    for (auto& s : layer) {
      for (std::size_t k = 0; k < s.weights.size(); ++k) {
        if (s.kind.tag == ModelTag::Convolutional || !s.connections[k].empty()) s.weights[k] = w;
      }
      s.bias = b;
    }
  }
}

}  // namespace ibnet::test
