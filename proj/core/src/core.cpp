#include "ibnet/core.hpp"

#include "ibnet/error.hpp"

namespace ibnet {

LinkMode classify(const ConnectionTriple& c, std::uint32_t own_layer) {
  if (c.layer == 0) {
    if (c.unit != 0) throw TopologyError("connection " + to_string(c) + " has a unit but no layer");
    return c.output == 0 ? LinkMode::Disconnected : LinkMode::External;
  }
  if (c.unit == 0 || c.output == 0) {
    throw TopologyError("connection " + to_string(c) + " is missing a unit or output index");
  }
  return c.layer < own_layer ? LinkMode::Ordinary : LinkMode::Recurrent;
}

std::string to_string(const ConnectionTriple& c) {
  return "(" + std::to_string(c.layer) + "," + std::to_string(c.unit) + "," +
         std::to_string(c.output) + ")";
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void validate(const NeuronParams& p) {
  if (!(p.omega_max > 0.0)) throw ContractError("omega_max must be positive");
  if (!(p.omega_min > 0.0) || !(p.omega_min < p.omega_max)) {
    throw ContractError("omega_min must be positive and below omega_max");
  }
  if (p.t_xi == 0) throw ContractError("t_xi must be positive");
  if (!(p.mu > 0.0)) throw ContractError("mu must be positive");
  if (!(p.alpha >= 1.0)) throw ContractError("alpha must be at least 1");
  if (!(p.beta > 0.0)) throw ContractError("beta must be positive");
  if (p.max_m == 0) throw ContractError("max_m must be positive");
  if (!(p.x_max > 0.0)) throw ContractError("x_max must be positive");
  if (p.t_o == 0) throw ContractError("t_o must be positive");
  if (!is_probability(p.p_deep1) || !is_probability(p.p_rec) || !is_probability(p.dropout_keep)) {
    throw ContractError("probabilities must lie in [0,1]");
  }
}

}  // namespace ibnet
