#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ibnet/network.hpp"
#include "ibnet/oracle/oracle.hpp"

namespace ibnet::oracle {

struct RandomNetOptions {
  std::uint32_t max_layers = 4;   // at least 2
  std::uint32_t max_units = 30;   // over all layers
  std::uint32_t max_inputs = 5;
  std::uint32_t max_width = 8;    // units per layer
  double weight_range = 1.0;
  double mu = 0.05;
};

// Layered net of weighted-sum, Euclidean and block units (no
// convolution), wired to random lower layers and external inputs. The last
// layer carries references.
LayerPlan random_feedforward_plan(std::mt19937_64& rng, const RandomNetOptions& options = {});

// Every unit recurrent with stacks of depth max_m; includes links to the
// own layer and to higher layers (read from the previous step).
LayerPlan random_recurrent_plan(std::mt19937_64& rng, std::uint32_t max_m, const RandomNetOptions& options = {});

// Sigmoid, Tanh and Linear units with adjustable links, about half of them
// recurrent and about half of the non-leading slots initially empty. The
// last layer carries references.
LayerPlan random_adjustable_plan(std::mt19937_64& rng, double p_deep1, double p_rec,
                                 const RandomNetOptions& options = {});

std::vector<Frame> random_frames(std::mt19937_64& rng, const Network& net, std::size_t count);

// Smallest distance to a non-differentiable point over a trace: ReLU
// inputs near 0, pooling near-ties and Euclidean outputs near 0. Returns
// +inf when the net has none of these units.
double kink_margin(const Network& net, std::span<const Frame> frames);

}  // namespace ibnet::oracle
