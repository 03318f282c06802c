#include "ibnet/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "ibnet/error.hpp"

namespace ibnet {

namespace {

constexpr std::array<std::string_view, 11> kTagNames = {
    "sigmoid", "tanh", "linear", "euclidean", "conv", "relu", "pool", "gauss", "mul", "sum", "tanh_block",
};

double dot_bias(std::span<const double> w, std::span<const double> x, double b) {
  double z = b;
  for (std::size_t k = 0; k < w.size(); ++k) z += w[k] * x[k];
  return z;
}

// d y / d z of the weighted-sum kinds, expressed through y.
double weighted_slope(ModelTag tag, double y, const NeuronParams& p) {
  switch (tag) {
    case ModelTag::Sigmoid:
      return 2.0 * p.alpha * y * (1.0 - y);
    case ModelTag::Tanh:
      return 1.0 - y * y;
    default:
      return 1.0;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ModelError(what);
}

}  // namespace

std::string_view to_string(ModelTag tag) { return kTagNames[static_cast<std::size_t>(tag)]; }

std::optional<ModelTag> parse_model_tag(std::string_view name) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == name) return static_cast<ModelTag>(i);
  }
  return std::nullopt;
}

bool is_block(ModelTag tag) {
  switch (tag) {
    case ModelTag::ReLuBlock:
    case ModelTag::PoolBlock:
    case ModelTag::GaussBlock:
    case ModelTag::MulBlock:
    case ModelTag::SumBlock:
    case ModelTag::TanhBlock:
      return true;
    default:
      return false;
  }
}

bool is_weighted_sum(ModelTag tag) {
  return tag == ModelTag::Sigmoid || tag == ModelTag::Tanh || tag == ModelTag::Linear;
}

std::size_t output_arity(const ModelKind& kind) {
  return kind.tag == ModelTag::Convolutional ? kind.conv_outputs : 1;
}

std::size_t weight_count(const ModelKind& kind, std::size_t slots) {
  if (is_block(kind.tag)) return 0;
  if (kind.tag == ModelTag::Convolutional) return kind.conv_kernel;
  return slots;
}

void check_arity(const ModelKind& kind, std::size_t slots) {
  switch (kind.tag) {
    case ModelTag::MulBlock:
    case ModelTag::SumBlock:
      require(slots == 2, "multiplication and summation blocks take exactly two inputs");
      break;
    case ModelTag::ReLuBlock:
    case ModelTag::GaussBlock:
    case ModelTag::TanhBlock:
      require(slots == 1, "single-input block must have exactly one input");
      break;
    case ModelTag::Convolutional:
      require(kind.conv_kernel > 0 && kind.conv_outputs > 0, "convolutional unit needs a kernel and outputs");
      require(slots == std::size_t{kind.conv_kernel} * kind.conv_outputs,
              "convolutional unit must have kernel*outputs input slots");
      break;
    default:
      require(slots >= 1, "unit needs at least one input");
  }
}

double activate(ModelTag tag, double z, const NeuronParams& p) {
  switch (tag) {
    case ModelTag::Sigmoid:
      return 1.0 / (1.0 + std::exp(-2.0 * p.alpha * z));
    case ModelTag::Tanh:
      return std::tanh(z);
    default:
      return z;
  }
}

void forward_into(const ModelKind& kind, std::span<const double> w, double b, std::span<const double> x,
                  const NeuronParams& p, std::span<double> y) {
  check_arity(kind, x.size());
  require(w.size() == weight_count(kind, x.size()), "weight count does not match the inputs");
  require(y.size() == output_arity(kind), "output buffer has the wrong arity");
  switch (kind.tag) {
    case ModelTag::Sigmoid:
    case ModelTag::Tanh:
    case ModelTag::Linear:
      y[0] = activate(kind.tag, dot_bias(w, x, b), p);
      return;
    case ModelTag::EuclideanDistance: {
      double s = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) s += (w[k] - x[k]) * (w[k] - x[k]);
      y[0] = std::sqrt(s);
      return;
    }
    case ModelTag::Convolutional: {
      const std::size_t m = kind.conv_outputs;
      for (std::size_t r = 0; r < m; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < kind.conv_kernel; ++k) s += w[k] * x[k * m + r];
        y[r] = s;
      }
      return;
    }
    case ModelTag::ReLuBlock:
      y[0] = std::max(0.0, x[0]);
      return;
    case ModelTag::PoolBlock:
      y[0] = *std::max_element(x.begin(), x.end());
      return;
    case ModelTag::GaussBlock:
      y[0] = std::exp(-p.beta * x[0] * x[0]);
      return;
    case ModelTag::MulBlock:
      y[0] = x[0] * x[1];
      return;
    case ModelTag::SumBlock:
      y[0] = x[0] + x[1];
      return;
    case ModelTag::TanhBlock:
      y[0] = std::tanh(x[0]);
      return;
  }
}

std::vector<double> forward(const ModelKind& kind, std::span<const double> w, double b,
                            std::span<const double> x, const NeuronParams& p) {
  std::vector<double> y(output_arity(kind));
  forward_into(kind, w, b, x, p, y);
  return y;
}

CorrectionFactor correction_factor(const ModelKind& kind, std::span<const double> outputs,
                                   std::optional<std::span<const double>> references,
                                   std::span<const double> incoming, DerivativeMode mode,
                                   std::span<const std::uint8_t> mask) {
  const std::size_t m = output_arity(kind);
  if (outputs.size() != m || incoming.size() != m) {
    throw ContractError("correction factor needs one output and one incoming error per output");
  }
  if (!mask.empty() && mask.size() != m) throw ContractError("dropout mask arity mismatch");
  if (kind.has_reference && (!references || references->size() != m)) {
    throw ContractError("reference unit evaluated without its reference inputs");
  }

  CorrectionFactor cf;
  cf.per_output.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    double in = incoming[r];
    if (!mask.empty()) in *= mask[r];
    cf.per_output[r] = kind.has_reference ? (outputs[r] - (*references)[r]) + in : in;
  }
  cf.value = std::accumulate(cf.per_output.begin(), cf.per_output.end(), 0.0);
  if (kind.tag == ModelTag::EuclideanDistance) {
    // The half factor pairs with the 2 mu in the Euclidean update. The
    // literal hidden branch keeps the plain incoming sum.
    if (kind.has_reference || mode == DerivativeMode::Corrected) cf.value *= 0.5;
  }
  return cf;
}

BackpropCoeffs backprop_coeffs(const ModelKind& kind, const NeuronSignals& s, const CorrectionFactor& cf,
                               int gate, const NeuronParams& p, DerivativeMode mode) {
  const std::size_t n = s.inputs.size();
  BackpropCoeffs out;
  out.values.assign(n, 0.0);
  const double d = cf.value;
  const double y = s.outputs.empty() ? 0.0 : s.outputs[0];

  if (kind.tag == ModelTag::EuclideanDistance && y < kEuclideanSingularity) {
    out.degenerate = true;
    return out;
  }
  if (gate == 0) return out;

  switch (kind.tag) {
    case ModelTag::Sigmoid:
    case ModelTag::Tanh:
    case ModelTag::Linear: {
      const double g = weighted_slope(kind.tag, y, p) * d;
      for (std::size_t k = 0; k < n; ++k) out.values[k] = g * s.weights[k];
      break;
    }
    case ModelTag::EuclideanDistance:
      for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = mode == DerivativeMode::Corrected ? 2.0 * d * (s.inputs[k] - s.weights[k]) / y
                                                          : d * (s.weights[k] - s.inputs[k]) / y;
      }
      break;
    case ModelTag::Convolutional: {
      const std::size_t m = kind.conv_outputs;
      for (std::size_t k1 = 0; k1 < kind.conv_kernel; ++k1) {
        for (std::size_t k2 = 0; k2 < m; ++k2) {
          const double e = mode == DerivativeMode::Corrected ? cf.per_output[k2] : d;
          out.values[k1 * m + k2] = e * s.weights[k1];
        }
      }
      break;
    }
    case ModelTag::ReLuBlock:
      out.values[0] = mode == DerivativeMode::Corrected
                          ? (s.inputs[0] > 0.0 ? d : 0.0)
                          : d / (1.0 + std::exp(-2.0 * p.alpha * s.inputs[0]));
      break;
    case ModelTag::PoolBlock:
      for (std::size_t k = 0; k < n; ++k) out.values[k] = s.inputs[k] == y ? d : 0.0;
      break;
    case ModelTag::GaussBlock:
      out.values[0] = mode == DerivativeMode::Corrected
                          ? -2.0 * p.beta * s.inputs[0] * y * d
                          : -2.0 * p.beta * y * std::sqrt(std::log(p.beta) - std::log(y)) * d;
      break;
    case ModelTag::MulBlock:
      out.values[0] = d * s.inputs[1];
      out.values[1] = d * s.inputs[0];
      break;
    case ModelTag::SumBlock:
      out.values[0] = d;
      out.values[1] = d;
      break;
    case ModelTag::TanhBlock:
      out.values[0] = (1.0 - y * y) * d;
      break;
  }
  return out;
}

WeightUpdate weight_increments(const ModelKind& kind, const NeuronSignals& s, const CorrectionFactor& cf,
                               int gate, const NeuronParams& p) {
  WeightUpdate u{std::vector<double>(s.weights.size(), 0.0), 0.0};
  if (gate == 0 || is_block(kind.tag)) return u;
  const double y = s.outputs.empty() ? 0.0 : s.outputs[0];

  switch (kind.tag) {
    case ModelTag::Sigmoid:
    case ModelTag::Tanh:
    case ModelTag::Linear: {
      const double g = p.mu * weighted_slope(kind.tag, y, p) * cf.value;
      for (std::size_t k = 0; k < u.weights.size(); ++k) u.weights[k] = -g * s.inputs[k];
      u.bias = -g;
      break;
    }
    case ModelTag::EuclideanDistance:
      if (y < kEuclideanSingularity) break;
      for (std::size_t k = 0; k < u.weights.size(); ++k) {
        u.weights[k] = -2.0 * p.mu * cf.value * (s.weights[k] - s.inputs[k]) / y;
      }
      break;
    case ModelTag::Convolutional: {
      const std::size_t m = kind.conv_outputs;
      for (std::size_t k = 0; k < kind.conv_kernel; ++k) {
        double acc = 0.0;
        for (std::size_t r = 0; r < m; ++r) acc += s.inputs[k * m + r] * cf.per_output[r];
        u.weights[k] = -p.mu * acc;
      }
      break;
    }
    default:
      break;
  }
  return u;
}

WeightUpdate update_weights(const ModelKind& kind, const NeuronSignals& s, const CorrectionFactor& cf,
                            int gate, const NeuronParams& p, DerivativeMode) {
  WeightUpdate u = weight_increments(kind, s, cf, gate, p);
  for (std::size_t k = 0; k < u.weights.size(); ++k) u.weights[k] += s.weights[k];
  u.bias += s.bias;
  return u;
}

int detect_paralysis(std::span<const double> weights, const NeuronParams& p) {
  if (weights.empty()) return 0;
  double s = 0.0;
  for (double w : weights) s += std::abs(w);
  return s > 0.7 * p.omega_max * static_cast<double>(weights.size()) ? 1 : 0;
}

int detect_local_min(std::span<const std::vector<double>> deltas, std::span<const int> gates,
                     const NeuronParams& p) {
  if (deltas.size() < p.t_xi || gates.size() < p.t_xi) return 0;
  const std::size_t first = deltas.size() - p.t_xi;
  const std::size_t gfirst = gates.size() - p.t_xi;
  int product = 1;
  for (std::size_t t = gfirst; t < gates.size(); ++t) product *= gates[t];
  const std::size_t n = deltas.back().size();
  double lhs = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double drift = 0.0;
    for (std::size_t t = first; t < deltas.size(); ++t) drift += deltas[t][k];
    lhs += std::abs(drift);
  }
  return lhs < p.omega_min * static_cast<double>(n) * product ? 1 : 0;
}

}  // namespace ibnet
