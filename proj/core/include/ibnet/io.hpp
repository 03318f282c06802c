#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ibnet/architectures.hpp"
#include "ibnet/engine.hpp"
#include "ibnet/network.hpp"

namespace ibnet {

// ---- IDX ------------------------------------------------------------------

struct IdxTensor {
  std::uint32_t magic = 0;  // 0x801 labels, 0x803 images
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t count() const { return dims.empty() ? 0 : dims[0]; }
  // Elements per item: product of the trailing dimensions.
  std::size_t item_size() const;
  // Item i with bytes divided by 255.
  std::vector<double> item(std::size_t i) const;
};

// Parses unsigned-byte IDX data. Throws FormatError with the byte offset
// of a bad magic number or of the first missing byte.
IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
IdxTensor load_idx(const std::string& path);

// ---- series -----------------------------------------------------------------

// One number per line. A non-numeric first line is a header and skipped;
// any other non-numeric line throws FormatError carrying the 1-based line.
std::vector<double> parse_series_csv(std::string_view text);
std::vector<double> load_series_csv(const std::string& path);

// Y(k+1) = r Y(k) (1 - Y(k)) from y0, `length` values, each mapped to
// 2 Y - 1 so the series lies in (-1, 1).
std::vector<double> logistic_series(std::size_t length, double r = 3.9, double y0 = 0.3);

// ---- configuration ----------------------------------------------------------

// key = value lines under [section] headers; '#' and ';' start comments.
struct ConfigValue {
  std::string text;
  std::size_t line = 0;
};
using ConfigDocument = std::map<std::string, std::map<std::string, ConfigValue>>;

// Throws ConfigError with the line number on malformed lines.
ConfigDocument parse_config_document(std::string_view text);

enum class Architecture : std::uint8_t { Percit, Rbfit, Rrbf, Lstmit, Convit };
std::string_view to_string(Architecture a);

struct RunConfig {
  Architecture architecture = Architecture::Percit;
  // [architecture]
  std::uint32_t inputs = 784;         // PERCIT external inputs
  std::vector<std::uint32_t> layers;  // PERCIT layer sizes
  std::uint32_t n = 1;                // LSTMIT / RBFIT input count
  std::uint32_t m = 1;                // LSTMIT cells, RBF units, RRBF units
  ConvGeometry conv;
  bool adjustable = false;
  // [params]
  NeuronParams params;
  // [engine]
  DerivativeMode derivative = DerivativeMode::Corrected;
  ReplayMode replay = ReplayMode::ExternalAndRecurrent;
  // [data]
  std::string train_images, train_labels, test_images, test_labels;
  std::string series;               // CSV path; empty means the logistic map
  std::uint32_t series_length = 32;
  double series_r = 3.9;
  std::uint32_t train_limit = 0;    // 0 = all samples
  std::uint32_t test_limit = 0;
  // [train]
  std::uint32_t epochs = 1;
  std::uint32_t episodes = 200;
  std::uint64_t seed = 1;
  std::string out = "out";
};

// Every section and key must be known; architecture.kind is required and
// each architecture requires its size keys. Throws ConfigError.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

LayerPlan build_plan(const RunConfig& config);

// ---- checkpoint -------------------------------------------------------------

// Little-endian binary container. Field order:
//   "IBNETCKP" magic, u32 version
//   name, input_count, reference_count, derivative, replay, step, control,
//   xi, p, rng (text state), topology_version, output bindings
//   per layer, per unit: kind, params, flags, connections, weights, bias,
//     reference slots, inputs, delta, training signal, paralysis, local_min,
//     input stacks, reference stacks, weight-change window, deletion
//     window, dropout mask
//   output table, coefficient table
// Strings and vectors carry a u64 length prefix; doubles are stored as
// their IEEE-754 bit pattern.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_network(const Network& net);
// Throws FormatError with the byte offset of the first bad field.
Network deserialize_network(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

// ---- metrics ----------------------------------------------------------------

void write_metrics(std::ostream& out, const StepReport& report);
void write_events(std::ostream& out, std::span<const PlasticityEvent> events);

// Topology listing: one line per unit with kind, flags and connections.
std::string describe_network(const Network& net);

}  // namespace ibnet
