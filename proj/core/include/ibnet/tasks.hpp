#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ibnet/engine.hpp"
#include "ibnet/network.hpp"

namespace ibnet {

// Images scaled to [0, 1] with their class labels.
struct LabeledSet {
  std::vector<std::vector<double>> inputs;
  std::vector<std::uint8_t> labels;
  std::size_t size() const { return labels.size(); }
};

// Reads an IDX image/label pair, keeping the first `limit` items (0 = all).
// Throws FormatError when the two files disagree on the item count.
LabeledSet load_labeled_set(const std::string& images, const std::string& labels, std::size_t limit = 0);

// Classification targets are one-hot vectors in [0, 1].
std::vector<double> one_hot(std::uint8_t label, std::size_t classes);

// Index of the largest network output.
std::size_t predict(const Network& net, std::span<const double> input);

struct EpochReport {
  std::size_t steps = 0;
  double mse = 0.0;          // mean over steps
  std::size_t errors = 0;    // wrong argmax before each update
};

// One gated step per sample, in order. Metrics and events are written to
// the streams when given.
EpochReport train_classifier_epoch(Network& net, const LabeledSet& set, std::ostream* metrics = nullptr,
                                   std::ostream* events = nullptr);

// Fraction of misclassified samples. Does not modify `net`.
double classification_error(const Network& net, const LabeledSet& set);

// One-step prediction pairs: x = s[k], e = s[k + 1].
std::vector<Sample> series_samples(std::span<const double> series);

// Mean squared one-step residual over a gate-off pass from zero activity.
// Does not modify `net`.
double series_mse(const Network& net, std::span<const Sample> samples);

}  // namespace ibnet
