#include "ibnet/tasks.hpp"

#include <algorithm>
#include <ostream>

#include "ibnet/error.hpp"
#include "ibnet/io.hpp"

namespace ibnet {

LabeledSet load_labeled_set(const std::string& images, const std::string& labels, std::size_t limit) {
  const IdxTensor im = load_idx(images);
  const IdxTensor lb = load_idx(labels);
  if (im.magic != 0x803) throw FormatError(images + " is not an image file", 0);
  if (lb.magic != 0x801) throw FormatError(labels + " is not a label file", 0);
  if (im.count() != lb.count()) throw FormatError("image and label counts differ", 4);
  std::size_t n = im.count();
  if (limit != 0) n = std::min(n, limit);
  LabeledSet set;
  set.inputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    set.inputs.push_back(im.item(i));
    set.labels.push_back(lb.data[i]);
  }
  return set;
}

std::vector<double> one_hot(std::uint8_t label, std::size_t classes) {
  if (label >= classes) throw ContractError("label " + std::to_string(label) + " outside " + std::to_string(classes));
  std::vector<double> v(classes, 0.0);
  v[label] = 1.0;
  return v;
}

namespace {

std::size_t argmax_outputs(const Network& net, const ValueTable& outputs) {
  std::size_t best = 0;
  double best_v = 0.0;
  for (std::size_t i = 0; i < net.output_bindings.size(); ++i) {
    const auto& c = net.output_bindings[i];
    const double v = outputs[c.layer - 1][c.unit - 1][c.output - 1];
    if (i == 0 || v > best_v) {
      best = i;
      best_v = v;
    }
  }
  return best;
}

}  // namespace

std::size_t predict(const Network& net, std::span<const double> input) {
  const std::vector<double> refs(net.reference_count, 0.0);
  return argmax_outputs(net, compute_step(net, input, refs, 0.0).outputs);
}

EpochReport train_classifier_epoch(Network& net, const LabeledSet& set, std::ostream* metrics,
                                   std::ostream* events) {
  EpochReport r;
  double mse = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto target = one_hot(set.labels[i], net.reference_count);
    PendingStep ps = compute_step(net, set.inputs[i], target, 1.0);
    if (argmax_outputs(net, ps.outputs) != set.labels[i]) ++r.errors;
    const StepReport s = commit_step(net, std::move(ps));
    mse += s.mse;
    ++r.steps;
    if (metrics) write_metrics(*metrics, s);
    if (events) write_events(*events, s.events);
  }
  r.mse = r.steps == 0 ? 0.0 : mse / static_cast<double>(r.steps);
  return r;
}

double classification_error(const Network& net, const LabeledSet& set) {
  if (set.size() == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (predict(net, set.inputs[i]) != set.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(set.size());
}

std::vector<Sample> series_samples(std::span<const double> series) {
  std::vector<Sample> out;
  for (std::size_t k = 0; k + 1 < series.size(); ++k) out.push_back({{series[k]}, {series[k + 1]}});
  return out;
}

double series_mse(const Network& net, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  Network copy = net;
  copy.reset_activity();
  double sum = 0.0;
  for (const Sample& s : samples) sum += step(copy, s.external, s.references, 0.0).mse;
  return sum / static_cast<double>(samples.size());
}

}  // namespace ibnet
