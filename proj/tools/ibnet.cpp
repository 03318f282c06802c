// ibnet: build, train, evaluate and verify networks from a config file.
// Exit codes: 0 success, 1 verification failure, 2 usage or input error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ibnet/architectures.hpp"
#include "ibnet/engine.hpp"
#include "ibnet/error.hpp"
#include "ibnet/io.hpp"
#include "ibnet/oracle/generators.hpp"
#include "ibnet/oracle/oracle.hpp"
#include "ibnet/tasks.hpp"

namespace fs = std::filesystem;
using namespace ibnet;

namespace {

constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

// Same tolerances as the acceptance suite.
constexpr double kGradTol = 1e-5;
constexpr double kGradStep = 1e-5;
constexpr double kBpttTol = 1e-6;
constexpr double kBpttMu = 1e-30;
constexpr double kLstmTol = 1e-12;
constexpr double kKinkMargin = 1e-3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;
  std::string out;
  std::optional<std::uint32_t> epochs;
  std::string oracle = "grad";
  std::size_t count = 5;
  std::size_t length = 200;
  double r = 3.9;
  double y0 = 0.3;
};

RunConfig load_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.epochs) c.epochs = *o.epochs;
  if (!o.out.empty()) c.out = o.out;
  return c;
}

Network build_network(const RunConfig& c) {
  return Network::from_plan(build_plan(c), c.seed, c.derivative, c.replay);
}

// The checkpoint when one is given, otherwise a fresh network.
Network network_for(const Options& o, const RunConfig& c) {
  return o.checkpoint.empty() ? build_network(c) : load_checkpoint(o.checkpoint);
}

bool classifier(const RunConfig& c) {
  return c.architecture == Architecture::Percit || c.architecture == Architecture::Convit;
}

bool has_recurrent_units(const Network& net) {
  for (const auto& layer : net.layers) {
    for (const auto& s : layer) {
      if (s.recurrent) return true;
    }
  }
  return false;
}

std::vector<double> series_for(const RunConfig& c) {
  return c.series.empty() ? logistic_series(c.series_length, c.series_r) : load_series_csv(c.series);
}

// Windows of the last input_count values predicting the next value, one
// copy per reference slot.
std::vector<Sample> windowed_samples(const Network& net, std::span<const double> s) {
  const std::size_t n = net.input_count;
  std::vector<Sample> out;
  for (std::size_t k = n; k < s.size(); ++k) {
    out.push_back({std::vector<double>(s.begin() + (k - n), s.begin() + k),
                   std::vector<double>(net.reference_count, s[k])});
  }
  return out;
}

LabeledSet train_set(const RunConfig& c) {
  if (c.train_images.empty() || c.train_labels.empty()) {
    throw ConfigError("classification needs data.train_images and data.train_labels");
  }
  return load_labeled_set(c.train_images, c.train_labels, c.train_limit);
}

LabeledSet eval_set(const RunConfig& c) {
  if (c.test_images.empty() || c.test_labels.empty()) return train_set(c);
  return load_labeled_set(c.test_images, c.test_labels, c.test_limit);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw FormatError("cannot write " + p.string(), 0);
  return f;
}

int cmd_build(const Options& o) {
  const RunConfig c = load_config(o);
  const Network net = build_network(c);
  fs::create_directories(c.out);
  const std::string path = o.checkpoint.empty() ? (fs::path(c.out) / "network.ckpt").string() : o.checkpoint;
  save_checkpoint(net, path);
  std::cout << net.name << ": " << net.neuron_count() << " units, " << net.link_count() << " links -> " << path
            << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  const RunConfig c = load_config(o);
  Network net = network_for(o, c);
  const fs::path dir = c.out;
  fs::create_directories(dir);
  std::ofstream metrics = open_out(dir / "metrics.txt");
  std::ofstream events = open_out(dir / "events.txt");
  std::ofstream summary = open_out(dir / "summary.txt");

  if (classifier(c)) {
    const LabeledSet train = train_set(c);
    const LabeledSet test = eval_set(c);
    summary << "epoch train_mse train_errors test_error\n";
    for (std::uint32_t e = 1; e <= c.epochs; ++e) {
      const EpochReport r = train_classifier_epoch(net, train, &metrics, &events);
      const double err = classification_error(net, test);
      summary << e << ' ' << r.mse << ' ' << r.errors << ' ' << err << '\n';
      std::cout << "epoch " << e << " train_mse " << r.mse << " test_error " << err << '\n';
    }
  } else {
    const auto samples = windowed_samples(net, series_for(c));
    const bool episodic = has_recurrent_units(net);
    const std::vector<double> zero_refs(net.reference_count, 0.0);
    summary << "episode mse\n";
    std::size_t episode = 0;
    for (std::uint32_t e = 0; e < c.epochs; ++e) {
      for (std::uint32_t k = 0; k < c.episodes; ++k) {
        if (episodic) {
          const EpisodeReport rep = run_training_episode(net, samples);
          StepReport line;
          line.step = net.step - 1;
          line.mse = rep.fill_mse;
          const GlobalFlags g = global_flags(net);
          line.xi = g.xi;
          line.p = g.p;
          line.link_count = net.link_count();
          write_metrics(metrics, line);
          write_events(events, rep.events);
        } else {
          for (const auto& s : samples) {
            const StepReport r = step(net, s.external, s.references, 1.0);
            write_metrics(metrics, r);
            write_events(events, r.events);
          }
        }
        summary << ++episode << ' ' << series_mse(net, samples) << '\n';
      }
    }
    std::cout << "episodes " << episode << " mse " << series_mse(net, samples) << '\n';
  }
  const fs::path ckpt = dir / "network.ckpt";
  save_checkpoint(net, ckpt.string());
  std::cout << "checkpoint " << ckpt.string() << '\n';
  return 0;
}

int cmd_eval(const Options& o) {
  const RunConfig c = load_config(o);
  const Network net = network_for(o, c);
  if (classifier(c)) {
    const LabeledSet set = eval_set(c);
    std::printf("error_rate %.4f samples %zu\n", classification_error(net, set), set.size());
  } else {
    const auto samples = windowed_samples(net, series_for(c));
    std::printf("mse %.6g samples %zu\n", series_mse(net, samples), samples.size());
  }
  return 0;
}

int cmd_inspect(const Options& o) {
  const RunConfig c = load_config(o);
  std::cout << describe_network(network_for(o, c));
  const fs::path ev = fs::path(c.out) / "events.txt";
  if (!o.out.empty() && fs::exists(ev)) {
    std::cout << "events (" << ev.string() << "):\n";
    std::ifstream in(ev);
    std::cout << in.rdbuf();
  }
  return 0;
}

int cmd_gen_series(const Options& o) {
  const auto s = logistic_series(o.length, o.r, o.y0);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!o.out.empty()) {
    file = open_out(o.out);
    out = &file;
  }
  *out << "y\n";
  char buf[32];
  for (double v : s) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    *out << buf;
  }
  return 0;
}

// ---- verify -----------------------------------------------------------------

void randomize(Network& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& layer : net.layers) {
    for (auto& s : layer) {
      for (double& w : s.weights) w = u(rng);
      if (is_weighted_sum(s.kind.tag)) s.bias = u(rng);
    }
  }
}

// Random frames away from kinks; nullopt when none were found.
std::optional<std::vector<oracle::Frame>> smooth_frames(const Network& net, std::mt19937_64& rng, std::size_t n) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    auto frames = oracle::random_frames(rng, net, n);
    if (oracle::kink_margin(net, frames) >= kKinkMargin) return frames;
  }
  return std::nullopt;
}

int report(const oracle::GradientReport& r, const std::string& label) {
  std::cout << label << '\n' << oracle::format_report(r, 10);
  return r.pass ? 0 : kVerifyFailed;
}

int verify_grad(const Options& o, std::mt19937_64& rng) {
  std::vector<Network> nets;
  if (!o.config.empty()) {
    nets.push_back(build_network(load_config(o)));
  } else {
    for (std::size_t i = 0; i < o.count; ++i) nets.push_back(Network::from_plan(oracle::random_feedforward_plan(rng), rng()));
  }
  int rc = 0;
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const auto frames = smooth_frames(nets[i], rng, 1);
    if (!frames) {
      std::cout << "net " << i + 1 << ": skipped (no input away from activation kinks)\n";
      continue;
    }
    const auto fd = oracle::finite_diff_grad(nets[i], *frames, kGradStep);
    const auto tape = oracle::unrolled_bptt_grad(nets[i], *frames);
    double self = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k) self = std::max(self, oracle::relative_error(fd[k], tape[k]));
    if (self > 0.1 * kGradTol) {
      std::cout << "net " << i + 1 << ": skipped (finite differences too coarse, self error " << self << ")\n";
      continue;
    }
    const auto analytic = integrated_gradient(nets[i], (*frames)[0].external, (*frames)[0].references);
    const auto r = oracle::compare_gradients(oracle::parameter_ids(nets[i]), analytic, fd, kGradTol);
    rc = std::max(rc, report(r, "net " + std::to_string(i + 1) + " (" + nets[i].name + ")"));
  }
  return rc;
}

int verify_bptt(const Options& o, std::mt19937_64& rng) {
  oracle::RandomNetOptions opts;
  opts.max_units = 10;
  opts.max_layers = 3;
  opts.max_width = 4;
  opts.max_inputs = 3;
  opts.mu = kBpttMu;
  int rc = 0;
  for (std::size_t i = 0; i < o.count; ++i) {
    const std::size_t m = 1 + i % 4;
    const Network net = Network::from_plan(oracle::random_recurrent_plan(rng, 8, opts), rng());
    const auto frames = smooth_frames(net, rng, m);
    if (!frames) continue;
    std::vector<Sample> samples;
    for (const auto& f : *frames) samples.push_back({f.external, f.references});
    Network trained = net;
    const auto engine = episode_gradient(net, run_training_episode(trained, samples));
    const auto r = oracle::compare_gradients(oracle::parameter_ids(net), engine,
                                             oracle::unrolled_bptt_grad(net, *frames), kBpttTol);
    rc = std::max(rc, report(r, "net " + std::to_string(i + 1) + " episode " + std::to_string(m)));
  }
  return rc;
}

int verify_lstm(const Options& o, std::mt19937_64& rng) {
  std::uint32_t n = 2, m = 2;
  if (!o.config.empty()) {
    const RunConfig c = load_config(o);
    n = c.n;
    m = c.m;
  }
  Network net = Network::from_plan(build_lstmit(n, m, NeuronParams{}), rng());
  randomize(net, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> inputs(20, std::vector<double>(n));
  for (auto& x : inputs) {
    for (double& v : x) v = u(rng);
  }
  const auto expected = oracle::reference_lstm_forward(oracle::lstm_weights(net), inputs);
  const std::vector<double> refs(m, 0.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    step(net, inputs[t], refs, 0.0);
    const auto y = net.network_outputs();
    for (std::size_t k = 0; k < m; ++k) worst = std::max(worst, std::abs(y[k] - expected[t][k]));
  }
  std::printf("lstmit n=%u m=%u steps=%zu max_abs=%.3g tol=%.0e\n", n, m, inputs.size(), worst, kLstmTol);
  return worst <= kLstmTol ? 0 : kVerifyFailed;
}

int verify_conv(const Options& o) {
  std::vector<ConvGeometry> geos;
  if (!o.config.empty()) {
    geos.push_back(load_config(o).conv);
  } else {
    for (std::uint32_t l = 3; l <= 8; ++l) {
      for (std::uint32_t w = 3; w <= 8; ++w) {
        for (std::uint32_t f : {2u, 3u}) {
          for (std::uint32_t g : {1u, 2u}) {
            for (std::uint32_t h : {1u, 3u}) geos.push_back({l, w, h, f, g, 2, 1});
          }
        }
      }
    }
  }
  std::size_t checked = 0, mismatches = 0;
  for (const auto& geo : geos) {
    if (!geo.valid()) continue;
    mismatches += oracle::count_wiring_mismatches(build_convit(geo, NeuronParams{}), oracle::brute_force_conv_wiring(geo));
    ++checked;
  }
  std::printf("geometries=%zu mismatches=%zu\n", checked, mismatches);
  if (checked == 0) throw ConfigError("no valid convolution geometry to check");
  return mismatches == 0 ? 0 : kVerifyFailed;
}

int cmd_verify(const Options& o) {
  std::mt19937_64 rng(o.seed.value_or(1));
  if (o.oracle == "grad") return verify_grad(o, rng);
  if (o.oracle == "bptt") return verify_bptt(o, rng);
  if (o.oracle == "lstm") return verify_lstm(o, rng);
  return verify_conv(o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural automaton engine with integrated backpropagation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", o.config, "configuration file")->check(CLI::ExistingFile);
    if (needs_config) cfg->required();
    sub->add_option("--seed", o.seed, "seed (overrides the config)")->envname("IBNET_SEED");
    sub->add_option("--checkpoint", o.checkpoint, "checkpoint file");
    sub->add_option("--out", o.out, "output directory");
  };

  auto* build = app.add_subcommand("build", "write an untrained checkpoint");
  common(build, true);
  auto* train = app.add_subcommand("train", "train and write metrics, events and a checkpoint");
  common(train, true);
  train->add_option("--epochs", o.epochs, "epochs (overrides the config)")->check(CLI::PositiveNumber);
  auto* eval = app.add_subcommand("eval", "error rate or series mse");
  common(eval, true);
  auto* verify = app.add_subcommand("verify", "check the engine against an oracle");
  common(verify, false);
  verify->add_option("--oracle", o.oracle, "grad | bptt | lstm | conv")
      ->check(CLI::IsMember({"grad", "bptt", "lstm", "conv"}));
  verify->add_option("--count", o.count, "random networks to check")->check(CLI::PositiveNumber);
  auto* inspect = app.add_subcommand("inspect", "print topology (and events found in --out)");
  common(inspect, true);
  auto* gen = app.add_subcommand("gen-series", "logistic-map series as CSV");
  gen->add_option("--length", o.length, "values")->check(CLI::PositiveNumber);
  gen->add_option("--r", o.r, "map parameter");
  gen->add_option("--y0", o.y0, "start value in (0,1)");
  gen->add_option("--out", o.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*build) return cmd_build(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*verify) return cmd_verify(o);
    if (*inspect) return cmd_inspect(o);
    return cmd_gen_series(o);
  } catch (const ibnet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
