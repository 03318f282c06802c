#include <benchmark/benchmark.h>

#include <array>
#include <random>

#include "ibnet/architectures.hpp"
#include "ibnet/engine.hpp"
#include "ibnet/io.hpp"
#include "ibnet/tasks.hpp"

namespace {

using namespace ibnet;

std::vector<double> random_image(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

// One MNIST-sized PERCIT step; arg 0 gates training off, 1 on.
void BM_PercitStep(benchmark::State& state) {
  const std::array<std::uint32_t, 3> sizes{128, 64, 10};
  NeuronParams p;
  p.mu = 0.05;
  Network net = Network::from_plan(build_percit(784, sizes, p, 11), 11);
  std::mt19937_64 rng(1);
  const auto x = random_image(rng, 784);
  const auto e = one_hot(3, 10);
  const double control = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(step(net, x, e, control));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PercitStep)->Arg(0)->Arg(1);

// Full fill + drain episode of the chaotic-series RRBF.
void BM_RrbfEpisode(benchmark::State& state) {
  const auto m = static_cast<std::uint32_t>(state.range(0));
  NeuronParams p;
  p.mu = 0.05;
  Network net = Network::from_plan(build_rrbf_chaotic(m, 32, p), 3);
  const auto samples = series_samples(logistic_series(32));
  for (auto _ : state) benchmark::DoNotOptimize(run_training_episode(net, samples));
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_RrbfEpisode)->Arg(4)->Arg(16)->Arg(64);

void BM_LstmitStep(benchmark::State& state) {
  const auto m = static_cast<std::uint32_t>(state.range(0));
  Network net = Network::from_plan(build_lstmit(4, m, NeuronParams{}), 2);
  std::mt19937_64 rng(2);
  const auto x = random_image(rng, 4);
  const std::vector<double> e(m, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(step(net, x, e, 0.0));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LstmitStep)->Arg(4)->Arg(32);

void BM_ConvitStep(benchmark::State& state) {
  const ConvGeometry geo{.l = 28, .w = 28, .h = 1, .f = 5, .g = 2, .n1 = 2, .m3 = 5};
  Network net = Network::from_plan(build_convit(geo, NeuronParams{}), 5);
  std::mt19937_64 rng(3);
  const auto x = random_image(rng, 784);
  const auto e = one_hot(1, 10);
  for (auto _ : state) benchmark::DoNotOptimize(step(net, x, e, 1.0));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ConvitStep);

void BM_Checkpoint(benchmark::State& state) {
  const std::array<std::uint32_t, 3> sizes{128, 64, 10};
  const Network net = Network::from_plan(build_percit(784, sizes, NeuronParams{}, 1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(deserialize_network(serialize_network(net)));
}
BENCHMARK(BM_Checkpoint);

}  // namespace

BENCHMARK_MAIN();
