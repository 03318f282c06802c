#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ibnet/engine.hpp"
#include "ibnet/error.hpp"
#include "ibnet/oracle/oracle.hpp"
#include "ibnet/recurrent.hpp"
#include "support.hpp"

namespace ibnet {
namespace {

TEST(StackMemory, SinglePush) {
  const StackMemory s = stack_step(StackMemory(4), 0, 0.7);
  EXPECT_EQ(s.head(), 0.7);
  EXPECT_EQ(s.cells()[1], 0.0);
}

TEST(StackMemory, SinglePopShiftsDown) {
  const StackMemory s = stack_step(StackMemory::from_cells({0.7, 0.2, 0.0, 0.0}), 1, 123.0);
  EXPECT_EQ(std::vector<double>(s.cells().begin(), s.cells().end()), (std::vector{0.2, 0.0, 0.0, 0.0}));
}

TEST(StackMemory, LifoReplay) {
  StackMemory s(3);
  for (double v : {1.0, 2.0, 3.0}) s = stack_step(std::move(s), 0, v);
  std::vector<double> reads;
  for (int i = 0; i < 3; ++i) {
    reads.push_back(s.head());
    s = stack_step(std::move(s), 1, 0.0);
  }
  EXPECT_EQ(reads, (std::vector{3.0, 2.0, 1.0}));
  EXPECT_TRUE(s.zero());
}

TEST(StackMemory, OverflowDropsOldest) {
  StackMemory s(2);  // cells 0..2
  for (double v : {1.0, 2.0, 3.0, 4.0}) s.push(v);
  EXPECT_EQ(std::vector<double>(s.cells().begin(), s.cells().end()), (std::vector{4.0, 3.0, 2.0}));
}

TEST(StackMemory, RandomSequencesReplayReversed) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::uint32_t depth = 1; depth <= 16; ++depth) {
    for (std::uint32_t len = 1; len <= depth; ++len) {
      StackMemory s(depth);
      std::vector<double> seq(len);
      for (double& v : seq) s.push(v = u(rng));
      for (std::uint32_t k = 0; k < len; ++k) {
        ASSERT_EQ(s.head(), seq[len - 1 - k]);
        s.pop();
      }
      EXPECT_TRUE(s.zero());
    }
  }
}

TEST(RecurrentForward, GateZeroMatchesPlainForward) {
  const NeuronParams p;
  const auto k = ModelKind::of(ModelTag::Tanh);
  const std::vector<double> w{0.3, -0.5}, x{0.2, 0.9};
  const std::vector<std::uint8_t> bound{1, 0};
  const std::vector<StackMemory> stacks{StackMemory::from_cells({5.0, 0.0}), StackMemory(1)};
  EXPECT_EQ(recurrent_forward(k, w, 0.1, x, bound, stacks, 0, p), forward(k, w, 0.1, x, p));
}

TEST(RecurrentForward, GateOneReadsStackHeads) {
  const NeuronParams p;
  const auto k = ModelKind::of(ModelTag::Tanh);
  const std::vector<StackMemory> stacks{StackMemory::from_cells({0.5, 0.0})};
  const auto y = recurrent_forward(k, std::vector{2.0}, 0.0, std::vector{-3.0}, std::vector<std::uint8_t>{1},
                                   stacks, 1, p);
  EXPECT_NEAR(y[0], 0.7616, 1e-4);
  EXPECT_DOUBLE_EQ(y[0], std::tanh(1.0));
}

TEST(RecurrentForward, EmptyStacksContributeNothing) {
  const NeuronParams p;
  const auto k = ModelKind::of(ModelTag::Linear);
  const std::vector<StackMemory> stacks{StackMemory(3), StackMemory(3)};
  const auto y = recurrent_forward(k, std::vector{2.0, 3.0}, 0.0, std::vector{7.0, 0.25},
                                   std::vector<std::uint8_t>{1, 0}, stacks, 1, p);
  EXPECT_EQ(y[0], 0.75);
}

TEST(RecurrentUpdate, Examples) {
  NeuronParams p;
  p.mu = 0.1;
  const auto k = ModelKind::of(ModelTag::Tanh);
  const std::vector<double> w{0.5}, live{9.0}, y{0.0};
  const std::vector<std::uint8_t> bound{1};
  const CorrectionFactor one{1.0, {1.0}};
  const std::vector<StackMemory> two{StackMemory::from_cells({2.0, 0.0})};
  EXPECT_NEAR(recurrent_update_weights(k, {w, 0.0, live, y}, bound, two, one, 1, p).weights[0], 0.5 - 0.2, 1e-15);
  EXPECT_EQ(recurrent_update_weights(k, {w, 0.0, live, y}, bound, two, one, 0, p).weights[0], 0.5);
  const std::vector<StackMemory> zero{StackMemory(1)};
  EXPECT_EQ(recurrent_update_weights(k, {w, 0.0, live, y}, bound, zero, one, 1, p).weights[0], 0.5);
}

TEST(RecurrentCorrection, ReferenceAgainstStackHead) {
  LayerPlan plan;
  plan.input_count = 1;
  plan.reference_count = 1;
  UnitPlan u = test::make_unit(ModelKind::of(ModelTag::Linear, true), {{0, 0, 1}}, true);
  u.reference_slots = {1};
  plan.layers = {{u}};
  plan.outputs = {{1, 1, 1}};
  Network net = Network::from_plan(plan, 1);
  net.unit(1, 1).weights = {0.9};
  net.unit(1, 1).bias = 0.0;
  net.unit(1, 1).input_stacks[0] = StackMemory::from_cells(std::vector<double>(33, 0.0));
  net.unit(1, 1).input_stacks[0].push(1.0);
  net.unit(1, 1).reference_stacks[0].push(0.4);
  const PendingStep ps = compute_step(net, std::vector{0.0}, std::vector{-7.0}, 1.0);
  EXPECT_DOUBLE_EQ(ps.units[0][0].delta, 0.5);
}

TEST(RecurrentCorrection, TimeSplitAggregation) {
  // (1,1) feeds itself (recurrent) and (2,1) (ordinary).
  LayerPlan plan;
  plan.input_count = 1;
  plan.layers = {{test::make_unit(ModelKind::of(ModelTag::Tanh), {{0, 0, 1}, {1, 1, 1}}, true)},
                 {test::make_unit(ModelKind::of(ModelTag::Tanh), {{1, 1, 1}})}};
  const Network net = Network::from_plan(plan, 2);
  ValueTable current = make_coeff_table(net), previous = make_coeff_table(net);
  current[1][0] = {0.1};
  previous[0][0] = {0.0, 0.05};
  current[0][0] = {0.0, 99.0};  // must not be read: the self-loop uses t-1
  previous[1][0] = {99.0};      // must not be read: layer 2 sits above
  EXPECT_NEAR(aggregate_incoming_error(net.consumer_index(), current, previous, {1, 1, 1}), 0.15, 1e-15);
  EXPECT_EQ(aggregate_incoming_error(net.consumer_index(), current, previous, {2, 1, 1}), 0.0);
}

Network self_loop_tanh(double mu) {
  LayerPlan plan;
  plan.input_count = 1;
  plan.reference_count = 1;
  UnitPlan u = test::make_unit(ModelKind::of(ModelTag::Tanh, true), {{0, 0, 1}, {1, 1, 1}}, true);
  u.reference_slots = {1};
  u.params.mu = mu;
  u.params.max_m = 4;
  u.init_range = std::pair{-1.0, 1.0};
  plan.layers = {{u}};
  plan.outputs = {{1, 1, 1}};
  return Network::from_plan(plan, 21);
}

TEST(TrainingEpisode, EmptyEpisodeLeavesNetUnchanged) {
  Network net = self_loop_tanh(0.1);
  const Network before = net;
  const auto r = run_training_episode(net, std::vector<Sample>{});
  EXPECT_EQ(r.steps, 0u);
  EXPECT_TRUE(net.same_state(before));
}

TEST(TrainingEpisode, SingleSampleSingleUpdate) {
  Network net = self_loop_tanh(0.1);
  const std::vector<double> w0 = net.unit(1, 1).weights;
  const double b0 = net.unit(1, 1).bias;
  const std::vector<Sample> s{{{0.6}, {0.2}}};
  run_training_episode(net, s);
  // One gated step on x = 0.6 replayed from the stack, zero feedback.
  const double y = std::tanh(w0[0] * 0.6 + b0);
  const double g = 0.1 * (1 - y * y) * (y - 0.2);
  EXPECT_DOUBLE_EQ(net.unit(1, 1).weights[0], w0[0] - g * 0.6);
  EXPECT_EQ(net.unit(1, 1).weights[1], w0[1]);
  EXPECT_DOUBLE_EQ(net.unit(1, 1).bias, b0 - g);
  EXPECT_EQ(net.step, 2u);
}

TEST(TrainingEpisode, SelfLoopMatchesUnrolledGradient) {
  const Network net = self_loop_tanh(1e-30);
  const std::vector<oracle::Frame> frames{{{0.5}, {0.1}}, {{-0.3}, {0.4}}, {{0.8}, {-0.2}}};
  std::vector<Sample> samples;
  for (const auto& f : frames) samples.push_back({f.external, f.references});
  Network trained = net;
  const auto report = run_training_episode(trained, samples);
  const auto engine = episode_gradient(net, report);
  const auto tape = oracle::unrolled_bptt_grad(net, frames);
  ASSERT_EQ(engine.size(), tape.size());
  for (std::size_t i = 0; i < tape.size(); ++i) EXPECT_LE(oracle::relative_error(engine[i], tape[i]), 1e-6);
}

TEST(TrainingEpisode, StacksEmptyAfterEpisode) {
  Network net = self_loop_tanh(0.1);
  const std::vector<Sample> s{{{0.5}, {0.1}}, {{-0.3}, {0.4}}, {{0.8}, {-0.2}}, {{0.1}, {0.0}}};
  run_training_episode(net, s);
  for (const auto& st : net.unit(1, 1).input_stacks) EXPECT_TRUE(st.zero());
  for (const auto& st : net.unit(1, 1).reference_stacks) EXPECT_TRUE(st.zero());
}

TEST(TrainingEpisode, CapacityError) {
  Network net = self_loop_tanh(0.1);
  const std::vector<Sample> s(5, Sample{{0.1}, {0.1}});
  EXPECT_THROW(run_training_episode(net, s), CapacityError);
}

}  // namespace
}  // namespace ibnet
