#include <gtest/gtest.h>

#include "ibnet/architectures.hpp"
#include "ibnet/engine.hpp"
#include "ibnet/error.hpp"
#include "support.hpp"

namespace ibnet {
namespace {

// One Linear unit with a reference reading the single external input.
Network linear_e(double w, double b, double mu) {
  LayerPlan plan;
  plan.input_count = 1;
  plan.reference_count = 1;
  UnitPlan u = test::make_unit(ModelKind::of(ModelTag::Linear, true), {{0, 0, 1}});
  u.reference_slots = {1};
  u.params.mu = mu;
  plan.layers = {{u}};
  plan.outputs = {{1, 1, 1}};
  Network net = Network::from_plan(plan, 1);
  net.unit(1, 1).weights = {w};
  net.unit(1, 1).bias = b;
  return net;
}

TEST(Step, GateZeroFreezesParameters) {
  Network net = linear_e(0.3, 0.1, 0.5);
  for (int t = 0; t < 20; ++t) step(net, std::vector{0.1 * t}, std::vector{1.0}, 0.0);
  EXPECT_EQ(net.unit(1, 1).weights[0], 0.3);
  EXPECT_EQ(net.unit(1, 1).bias, 0.1);
  EXPECT_EQ(net.step, 20u);
}

TEST(Step, SingleUpdateMatchesDeltaRule) {
  Network net = linear_e(0.3, 0.1, 0.5);
  const StepReport r = step(net, std::vector{2.0}, std::vector{0.2}, 1.0);
  const double y = 0.3 * 2.0 + 0.1;
  EXPECT_DOUBLE_EQ(net.outputs[0][0][0], y);
  EXPECT_DOUBLE_EQ(net.unit(1, 1).weights[0], 0.3 - 0.5 * (y - 0.2) * 2.0);
  EXPECT_DOUBLE_EQ(net.unit(1, 1).bias, 0.1 - 0.5 * (y - 0.2));
  EXPECT_DOUBLE_EQ(r.mse, (y - 0.2) * (y - 0.2));
  EXPECT_EQ(r.step, 0u);
}

TEST(Step, ComputeDoesNotMutate) {
  Network net = linear_e(0.3, 0.1, 0.5);
  const Network before = net;
  const PendingStep ps = compute_step(net, std::vector{2.0}, std::vector{0.2}, 1.0);
  EXPECT_TRUE(net.same_state(before));
  commit_step(net, ps);
  EXPECT_FALSE(net.same_state(before));
}

TEST(Step, ArityMismatch) {
  Network net = linear_e(0.3, 0.1, 0.5);
  EXPECT_THROW(step(net, std::vector{1.0, 2.0}, std::vector{0.0}, 1.0), StepError);
  EXPECT_THROW(step(net, std::vector{1.0}, std::vector<double>{}, 1.0), StepError);
}

TEST(Step, DeterministicFromSeed) {
  const std::array<std::uint32_t, 3> sizes{6, 5, 3};
  NeuronParams p;
  p.dropout_keep = 0.7;
  const LayerPlan plan = build_percit(4, sizes, p, 5);
  Network a = Network::from_plan(plan, 9), b = Network::from_plan(plan, 9);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> x{0.1 * t, -0.2, 0.3, 0.05 * t}, e{1.0, 0.0, 0.0};
    const auto ra = step(a, x, e, 1.0), rb = step(b, x, e, 1.0);
    ASSERT_EQ(format_metrics(ra), format_metrics(rb));
  }
  EXPECT_TRUE(a.same_state(b));
}

TEST(GlobalFlags, OrOverUnits) {
  const std::array<std::uint32_t, 3> sizes{3, 3, 2};
  Network net = Network::from_plan(build_percit(2, sizes, NeuronParams{}, 1), 1);
  EXPECT_EQ(global_flags(net), (GlobalFlags{0, 0}));
  net.unit(2, 3).paralysis = 1;
  EXPECT_EQ(global_flags(net), (GlobalFlags{0, 1}));
  net.unit(1, 1).local_min = 1;
  EXPECT_EQ(global_flags(net), (GlobalFlags{1, 1}));
}

TEST(FormatMetrics, Fields) {
  StepReport r;
  r.step = 12;
  r.mse = 0.25;
  r.xi = 1;
  r.p = 0;
  r.link_count = 40;
  EXPECT_EQ(format_metrics(r), "12 0.25 1 0 40");
}

// Controller: Linear unit copying the external input.
Network copier() {
  LayerPlan plan;
  plan.input_count = 1;
  plan.layers = {{test::make_unit(ModelKind::of(ModelTag::Linear), {{0, 0, 1}})}};
  plan.outputs = {{1, 1, 1}};
  Network net = Network::from_plan(plan, 1);
  test::fill_weights(net, 1.0);
  return net;
}

TEST(Hierarchy, ThresholdGatesTraining) {
  auto stepper = compose_hierarchy({copier(), linear_e(0.3, 0.0, 0.5)}, {{0, 1, {1, 1, 1}, 0.9}});
  std::vector<NetworkInput> in{{{0.5}, {}, 0.0}, {{1.0}, {0.0}, 1.0}};
  stepper.step(in);
  EXPECT_EQ(stepper.last_controls()[1], 0.0);
  EXPECT_EQ(stepper.net(1).unit(1, 1).weights[0], 0.3);
  in[0].external = {0.95};
  stepper.step(in);
  EXPECT_EQ(stepper.last_controls()[1], 1.0);
  EXPECT_NE(stepper.net(1).unit(1, 1).weights[0], 0.3);

  auto low = compose_hierarchy({copier(), linear_e(0.3, 0.0, 0.5)}, {{0, 1, {1, 1, 1}, 0.1}});
  in[0].external = {0.5};
  low.step(in);
  EXPECT_EQ(low.last_controls()[1], 1.0);
}

TEST(Hierarchy, ChainOrder) {
  auto stepper = compose_hierarchy({copier(), copier(), copier()}, {{1, 0, {1, 1, 1}, 0.5}, {2, 1, {1, 1, 1}, 0.5}});
  EXPECT_EQ(stepper.order(), (std::vector<std::size_t>{2, 1, 0}));
}

TEST(Hierarchy, InvalidGraphs) {
  EXPECT_THROW(compose_hierarchy({copier(), copier()}, {{0, 1, {1, 1, 1}, 0.5}, {1, 0, {1, 1, 1}, 0.5}}),
               CompositionError);
  EXPECT_THROW(compose_hierarchy({copier(), copier()}, {{0, 2, {1, 1, 1}, 0.5}}), CompositionError);
  EXPECT_THROW(compose_hierarchy({copier(), copier()}, {{0, 1, {3, 1, 1}, 0.5}}), CompositionError);
  EXPECT_THROW(compose_hierarchy({copier(), copier(), copier()}, {{0, 2, {1, 1, 1}, 0.5}, {1, 2, {1, 1, 1}, 0.5}}),
               CompositionError);
}

}  // namespace
}  // namespace ibnet
