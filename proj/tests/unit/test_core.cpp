#include <gtest/gtest.h>

#include <random>

#include "ibnet/core.hpp"
#include "ibnet/error.hpp"
#include "ibnet/network.hpp"
#include "ibnet/oracle/generators.hpp"
#include "support.hpp"

namespace ibnet {
namespace {

TEST(TrainingGate, StepFunction) {
  EXPECT_EQ(training_gate(0.0), 0);
  EXPECT_EQ(training_gate(1.0), 1);
  EXPECT_EQ(training_gate(-3.7), 0);
  EXPECT_EQ(training_gate(1e-300), 1);
  EXPECT_EQ(training_gate(-0.0), 0);
}

TEST(TrainingGate, Idempotent) {
  for (double a : {-5.0, -1e-9, 0.0, 1e-9, 0.5, 7.0}) {
    EXPECT_EQ(training_gate(training_gate(a)), training_gate(a));
  }
}

TEST(ConnectionTriple, ModePartition) {
  EXPECT_EQ(classify({0, 0, 0}, 2), LinkMode::Disconnected);
  EXPECT_EQ(classify({0, 0, 3}, 2), LinkMode::External);
  EXPECT_EQ(classify({1, 4, 1}, 2), LinkMode::Ordinary);
  EXPECT_EQ(classify({2, 1, 1}, 2), LinkMode::Recurrent);
  EXPECT_EQ(classify({5, 1, 2}, 2), LinkMode::Recurrent);
  EXPECT_THROW(classify({0, 3, 1}, 2), TopologyError);
  EXPECT_THROW(classify({2, 0, 1}, 2), TopologyError);
  EXPECT_THROW(classify({2, 1, 0}, 2), TopologyError);
  EXPECT_EQ(to_string(ConnectionTriple{3, 1, 2}), "(3,1,2)");
}

class ResolveInput : public ::testing::Test {
 protected:
  // current[l][u][r] holds outputs at t, previous at t-1.
  ValueTable current{{{0.1}, {0.2}}, {{0.3}}, {{0.5}}};
  ValueTable previous{{{-0.1}, {-0.2}}, {{-0.3}}, {{0.4}}};
  std::vector<double> external{0.1, 0.9};
};

TEST_F(ResolveInput, Disconnected) { EXPECT_EQ(resolve_input({0, 0, 0}, 2, current, previous, external), 0.0); }

TEST_F(ResolveInput, External) { EXPECT_EQ(resolve_input({0, 0, 2}, 2, current, previous, external), 0.9); }

TEST_F(ResolveInput, OrdinaryReadsCurrentStep) {
  EXPECT_EQ(resolve_input({1, 2, 1}, 2, current, previous, external), 0.2);
}

TEST_F(ResolveInput, RecurrentReadsPreviousStep) {
  EXPECT_EQ(resolve_input({3, 1, 1}, 2, current, previous, external), 0.4);
  EXPECT_EQ(resolve_input({2, 1, 1}, 2, current, previous, external), -0.3);
}

TEST_F(ResolveInput, DanglingThrows) {
  EXPECT_THROW(resolve_input({0, 0, 3}, 2, current, previous, external), TopologyError);
  EXPECT_THROW(resolve_input({1, 3, 1}, 2, current, previous, external), TopologyError);
  EXPECT_THROW(resolve_input({4, 1, 1}, 2, current, previous, external), TopologyError);
  EXPECT_THROW(resolve_input({1, 1, 2}, 2, current, previous, external), TopologyError);
}

TEST(Validate, RejectsDanglingAndBadArity) {
  LayerPlan plan;
  plan.input_count = 1;
  plan.layers = {{test::make_unit(ModelKind::of(ModelTag::Linear), {{0, 0, 2}})}};
  EXPECT_THROW(validate(plan), TopologyError);
  plan.layers = {{test::make_unit(ModelKind::of(ModelTag::MulBlock), {{0, 0, 1}})}};
  EXPECT_THROW(validate(plan), ModelError);
  plan.layers = {{test::make_unit(ModelKind::of(ModelTag::Linear, true), {{0, 0, 1}})}};
  EXPECT_THROW(validate(plan), Error);  // reference kind without a binding
}

// Three-neuron toy: one source in layer 1 fanning out to both units of layer 2.
Network fan_out_net() {
  LayerPlan plan;
  plan.input_count = 1;
  plan.layers = {{test::make_unit(ModelKind::of(ModelTag::Linear), {{0, 0, 1}})},
                 {test::make_unit(ModelKind::of(ModelTag::Linear), {{1, 1, 1}, {1, 1, 1}}),
                  test::make_unit(ModelKind::of(ModelTag::Linear), {{1, 1, 1}})}};
  return Network::from_plan(plan, 1);
}

TEST(AggregateIncomingError, EmptySum) {
  const Network net = fan_out_net();
  ValueTable coeffs = make_coeff_table(net);
  EXPECT_EQ(aggregate_incoming_error(net, coeffs, {2, 1, 1}), 0.0);
}

TEST(AggregateIncomingError, TwoConsumers) {
  const Network net = fan_out_net();
  ValueTable coeffs = make_coeff_table(net);
  coeffs[1][0] = {0.2, 0.0};
  coeffs[1][1] = {-0.05};
  EXPECT_DOUBLE_EQ(aggregate_incoming_error(net, coeffs, {1, 1, 1}), 0.15);
}

TEST(AggregateIncomingError, FanOutOfThree) {
  const Network net = fan_out_net();
  ValueTable coeffs = make_coeff_table(net);
  coeffs[1][0] = {0.1, 0.1};
  coeffs[1][1] = {0.1};
  EXPECT_NEAR(aggregate_incoming_error(net, coeffs, {1, 1, 1}), 0.3, 1e-15);
  const ConsumerIndex index(net);
  EXPECT_NEAR(aggregate_incoming_error(index, coeffs, coeffs, {1, 1, 1}), 0.3, 1e-15);
}

// The consumer index must agree with the exhaustive scan on feedforward nets.
TEST(AggregateIncomingError, IndexMatchesExhaustiveScan) {
  std::mt19937_64 rng(77);
  oracle::RandomNetOptions opts;
  opts.max_units = 20;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Network net = Network::from_plan(oracle::random_feedforward_plan(rng, opts), rng());
    ValueTable coeffs = make_coeff_table(net);
    for (auto& layer : coeffs) {
      for (auto& unit : layer) {
        for (double& v : unit) v = u(rng);
      }
    }
    const ConsumerIndex index(net);
    for (std::uint32_t l = 1; l <= net.layer_count(); ++l) {
      for (std::uint32_t j = 1; j <= net.unit_count(l); ++j) {
        for (std::uint32_t r = 1; r <= output_arity(net.unit(l, j).kind); ++r) {
          const double scan = aggregate_incoming_error(net, coeffs, {l, j, r});
          // Feedforward: every consumer sits above, so only `current` is read.
          const double fast = aggregate_incoming_error(index, coeffs, ValueTable{}, {l, j, r});
          EXPECT_NEAR(scan, fast, 1e-12);
        }
      }
    }
  }
}

TEST(NeuronParams, Validation) {
  NeuronParams p;
  EXPECT_NO_THROW(validate(p));
  p.omega_min = p.omega_max;
  EXPECT_THROW(validate(p), ContractError);
  p = {};
  p.dropout_keep = 1.5;
  EXPECT_THROW(validate(p), ContractError);
  p = {};
  p.alpha = 0.5;
  EXPECT_THROW(validate(p), ContractError);
}

TEST(Network, FromPlanInitialisesWeightsInDefaultRange) {
  NeuronParams p;
  std::mt19937_64 rng(3);
  const Network net = Network::from_plan(oracle::random_feedforward_plan(rng), 9);
  for (const auto& layer : net.layers) {
    for (const auto& s : layer) {
      for (double w : s.weights) EXPECT_LE(std::abs(w), 1.0);
    }
  }
  LayerPlan plan;
  plan.input_count = 3;
  plan.layers = {{test::make_unit(ModelKind::of(ModelTag::Tanh), {{0, 0, 1}, {0, 0, 0}, {0, 0, 3}})}};
  const Network small = Network::from_plan(plan, 5);
  const auto& s = small.unit(1, 1);
  EXPECT_LE(std::abs(s.weights[0]), 10 * p.omega_min);
  EXPECT_EQ(s.weights[1], 0.0);  // empty slot
  EXPECT_LE(std::abs(s.weights[2]), 10 * p.omega_min);
  EXPECT_NE(s.weights[0], 0.0);
}

TEST(Network, SameSeedSameNetwork) {
  std::mt19937_64 rng(4);
  const LayerPlan plan = oracle::random_feedforward_plan(rng);
  EXPECT_TRUE(Network::from_plan(plan, 12).same_state(Network::from_plan(plan, 12)));
  EXPECT_FALSE(Network::from_plan(plan, 12).same_state(Network::from_plan(plan, 13)));
}

}  // namespace
}  // namespace ibnet
