#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ibnet/engine.hpp"
#include "ibnet/error.hpp"
#include "ibnet/plasticity.hpp"
#include "support.hpp"

namespace ibnet {
namespace {

TEST(SaturationTrigger, Examples) {
  NeuronParams p;
  p.omega_max = 1.0;
  const std::vector<double> x{1.0};
  EXPECT_EQ(check_saturation_trigger(ModelTag::Tanh, 0.0, 0.0, x, 0.0, p), 0);
  EXPECT_EQ(check_saturation_trigger(ModelTag::Tanh, 0.0, 0.0, x, 1.0, p), 1);
  EXPECT_EQ(check_saturation_trigger(ModelTag::Tanh, 0.0, 0.0, x, 0.01, p), 0);
}

TEST(OscillationTrigger, Examples) {
  NeuronParams p;
  p.x_max = 1.0;
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(check_oscillation_trigger(0.3, 0.3, x, x, p), 0);
  EXPECT_EQ(check_oscillation_trigger(0.2, -0.1, x, x, p), 1);
  const std::vector<double> moved{0.6, 0.2, 0.3, 0.4};
  EXPECT_EQ(check_oscillation_trigger(0.2, -0.1, moved, x, p), 0);
}

// Layer 1: three Linear units on the external input. Layer 2: one
// adjustable Linear unit with `slots` empty slots.
Network candidate_net(std::size_t slots, double p_deep1 = 0.0) {
  LayerPlan plan;
  plan.input_count = 1;
  for (int j = 0; j < 3; ++j) plan.layers.resize(1), plan.layers[0].push_back(
      test::make_unit(ModelKind::of(ModelTag::Linear), {{0, 0, 1}}));
  UnitPlan u;
  u.kind = ModelKind::of(ModelTag::Linear);
  u.connections.resize(slots);
  u.adjustable = true;
  u.params.p_deep1 = p_deep1;
  plan.layers.push_back({u});
  return Network::from_plan(plan, 4);
}

TEST(SelectCandidate, NoFreeSlot) {
  Network net = candidate_net(1);
  net.unit(2, 1).connections[0] = {1, 1, 1};
  std::mt19937_64 rng(1);
  EXPECT_FALSE(select_candidate(net, net.outputs, 2, 1, rng).has_value());
}

TEST(SelectCandidate, ArgmaxOfPreviousLayer) {
  const Network net = candidate_net(2);
  ValueTable current = net.outputs;
  current[0] = {{0.1}, {-0.9}, {0.3}};
  std::mt19937_64 rng(1);
  const auto c = select_candidate(net, current, 2, 1, rng);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->slot, 0u);
  EXPECT_EQ(c->target, (ConnectionTriple{1, 2, 1}));
}

TEST(SelectCandidate, SkipsConnectedTargets) {
  Network net = candidate_net(2);
  net.unit(2, 1).connections[1] = {1, 2, 1};
  ValueTable current = net.outputs;
  current[0] = {{0.1}, {-0.9}, {0.3}};
  std::mt19937_64 rng(1);
  const auto c = select_candidate(net, current, 2, 1, rng);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->target, (ConnectionTriple{1, 3, 1}));
}

TEST(SelectCandidate, TieBreakIsUniform) {
  const Network net = candidate_net(1);
  ValueTable current = net.outputs;
  current[0] = {{0.5}, {-0.5}, {0.1}};
  std::mt19937_64 rng(99);
  int first = 0, second = 0;
  constexpr int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    const auto c = select_candidate(net, current, 2, 1, rng);
    ASSERT_TRUE(c.has_value());
    ASSERT_NE(c->target.unit, 3u);
    (c->target.unit == 1 ? first : second)++;
  }
  const double e = trials / 2.0;
  const double chi2 = (first - e) * (first - e) / e + (second - e) * (second - e) / e;
  EXPECT_LT(chi2, 10.83);  // 1 dof, p = 0.001
}

TEST(SelectCandidate, FullPreviousLayerWithoutDeepLinksGivesNone) {
  // Layer 3 unit whose layer-2 source is taken; p_deep1 = 0 forbids layer 1.
  LayerPlan plan;
  plan.input_count = 1;
  plan.layers = {{test::make_unit(ModelKind::of(ModelTag::Linear), {{0, 0, 1}})},
                 {test::make_unit(ModelKind::of(ModelTag::Linear), {{1, 1, 1}})}};
  UnitPlan u = test::make_unit(ModelKind::of(ModelTag::Linear), {{2, 1, 1}, {0, 0, 0}});
  u.adjustable = true;
  u.params.p_deep1 = 0.0;
  plan.layers.push_back({u});
  Network net = Network::from_plan(plan, 1);
  std::mt19937_64 rng(1);
  EXPECT_FALSE(select_candidate(net, net.outputs, 3, 1, rng).has_value());
  net.unit(3, 1).params.p_deep1 = 1.0;
  const auto c = select_candidate(net, net.outputs, 3, 1, rng);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->target, (ConnectionTriple{1, 1, 1}));
}

TEST(SelectCandidate, RecurrentBranchExcludesSelf) {
  LayerPlan plan;
  plan.input_count = 1;
  UnitPlan u = test::make_unit(ModelKind::of(ModelTag::Linear), {{0, 0, 1}, {0, 0, 0}}, true);
  u.adjustable = true;
  u.params.p_rec = 1.0;
  u.params.p_deep1 = 1.0;
  plan.layers = {{u, test::make_unit(ModelKind::of(ModelTag::Linear), {{0, 0, 1}})}};
  Network net = Network::from_plan(plan, 1);
  net.outputs[0] = {{5.0}, {0.2}};  // self has the largest |y(t-1)|
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto c = select_candidate(net, net.outputs, 1, 1, rng);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(c->target, (ConnectionTriple{1, 2, 1}));
  }
}

TEST(CreateLink, SignRule) {
  NeuronState s;
  s.params.omega_min = 0.02;
  s.connections = {kDisconnected, kDisconnected};
  s.weights = {0.0, 0.0};
  create_link(s, 0, {1, 1, 1}, 0.0);
  EXPECT_EQ(s.weights[0], 0.02);
  create_link(s, 1, {1, 2, 1}, 0.4);
  EXPECT_EQ(s.weights[1], -0.02);
  EXPECT_EQ(s.connections[1], (ConnectionTriple{1, 2, 1}));
  EXPECT_THROW(create_link(s, 1, {1, 3, 1}, 0.4), ContractError);
  EXPECT_THROW(create_link(s, 2, {1, 3, 1}, 0.4), ContractError);
  EXPECT_EQ(new_link_weight(-0.3, s.params), 0.02);
}

TEST(CreateLink, VisibleToNextStep) {
  Network net = candidate_net(1);
  test::fill_weights(net, 1.0);
  create_link(net.unit(2, 1), 0, {1, 3, 1}, 0.0);
  net.touch_topology();
  step(net, std::vector{0.7}, {}, 0.0);
  EXPECT_EQ(net.unit(2, 1).inputs[0], 0.7);
  EXPECT_DOUBLE_EQ(net.outputs[1][0][0], 0.7 * net.unit(2, 1).weights[0]);
}

NeuronState deletion_state(double weight, std::uint32_t t_o) {
  NeuronState s;
  s.params.omega_min = 0.01;
  s.params.t_o = t_o;
  s.connections = {{1, 1, 1}};
  s.weights = {weight};
  s.deletion_terms = SlidingWindow(t_o, 1);
  return s;
}

TEST(Deletion, GatedOffWindowNeverFlags) {
  NeuronState s = deletion_state(0.001, 4);
  for (int t = 0; t < 4; ++t) s.deletion_terms.push(deletion_terms(s, 0), 0);
  EXPECT_EQ(check_deletion(s)[0], 0);
}

TEST(Deletion, BelowFloorFlags) {
  NeuronState s = deletion_state(0.005, 4);
  for (int t = 0; t < 4; ++t) s.deletion_terms.push(deletion_terms(s, 1), 1);
  EXPECT_NEAR(s.deletion_terms.sums()[0], -4 * 0.005, 1e-15);
  EXPECT_EQ(check_deletion(s)[0], 1);
}

TEST(Deletion, AboveFloorKeeps) {
  NeuronState s = deletion_state(0.02, 4);
  for (int t = 0; t < 4; ++t) s.deletion_terms.push(deletion_terms(s, 1), 1);
  EXPECT_EQ(check_deletion(s)[0], 0);
}

TEST(PruneLinks, Rules) {
  NeuronState s;
  s.connections = {{1, 1, 1}, {0, 0, 3}, {0, 0, 0}, {1, 2, 1}, {2, 1, 1}};
  s.weights = {0.001, 0.001, 0.0, 0.001, 0.001};
  s.protect_recurrent_links = true;
  const std::vector<std::uint8_t> flags{1, 1, 1, 1, 1};
  const std::vector<std::uint32_t> created{3};
  const auto events = prune_links(s, 2, 1, flags, created, 10);
  EXPECT_EQ(s.connections[0], kDisconnected);
  EXPECT_EQ(s.weights[0], 0.0);
  EXPECT_EQ(s.connections[1], (ConnectionTriple{0, 0, 3}));  // external preserved
  EXPECT_EQ(s.connections[3], (ConnectionTriple{1, 2, 1}));  // same-step creation
  EXPECT_EQ(s.connections[4], (ConnectionTriple{2, 1, 1}));  // protected recurrent link
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(format_event(events[0]), "10 (2,1) deleted 1 (1,1,1) low_weight");
}

TEST(PruneLinks, ExternalLinksSurviveRandomFlags) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 1000; ++rep) {
    NeuronState s;
    for (int k = 0; k < 6; ++k) {
      s.connections.push_back(coin(rng) ? external_input(k + 1) : ConnectionTriple{1, std::uint32_t(k + 1), 1});
      s.weights.push_back(0.0);
    }
    const auto before = s.connections;
    std::vector<std::uint8_t> flags;
    for (int k = 0; k < 6; ++k) flags.push_back(coin(rng));
    prune_links(s, 2, 1, flags, {}, 0);
    for (int k = 0; k < 6; ++k) {
      if (before[k].external()) EXPECT_EQ(s.connections[k], before[k]);
    }
  }
}

}  // namespace
}  // namespace ibnet
