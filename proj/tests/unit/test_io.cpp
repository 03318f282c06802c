#include <gtest/gtest.h>

#include <array>
#include <sstream>

#include "ibnet/architectures.hpp"
#include "ibnet/error.hpp"
#include "ibnet/io.hpp"
#include "ibnet/tasks.hpp"

namespace ibnet {
namespace {

std::vector<std::uint8_t> idx_bytes(std::uint8_t type, std::vector<std::uint32_t> dims,
                                    const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> b{0, 0, type, static_cast<std::uint8_t>(dims.size())};
  for (auto d : dims) {
    for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(d >> s));
  }
  b.insert(b.end(), data.begin(), data.end());
  return b;
}

TEST(Idx, ImagesAndLabels) {
  std::vector<std::uint8_t> pixels(18);
  for (std::size_t i = 0; i < 18; ++i) pixels[i] = static_cast<std::uint8_t>(i * 15);
  const IdxTensor img = parse_idx(idx_bytes(0x08, {2, 3, 3}, pixels));
  EXPECT_EQ(img.magic, 0x803u);
  EXPECT_EQ(img.count(), 2u);
  EXPECT_EQ(img.item_size(), 9u);
  EXPECT_DOUBLE_EQ(img.item(1)[0], 135.0 / 255.0);
  const IdxTensor lab = parse_idx(idx_bytes(0x08, {2}, {7, 3}));
  EXPECT_EQ(lab.magic, 0x801u);
  EXPECT_EQ(lab.data, (std::vector<std::uint8_t>{7, 3}));
}

TEST(Idx, Errors) {
  auto bytes = idx_bytes(0x08, {2, 3, 3}, std::vector<std::uint8_t>(18, 1));
  bytes.resize(bytes.size() - 5);
  try {
    parse_idx(bytes);
    FAIL() << "truncated payload accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), bytes.size());
  }
  try {
    parse_idx(idx_bytes(0x0D, {2}, {0, 0}));
    FAIL() << "float tensor accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  EXPECT_THROW(parse_idx(std::vector<std::uint8_t>{0, 0}), FormatError);
  EXPECT_THROW(parse_idx(idx_bytes(0x08, {1}, {1, 2})), FormatError);
}

TEST(Series, Csv) {
  EXPECT_EQ(parse_series_csv("value\n0.5\n-0.25\n\n1\n"), (std::vector{0.5, -0.25, 1.0}));
  EXPECT_EQ(parse_series_csv("0.5\n0.75\n"), (std::vector{0.5, 0.75}));
  try {
    parse_series_csv("0.5\n0.7\nabc\n");
    FAIL() << "bad line accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
}

TEST(Series, Logistic) {
  const auto s = logistic_series(50);
  double y = 0.3;
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_DOUBLE_EQ(s[k], 2 * y - 1);
    y = 3.9 * y * (1 - y);
  }
  for (std::size_t k = 0; k + 1 < 50; ++k) {
    EXPECT_DOUBLE_EQ(series_samples(s)[k].references[0], s[k + 1]);
  }
}

constexpr const char* kPercit = R"(
# small perceptron
[architecture]
kind = percit
inputs = 4
layers = 6, 5, 3

[params]
mu = 0.05
dropout_keep = 0.8

[train]
seed = 12
)";

TEST(Config, Parses) {
  const RunConfig c = parse_run_config(kPercit);
  EXPECT_EQ(c.architecture, Architecture::Percit);
  EXPECT_EQ(c.inputs, 4u);
  EXPECT_EQ(c.layers, (std::vector<std::uint32_t>{6, 5, 3}));
  EXPECT_EQ(c.params.mu, 0.05);
  EXPECT_EQ(c.params.dropout_keep, 0.8);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(build_plan(c).layers.size(), 3u);
}

TEST(Config, UnknownKeyReportsLine) {
  try {
    parse_run_config("[architecture]\nkind = rrbf\nm = 4\nspeed = 3\n");
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("speed"), std::string::npos) << e.what();
  }
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_run_config("[architecture]\nm = 4\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[architecture]\nkind = lstmit\nn = 2\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[architecture]\nkind = hopfield\n"), ConfigError);
  EXPECT_THROW(parse_run_config("kind = rrbf\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[architecture]\nkind = rrbf\nm = 4\n[params]\nmu = -1\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[architecture]\nkind = rrbf\nm = four\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[architecture]\nkind = rrbf\nkind = rrbf\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[architecture\nkind = rrbf\n"), ConfigError);
}

TEST(Checkpoint, RoundTrip) {
  NeuronParams p;
  p.max_m = 8;
  Network net = Network::from_plan(build_rrbf_chaotic(4, 8, p, {.adjustable = true}), 3);
  const auto series = logistic_series(6);
  run_training_episode(net, series_samples(series));
  step(net, std::vector{0.2}, std::vector{0.1}, 0.0);
  const auto bytes = serialize_network(net);
  const Network back = deserialize_network(bytes);
  EXPECT_TRUE(back.same_state(net));
  EXPECT_EQ(serialize_network(back), bytes);
}

TEST(Checkpoint, CorruptInput) {
  const std::array<std::uint32_t, 3> sizes{3, 3, 2};
  const auto bytes = serialize_network(Network::from_plan(build_percit(2, sizes, NeuronParams{}, 1), 1));
  auto bad = bytes;
  bad[0] = 'X';
  try {
    deserialize_network(bad);
    FAIL() << "bad magic accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  bad = bytes;
  bad[8] = 99;  // version
  EXPECT_THROW(deserialize_network(bad), FormatError);
  for (std::size_t cut : {std::size_t{4}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(deserialize_network(std::span(bytes).first(cut)), FormatError) << cut;
  }
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(deserialize_network(bad), FormatError);
}

TEST(Output, DescribeAndMetrics) {
  const Network net = Network::from_plan(build_rbfit(1, 1, NeuronParams{}), 1);
  const std::string text = describe_network(net);
  EXPECT_NE(text.find("(3,1)"), std::string::npos);
  EXPECT_NE(text.find("(2,1,1)"), std::string::npos);
  std::ostringstream out;
  StepReport r;
  r.step = 3;
  write_metrics(out, r);
  EXPECT_EQ(out.str(), format_metrics(r) + "\n");
}

TEST(MnistFixture, Loads) {
  const std::string dir = IBNET_MNIST_DIR;
  const LabeledSet train = load_labeled_set(dir + "/train-images.idx3-ubyte", dir + "/train-labels.idx1-ubyte");
  const LabeledSet test = load_labeled_set(dir + "/test-images.idx3-ubyte", dir + "/test-labels.idx1-ubyte", 250);
  EXPECT_EQ(train.size(), 2000u);
  EXPECT_EQ(test.size(), 250u);
  EXPECT_EQ(train.inputs[0].size(), 784u);
  std::array<int, 10> counts{};
  for (auto l : train.labels) counts.at(l)++;
  for (int c : counts) EXPECT_EQ(c, 200);
  EXPECT_EQ(one_hot(3, 10)[3], 1.0);
}

}  // namespace
}  // namespace ibnet
