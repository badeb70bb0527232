#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dvrp/valuenet.hpp"
#include "gradcheck.hpp"

using namespace dvrp;
using dvrp::testing::gradient_check;
using dvrp::testing::random_features;

namespace {

// Plain matrix-vector products with the layout written out explicitly.
double oracle_forward(const Network& net, const FeatureVector& x) {
  const auto& p = net.params();
  // Layer 1: 6x12 weights then 6 biases.
  std::vector<double> h1(6), h2(3);
  std::size_t off = 0;
  for (int r = 0; r < 6; ++r) {
    double s = p[off + 72 + r];
    for (int c = 0; c < 12; ++c) {
      s += p[off + r * 12 + c] * x[c];
    }
    h1[r] = std::tanh(s);
  }
  off += 78;
  for (int r = 0; r < 3; ++r) {
    double s = p[off + 18 + r];
    for (int c = 0; c < 6; ++c) {
      s += p[off + r * 6 + c] * h1[c];
    }
    h2[r] = std::tanh(s);
  }
  off += 21;
  double out = p[off + 3];
  for (int c = 0; c < 3; ++c) {
    out += p[off + c] * h2[c];
  }
  return out;
}

}  // namespace

TEST(Network, ShapeAndInitBounds) {
  auto net = Network::initialized(1);
  EXPECT_EQ(net.sizes(), kDefaultLayers);
  EXPECT_EQ(net.params().size(), 78u + 21u + 4u);
  for (std::size_t p = 0; p < 78; ++p) {
    EXPECT_LE(std::abs(net.params()[p]), 1.0 / std::sqrt(12.0));
  }
  for (std::size_t p = 78; p < 99; ++p) {
    EXPECT_LE(std::abs(net.params()[p]), 1.0 / std::sqrt(6.0));
  }
  EXPECT_EQ(Network::initialized(1), Network::initialized(1));
}

TEST(Network, ZeroWeightsGiveZero) {
  Network net;
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(net.forward(random_features(rng)), 0.0);
  }
}

TEST(Network, ZeroInputZeroBiases) {
  auto net = Network::initialized(4);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto end = l + 1 < net.layer_count() ? net.weight_offset(l + 1) : net.params().size();
    for (auto p = net.bias_offset(l); p < end; ++p) {
      net.params()[p] = 0.0;
    }
  }
  EXPECT_EQ(net.forward(FeatureVector{}), 0.0);
}

TEST(Network, ForwardMatchesOracle) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto net = Network::initialized(seed);
    auto x = random_features(rng);
    EXPECT_NEAR(net.forward(x), oracle_forward(net, x), 1e-10);
  }
}

TEST(Network, WrongInputLength) {
  Network net;
  std::vector<double> x(11, 0.0);
  EXPECT_THROW(net.forward(x), ContractViolation);
}

TEST(Network, IdenticalFeaturesIdenticalValues) {
  auto net = Network::initialized(3);
  std::mt19937_64 rng(3);
  auto x = random_features(rng);
  auto y = x;
  EXPECT_EQ(net.forward(x), net.forward(y));
}

TEST(Training, PerfectTargetsLeaveParametersUnchanged) {
  auto net = Network::initialized(8);
  std::mt19937_64 rng(8);
  std::vector<FeatureVector> xs;
  std::vector<double> ys;
  for (int i = 0; i < 4; ++i) {
    xs.push_back(random_features(rng));
    ys.push_back(net.forward(xs.back()));
  }
  const auto before = net.params();
  Adam adam;
  EXPECT_EQ(train_batch(net, adam, xs, ys), 0.0);
  EXPECT_EQ(net.params(), before);
}

TEST(Training, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> target(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto net = Network::initialized(seed);
    EXPECT_LT(gradient_check(net, random_features(rng), target(rng)), 1e-4);
  }
}

TEST(Training, ConvergesOnOnePair) {
  auto net = Network::initialized(17);
  std::mt19937_64 rng(17);
  const FeatureVector xs[] = {random_features(rng)};
  const double ys[] = {0.7};
  Adam adam;
  double loss = 0.0;
  int steps = 0;
  for (; steps < 2000; ++steps) {
    loss = train_batch(net, adam, xs, ys);
    if (loss < 1e-6) {
      break;
    }
  }
  EXPECT_LT(loss, 1e-6);
  EXPECT_LT(steps, 2000);
}

TEST(Training, RejectsNonFiniteTargets) {
  Network net = Network::initialized(1);
  Adam adam;
  const FeatureVector xs[] = {FeatureVector{}};
  const double ys[] = {std::nan("")};
  EXPECT_THROW(train_batch(net, adam, xs, ys), ContractViolation);
}

TEST(Replay, EvictsOldestFirst) {
  ReplayBuffer buf;
  for (int i = 0; i < 50001; ++i) {
    Experience e;
    e.episode = i;
    buf.push(e);
  }
  EXPECT_EQ(buf.size(), 50000u);
  EXPECT_EQ(buf[0].episode, 1);
  EXPECT_EQ(buf[49999].episode, 50000);
}

TEST(Replay, SamplingIsSeededAndWithoutReplacement) {
  ReplayBuffer buf(100);
  for (int i = 0; i < 32; ++i) {
    Experience e;
    e.episode = i;
    buf.push(e);
  }
  std::mt19937_64 r1(9), r2(9);
  auto a = buf.sample(32, r1);
  auto b = buf.sample(32, r2);
  ASSERT_TRUE(a && b);
  std::set<int> seen;
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_EQ((*a)[i].episode, (*b)[i].episode);
    seen.insert((*a)[i].episode);
  }
  EXPECT_EQ(seen.size(), 32u);
  EXPECT_FALSE(buf.sample(33, r1));
}

TEST(Weights, RoundTripIsBitIdentical) {
  auto net = Network::initialized(21);
  net.set_episodes(700);
  std::stringstream ss;
  save_weights(ss, net);
  auto back = load_weights(ss);
  EXPECT_EQ(back, net);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    auto x = random_features(rng);
    EXPECT_EQ(back.forward(x), net.forward(x));
  }
}

TEST(Weights, TruncatedFile) {
  std::stringstream ss;
  save_weights(ss, Network::initialized(2));
  auto text = ss.str();
  std::istringstream cut(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_weights(cut), WeightsError);
}

TEST(Weights, ShapeMismatchNamesExpected) {
  std::stringstream ss;
  save_weights(ss, Network::initialized(2, {12, 8, 1}));
  try {
    load_weights(ss);
    FAIL() << "expected a shape error";
  } catch (const WeightsError& e) {
    EXPECT_NE(std::string(e.what()).find("12,6,3,1"), std::string::npos);
  }
}
