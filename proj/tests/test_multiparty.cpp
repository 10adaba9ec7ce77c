#include <gtest/gtest.h>

#include <stdexcept>

#include "interpol/adversary.hpp"
#include "interpol/multiparty.hpp"
#include "interpol/poly.hpp"
#include "interpol/protocol.hpp"
#include "interpol/random.hpp"

using namespace interpol;

namespace {

std::size_t per_node_formula(std::size_t s, std::size_t n, std::size_t c) {
  return s * s / n + (n - 1) * c * (s + s / n) + s;
}

}  // namespace

TEST(Multiparty, TwoNodesSplitRows) {
  FieldContext f(17);
  Polynomial poly(f, f.elements({1, 2, 3, 4}));
  auto net = network_init(poly, 2, 1, 1);
  ASSERT_EQ(net.s(), 2u);
  EXPECT_EQ(net.nodes[0].slice.delta, Matrix::from_rows(f, {{1, 2}}));
  EXPECT_EQ(net.nodes[1].slice.delta, Matrix::from_rows(f, {{3, 4}}));
}

TEST(Multiparty, SingleNodeRejected) {
  FieldContext f(17);
  Polynomial poly(f, f.elements({1, 2, 3, 4}));
  EXPECT_THROW(network_init(poly, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(network_init(poly, 2, 0, 1), std::invalid_argument);
}

TEST(Multiparty, KeyCountAndGammaConsistency) {
  FieldContext f(101);
  Xoshiro256 rng(1);
  auto poly = Polynomial::random(f, 100, rng);
  auto net = network_init(poly, 5, 2, 7);
  std::size_t keys = 0;
  for (const auto& node : net.nodes)
    for (std::size_t j = 0; j < net.size(); ++j) {
      if (j == node.id) {
        EXPECT_FALSE(node.peer_keys[j]);
        continue;
      }
      ASSERT_TRUE(node.peer_keys[j]);
      ++keys;
      EXPECT_EQ(node.peer_keys[j]->c(), 2u);
      EXPECT_EQ(node.peer_keys[j]->response_size(), net.s() / 5);
      EXPECT_TRUE(gamma_matches(*node.peer_keys[j], net.nodes[j].slice.delta));
    }
  EXPECT_EQ(keys, 5u * 4u);
  EXPECT_NE(net.nodes[0].peer_keys[1]->lambda, net.nodes[2].peer_keys[1]->lambda);
}

TEST(Multiparty, PaddingToMultipleOfNodes) {
  FieldContext f(101);
  Xoshiro256 rng(2);
  auto poly = Polynomial::random(f, 10, rng);  // s = 4
  auto net = network_init(poly, 3, 1, 1);
  EXPECT_EQ(net.s(), 6u);
  for (std::uint64_t x = 0; x < 20; ++x) {
    PowerVectors pv = power_vectors(f.element(x), net.s());
    EXPECT_EQ(dot(pv.p, matvec(net.coeffs.delta, pv.z)), horner_eval(poly, f.element(x)));
  }
}

TEST(Multiparty, HonestShardsStackToFullProduct) {
  FieldContext f(5);
  Xoshiro256 rng(3);
  for (std::size_t n : {2u, 3u, 4u}) {
    for (std::size_t k = 1; k <= 16; ++k) {
      auto poly = Polynomial::random(f, k, rng);
      auto net = network_init(poly, n, 1, k);
      for (std::uint64_t x = 0; x < 5; ++x) {
        auto z = power_vectors(f.element(x), net.s()).z;
        Vector stacked;
        for (std::size_t l = 0; l < n; ++l) {
          auto shard = node_serve(net, l, z);
          stacked.insert(stacked.end(), shard.begin(), shard.end());
        }
        ASSERT_EQ(stacked, matvec(net.coeffs.delta, z));
      }
    }
  }
}

TEST(Multiparty, AllHonestRoundDecodesEverywhere) {
  FieldContext f(FieldContext::kMersenne61);
  Xoshiro256 rng(4);
  auto poly = Polynomial::random(f, 400, rng);
  auto net = network_init(poly, 4, 2, 9);
  BroadcastBus bus(4);
  for (int r = 0; r < 3; ++r) {
    const auto x = f.sample_uniform(rng);
    auto round = run_network_round(net, bus, x, RoundPolicy::recompute);
    for (const auto& node : round.nodes) {
      ASSERT_TRUE(node.value);
      EXPECT_EQ(*node.value, horner_eval(poly, x));
      EXPECT_TRUE(node.offenders.empty());
      for (auto v : node.verdicts) EXPECT_EQ(v, Verdict::accepted);
    }
  }
}

TEST(Multiparty, ConstantPolynomialAnyNetworkSize) {
  FieldContext f(101);
  Polynomial poly(f, f.elements({42}));
  for (std::size_t n : {2u, 3u, 5u}) {
    auto net = network_init(poly, n, 1, 1);
    BroadcastBus bus(n);
    auto round = run_network_round(net, bus, f.element(9), RoundPolicy::recompute);
    for (const auto& node : round.nodes) EXPECT_EQ(node.value->value(), 42u);
  }
}

TEST(Multiparty, PerNodeCostMatchesFormula) {
  FieldContext f(FieldContext::kMersenne61);
  Xoshiro256 rng(5);
  auto poly = Polynomial::random(f, 10000, rng);
  const std::size_t n = 4, c = 2;
  auto net = network_init(poly, n, c, 11);
  BroadcastBus bus(n);
  auto round = run_network_round(net, bus, f.sample_uniform(rng), RoundPolicy::recompute);
  const double formula = static_cast<double>(per_node_formula(net.s(), n, c));
  for (const auto& node : round.nodes) {
    const double got = static_cast<double>(node.ops.per_round().muls);
    EXPECT_NEAR(got / formula, 1.0, 0.10);
    EXPECT_EQ(node.ops.at(Phase::serve).muls, net.s() * net.s() / n);
    EXPECT_EQ(node.ops.at(Phase::verify).muls, (n - 1) * c * (net.s() + net.s() / n));
  }
}

TEST(Multiparty, MaliciousNodeFlaggedAndRecomputed) {
  FieldContext f(101);
  Xoshiro256 rng(6);
  auto poly = Polynomial::random(f, 64, rng);
  auto net = network_init(poly, 4, 3, 12);
  net.nodes[2].adversary = std::make_unique<FixedOffsetServer>(13);
  BroadcastBus bus(4);
  const auto x = f.sample_uniform(rng);
  auto round = run_network_round(net, bus, x, RoundPolicy::recompute);
  for (const auto& node : round.nodes) {
    if (!node.honest) continue;
    EXPECT_EQ(node.verdicts[2], Verdict::rejected);
    EXPECT_EQ(node.offenders, std::vector<std::size_t>{2});
    EXPECT_EQ(node.recomputed, std::vector<std::size_t>{2});
    ASSERT_TRUE(node.value);
    EXPECT_EQ(*node.value, horner_eval(poly, x));
  }
  EXPECT_FALSE(round.nodes[2].honest);
}

TEST(Multiparty, RsDecodeErasesLocatedShards) {
  FieldContext f(101);
  Xoshiro256 rng(7);
  auto poly = Polynomial::random(f, 36, rng);
  auto net = network_init(poly, 4, 3, 14, 2);
  ASSERT_TRUE(net.rs);
  net.nodes[1].adversary = std::make_unique<FixedOffsetServer>(15);
  net.nodes[3].adversary = std::make_unique<RandomForgeryServer>(16);
  BroadcastBus bus(4);
  const auto x = f.sample_uniform(rng);
  auto round = run_network_round(net, bus, x, RoundPolicy::rs_decode);
  for (const auto& node : round.nodes) {
    if (!node.honest) continue;
    EXPECT_EQ(node.erased, (std::vector<std::size_t>{1, 3}));
    EXPECT_TRUE(node.recomputed.empty());
    EXPECT_EQ(*node.value, horner_eval(poly, x));
  }
}

TEST(Multiparty, RsDecodeFallsBackToRecompute) {
  FieldContext f(101);
  Xoshiro256 rng(8);
  auto poly = Polynomial::random(f, 36, rng);
  auto net = network_init(poly, 4, 3, 17, 3);  // tolerates one erasure
  net.nodes[1].adversary = std::make_unique<FixedOffsetServer>(18);
  net.nodes[2].adversary = std::make_unique<FixedOffsetServer>(19);
  BroadcastBus bus(4);
  const auto x = f.sample_uniform(rng);
  auto round = run_network_round(net, bus, x, RoundPolicy::rs_decode);
  for (const auto& node : round.nodes) {
    if (!node.honest) continue;
    EXPECT_TRUE(node.erased.empty());
    EXPECT_EQ(node.recomputed.size(), 2u);
    EXPECT_EQ(*node.value, horner_eval(poly, x));
  }
}

TEST(Multiparty, BusIsRoundSynchronous) {
  FieldContext f(7);
  BroadcastBus bus(2);
  bus.begin_round();
  bus.broadcast(0, f.elements({1}));
  EXPECT_THROW(bus.broadcast(0, f.elements({2})), std::logic_error);
  EXPECT_THROW(bus.receive(), std::logic_error);
  bus.broadcast(1, f.elements({3}));
  bus.seal();
  EXPECT_THROW(bus.broadcast(1, f.elements({4})), std::logic_error);
  EXPECT_EQ(bus.receive()[0]->front().value(), 1u);
}

TEST(Multiparty, MissingShardIsReportedAsMissing) {
  FieldContext f(101);
  Xoshiro256 rng(9);
  auto net = network_init(Polynomial::random(f, 16, rng), 2, 1, 1);
  auto z = power_vectors(f.element(3), net.s()).z;
  std::vector<std::optional<Vector>> shards{node_serve(net, 0, z), std::nullopt};
  auto v = node_verify_all(net, 0, z, shards);
  EXPECT_EQ(v[0], Verdict::accepted);
  EXPECT_EQ(v[1], Verdict::missing);
}

TEST(Multiparty, AllPeersMaliciousTowardOneHonestNode) {
  // Union bound: node 0 accepts nothing false except w.p. <= (n-1)/q^c.
  FieldContext f(101);
  int false_accepts = 0;
  const int trials = 500;
  for (int i = 0; i < trials; ++i) {
    Xoshiro256 rng(derive_seed(20, i));
    auto poly = Polynomial::random(f, 16, rng);
    auto net = network_init(poly, 4, 1, derive_seed(21, i));
    for (std::size_t j = 1; j < 4; ++j) net.nodes[j].adversary = std::make_unique<FixedOffsetServer>(derive_seed(22, i * 4 + j));
    BroadcastBus bus(4);
    auto round = run_network_round(net, bus, f.sample_uniform(rng), RoundPolicy::recompute);
    for (std::size_t j = 1; j < 4; ++j) false_accepts += round.nodes[0].verdicts[j] == Verdict::accepted;
  }
  // Mean 1500/101 ~ 15.
  EXPECT_LT(false_accepts, 40);
}

TEST(Multiparty, UnsupportedPolicyRejected) {
  FieldContext f(101);
  Xoshiro256 rng(1);
  auto net = network_init(Polynomial::random(f, 16, rng), 2, 1, 1);
  BroadcastBus bus(2);
  EXPECT_THROW(run_network_round(net, bus, f.one(), RoundPolicy::rs_decode), std::invalid_argument);
  BroadcastBus wrong(3);
  EXPECT_THROW(run_network_round(net, wrong, f.one(), RoundPolicy::recompute), std::invalid_argument);
}
