#include <doctest.h>

#include <vector>

#include "lcnn/graph.hpp"
#include "lcnn/init.hpp"
#include "lcnn/ssd.hpp"
#include "oracles.hpp"

using lcnn::build_lcnn_default;
using lcnn::LayerKind;
using lcnn::NetworkConfig;

TEST_CASE("default config layer accounting") {
  const NetworkConfig cfg = build_lcnn_default();
  CHECK(cfg.layers.size() == 26);
  int pools = 0, conventional = 0, dwpw = 0;
  for (const auto& l : cfg.layers) {
    if (l.kind == LayerKind::kGlobalPool) ++pools;
    if (l.kind == LayerKind::kConventional) ++conventional;
    if (l.kind == LayerKind::kDepthwise || l.kind == LayerKind::kPointwise) ++dwpw;
  }
  CHECK(pools == 1);
  CHECK(conventional == 1);
  CHECK(dwpw == 24);
  CHECK(cfg.layers.front().kind == LayerKind::kConventional);
  CHECK(cfg.layers.back().kind == LayerKind::kGlobalPool);
  CHECK(cfg.tap_indices == std::vector<int>{11, 13, 15, 17});
}

TEST_CASE("default config shape propagation") {
  const NetworkConfig cfg = build_lcnn_default();
  const auto shapes = lcnn::validate_config(cfg);
  REQUIRE(shapes.size() == 26);
  auto shape_of = [&](int layer) { return shapes[layer - 1].out; };
  CHECK(shape_of(11) == lcnn::Shape3{256, 28, 28});
  CHECK(shape_of(13) == lcnn::Shape3{512, 14, 14});
  CHECK(shape_of(15) == lcnn::Shape3{512, 14, 14});
  CHECK(shape_of(17) == lcnn::Shape3{512, 14, 14});
  CHECK(shape_of(25) == lcnn::Shape3{1024, 7, 7});  // pre-pool
  CHECK(shape_of(26) == lcnn::Shape3{1024, 1, 1});

  // spatial size never increases
  for (const auto& s : shapes) {
    CHECK(s.out.height <= s.in.height);
    CHECK(s.out.width <= s.in.width);
  }
}

TEST_CASE("validate_config rejects mid-network pool") {
  NetworkConfig cfg = build_lcnn_default();
  cfg.layers[4].kind = LayerKind::kGlobalPool;
  CHECK_THROWS_WITH_AS(lcnn::validate_config(cfg),
                       doctest::Contains("final layer"), lcnn::ConfigError);
}

TEST_CASE("geometry error on vanishing dims at the kernel level") {
  // same-padded schedules cannot vanish, but an explicit pad-0 3x3 on a
  // 1x1 input must fail
  lcnn::Tensor in(1, 1, 1, {1.0f});
  auto w = lcnn::ConvWeights::conventional(1, 1, 3, std::vector<float>(9, 1.0f));
  CHECK_THROWS_AS(lcnn::conv2d_direct(in, w, 1, 0), lcnn::GeometryError);
}

TEST_CASE("validate_config rejects non-consecutive indices") {
  NetworkConfig cfg = build_lcnn_default();
  cfg.layers[3].index = 99;
  CHECK_THROWS_AS(lcnn::validate_config(cfg), lcnn::ConfigError);
}

TEST_CASE("validate_config rejects bad tap index") {
  NetworkConfig cfg = build_lcnn_default();
  cfg.tap_indices = {26};  // the pool
  CHECK_THROWS_AS(lcnn::validate_config(cfg), lcnn::ConfigError);
  cfg.tap_indices = {99};
  CHECK_THROWS_AS(lcnn::validate_config(cfg), lcnn::ConfigError);
}

namespace {

// small 6-layer net for forward tests: conv, dw, pw, dw, pw, pool
NetworkConfig tiny_config() {
  NetworkConfig cfg;
  cfg.input_size = 16;
  cfg.input_channels = 3;
  cfg.num_classes = 4;
  cfg.priors_per_location = 6;
  cfg.tap_indices = {3, 5};
  cfg.layers = {
      {1, LayerKind::kConventional, 4, 3, 2, true},
      {2, LayerKind::kDepthwise, 0, 3, 1, true},
      {3, LayerKind::kPointwise, 6, 1, 1, true},
      {4, LayerKind::kDepthwise, 0, 3, 2, true},
      {5, LayerKind::kPointwise, 8, 1, 1, true},
      {6, LayerKind::kGlobalPool, 0, 1, 1, false},
  };
  return cfg;
}

}  // namespace

TEST_CASE("forward with zero weights gives zero taps") {
  const NetworkConfig cfg = tiny_config();
  lcnn::HeadSpec head;
  head.scales = {0.3f, 0.7f};
  lcnn::WeightStore store = lcnn::random_init(cfg, head, 1);
  // zero every array
  lcnn::WeightStore zeros;
  for (const auto& a : store.arrays()) {
    zeros.add(a.name, a.dims, std::vector<float>(a.data.size(), 0.0f));
  }
  oracle::TestRng rng(31);
  lcnn::Tensor input = oracle::random_tensor(rng, 3, 16, 16);
  const auto result = lcnn::forward(cfg, zeros, input);
  REQUIRE(result.taps.size() == 2);
  for (const auto& [idx, t] : result.taps) {
    for (float v : t.data()) CHECK(v == 0.0f);
  }
}

TEST_CASE("forward is deterministic") {
  const NetworkConfig cfg = tiny_config();
  lcnn::HeadSpec head;
  head.scales = {0.3f, 0.7f};
  const lcnn::WeightStore store = lcnn::random_init(cfg, head, 2);
  oracle::TestRng rng(32);
  const lcnn::Tensor input = oracle::random_tensor(rng, 3, 16, 16);
  const auto first = lcnn::forward(cfg, store, input);
  for (int run = 0; run < 10; ++run) {
    const auto again = lcnn::forward(cfg, store, input);
    CHECK(again.final.data() == first.final.data());
    for (std::size_t i = 0; i < first.taps.size(); ++i) {
      CHECK(again.taps[i].second.data() == first.taps[i].second.data());
    }
  }
}

TEST_CASE("single-layer forward equals the kernel called directly") {
  NetworkConfig cfg;
  cfg.input_size = 8;
  cfg.input_channels = 3;
  cfg.tap_indices = {1};
  cfg.layers = {{1, LayerKind::kConventional, 4, 3, 1, false}};
  oracle::TestRng rng(33);
  const auto vals = oracle::random_values(rng, 4 * 3 * 9);
  const auto bias = oracle::random_values(rng, 4);
  lcnn::WeightStore store;
  store.add("layer1.weight", {4, 3, 3, 3}, vals);
  store.add("layer1.bias", {4}, bias);
  const lcnn::Tensor input = oracle::random_tensor(rng, 3, 8, 8);
  const auto result = lcnn::forward(cfg, store, input);
  const lcnn::Tensor direct = lcnn::conv2d_direct(
      input, lcnn::ConvWeights::conventional(4, 3, 3, vals, bias), 1, 1);
  CHECK(result.final.data() == direct.data());
}

TEST_CASE("tap snapshots equal a truncated network run") {
  const NetworkConfig cfg = tiny_config();
  lcnn::HeadSpec head;
  head.scales = {0.3f, 0.7f};
  const lcnn::WeightStore store = lcnn::random_init(cfg, head, 3);
  oracle::TestRng rng(34);
  const lcnn::Tensor input = oracle::random_tensor(rng, 3, 16, 16);
  const auto full = lcnn::forward(cfg, store, input);

  NetworkConfig prefix = cfg;
  prefix.layers.resize(3);  // up to the first tap
  prefix.tap_indices = {3};
  const auto truncated = lcnn::forward(prefix, store, input);
  CHECK(full.taps[0].second.data() == truncated.final.data());
}

TEST_CASE("forward reports missing and mis-shaped weights by layer") {
  const NetworkConfig cfg = tiny_config();
  lcnn::HeadSpec head;
  head.scales = {0.3f, 0.7f};
  lcnn::WeightStore store = lcnn::random_init(cfg, head, 4);
  oracle::TestRng rng(35);
  const lcnn::Tensor input = oracle::random_tensor(rng, 3, 16, 16);

  lcnn::WeightStore missing;
  for (const auto& a : store.arrays()) {
    if (a.name == "layer4.weight") continue;
    missing.add(a.name, a.dims, a.data);
  }
  CHECK_THROWS_WITH_AS(lcnn::forward(cfg, missing, input),
                       doctest::Contains("layer 4"), lcnn::LoadError);

  lcnn::WeightStore misshaped;
  for (const auto& a : store.arrays()) {
    if (a.name == "layer3.weight") {
      misshaped.add(a.name, {2, 2}, std::vector<float>(4, 0.0f));
    } else {
      misshaped.add(a.name, a.dims, a.data);
    }
  }
  CHECK_THROWS_WITH_AS(lcnn::forward(cfg, misshaped, input),
                       doctest::Contains("layer 3"), lcnn::LoadError);
}

TEST_CASE("config JSON round-trip") {
  const NetworkConfig cfg = build_lcnn_default();
  const NetworkConfig back = lcnn::config_from_json(lcnn::config_to_json(cfg));
  CHECK(back.layers.size() == cfg.layers.size());
  CHECK(back.tap_indices == cfg.tap_indices);
  CHECK(back.num_classes == cfg.num_classes);
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    CHECK(back.layers[i].kind == cfg.layers[i].kind);
    CHECK(back.layers[i].out_channels == cfg.layers[i].out_channels);
    CHECK(back.layers[i].stride == cfg.layers[i].stride);
  }
}
