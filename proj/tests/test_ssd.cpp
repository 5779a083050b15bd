#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lcnn/init.hpp"
#include "lcnn/ssd.hpp"
#include "oracles.hpp"

using lcnn::Box;
using lcnn::Detection;
using lcnn::HeadSpec;
using lcnn::PriorBox;

TEST_CASE("generate_priors centered 1x1 box") {
  HeadSpec head;
  head.scales = {0.5f};
  head.aspect_ratios = {1.0f};
  const auto priors = lcnn::generate_priors({{1, 1}}, head);
  REQUIRE(priors.size() == 2);  // ratio box + extra box
  CHECK(priors[0].cx == 0.5f);
  CHECK(priors[0].cy == 0.5f);
  CHECK(priors[0].w == 0.5f);
  CHECK(priors[0].h == 0.5f);
}

TEST_CASE("generate_priors clips oversized ratio boxes") {
  HeadSpec head;
  head.scales = {0.9f};
  head.aspect_ratios = {2.0f};
  const auto priors = lcnn::generate_priors({{1, 1}}, head);
  CHECK(priors[0].w == 1.0f);  // 0.9 * sqrt(2) clipped
  CHECK(priors[0].h == doctest::Approx(0.9 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("default L-CNN taps give 8232 priors") {
  HeadSpec head;  // 4 scales, 5 ratios + extra = 6 per location
  const auto priors =
      lcnn::generate_priors({{28, 28}, {14, 14}, {14, 14}, {14, 14}}, head);
  CHECK(priors.size() == 8232);
  for (const auto& p : priors) {
    CHECK(p.cx >= 0.0f);
    CHECK(p.cx <= 1.0f);
    CHECK(p.w > 0.0f);
    CHECK(p.w <= 1.0f);
    CHECK(p.h > 0.0f);
    CHECK(p.h <= 1.0f);
  }
}

TEST_CASE("generate_priors rejects mismatched counts") {
  HeadSpec head;
  CHECK_THROWS_AS(lcnn::generate_priors({{4, 4}}, head), lcnn::ConfigError);
}

TEST_CASE("decode with zero offsets returns the prior") {
  HeadSpec head;
  PriorBox p{0.4f, 0.6f, 0.2f, 0.3f};
  const Box b = lcnn::decode_box({0, 0, 0, 0}, p, head.variances);
  CHECK(b.xmin == doctest::Approx(0.3f));
  CHECK(b.ymin == doctest::Approx(0.45f));
  CHECK(b.xmax == doctest::Approx(0.5f));
  CHECK(b.ymax == doctest::Approx(0.75f));
}

TEST_CASE("decode shifts center by tx * v0 * prior_w") {
  HeadSpec head;
  PriorBox p{0.4f, 0.5f, 0.2f, 0.2f};
  const Box b = lcnn::decode_box({1.0f / head.variances[0], 0, 0, 0}, p,
                                 head.variances);
  const float cx = (b.xmin + b.xmax) / 2;
  CHECK(cx == doctest::Approx(0.6f).epsilon(1e-5));
}

TEST_CASE("decode/encode round-trip on random boxes") {
  HeadSpec head;
  oracle::TestRng rng(41);
  for (int t = 0; t < 200; ++t) {
    PriorBox p{rng.uniform(0.2f, 0.8f), rng.uniform(0.2f, 0.8f),
               rng.uniform(0.05f, 0.4f), rng.uniform(0.05f, 0.4f)};
    const float cx = rng.uniform(0.3f, 0.7f);
    const float cy = rng.uniform(0.3f, 0.7f);
    const float w = rng.uniform(0.05f, 0.3f);
    const float h = rng.uniform(0.05f, 0.3f);
    const Box want{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
    const Box got =
        lcnn::decode_box(oracle::encode_box(want, p, head.variances), p,
                         head.variances);
    CHECK(std::abs(got.xmin - want.xmin) <= 1e-5);
    CHECK(std::abs(got.ymin - want.ymin) <= 1e-5);
    CHECK(std::abs(got.xmax - want.xmax) <= 1e-5);
    CHECK(std::abs(got.ymax - want.ymax) <= 1e-5);
  }
}

TEST_CASE("decode width is monotone in tw") {
  HeadSpec head;
  PriorBox p{0.5f, 0.5f, 0.2f, 0.2f};
  float prev = 0.0f;
  for (float tw = -2.0f; tw <= 2.0f; tw += 0.25f) {
    const Box b = lcnn::decode_box({0, 0, tw, 0}, p, head.variances);
    const float w = b.xmax - b.xmin;
    CHECK(w > prev);
    prev = w;
  }
}

TEST_CASE("iou basics") {
  const Box a{0, 0, 2, 2};
  CHECK(lcnn::iou(a, a) == 1.0f);
  CHECK(lcnn::iou(a, {3, 3, 4, 4}) == 0.0f);
  CHECK(lcnn::iou(a, {1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0).epsilon(1e-6));
}

TEST_CASE("nms keeps the higher-scored of identical boxes") {
  std::vector<Detection> cand = {{1, 0.8f, {0.1f, 0.1f, 0.4f, 0.4f}},
                                 {1, 0.9f, {0.1f, 0.1f, 0.4f, 0.4f}}};
  const auto kept = lcnn::nms(cand, 0.45f, 100);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9f);
}

TEST_CASE("nms keeps mutually disjoint boxes") {
  std::vector<Detection> cand = {{1, 0.9f, {0.0f, 0.0f, 0.2f, 0.2f}},
                                 {1, 0.8f, {0.4f, 0.4f, 0.6f, 0.6f}},
                                 {1, 0.7f, {0.8f, 0.8f, 1.0f, 1.0f}}};
  CHECK(lcnn::nms(cand, 0.45f, 100).size() == 3);
}

namespace {

bool same_detections(const std::vector<Detection>& a,
                     const std::vector<Detection>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].class_id != b[i].class_id || a[i].score != b[i].score ||
        a[i].box.xmin != b[i].box.xmin || a[i].box.ymax != b[i].box.ymax) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("nms equals the reference suppression on random sets") {
  oracle::TestRng rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Detection> cand;
    const int n = rng.range(0, 6);
    for (int i = 0; i < n; ++i) {
      const float x = rng.uniform(0.0f, 0.7f);
      const float y = rng.uniform(0.0f, 0.7f);
      cand.push_back({rng.range(1, 2), rng.uniform(0.01f, 1.0f),
                      {x, y, x + rng.uniform(0.05f, 0.3f),
                       y + rng.uniform(0.05f, 0.3f)}});
    }
    const auto got = lcnn::nms(cand, 0.45f, 100);
    const auto want = oracle::reference_nms(cand, 0.45f, 100);
    CHECK(same_detections(got, want));
    // kept set is a pairwise-compatible subset of the input
    for (std::size_t i = 0; i < got.size(); ++i) {
      for (std::size_t j = i + 1; j < got.size(); ++j) {
        if (got[i].class_id == got[j].class_id) {
          CHECK(lcnn::iou(got[i].box, got[j].box) < 0.45f);
        }
      }
    }
  }
}

namespace {

lcnn::NetworkConfig detect_config() {
  lcnn::NetworkConfig cfg;
  cfg.input_size = 16;
  cfg.input_channels = 3;
  cfg.num_classes = 21;
  cfg.priors_per_location = 6;
  cfg.tap_indices = {2, 3};
  cfg.layers = {
      {1, lcnn::LayerKind::kConventional, 4, 3, 2, true},
      {2, lcnn::LayerKind::kPointwise, 6, 1, 1, true},
      {3, lcnn::LayerKind::kDepthwise, 0, 3, 2, true},
      {4, lcnn::LayerKind::kGlobalPool, 0, 1, 1, false},
  };
  return cfg;
}

HeadSpec detect_head() {
  HeadSpec head;
  head.scales = {0.3f, 0.7f};
  head.emit_class = -1;
  return head;
}

}  // namespace

TEST_CASE("detect with zero conf weights emits nothing") {
  const auto cfg = detect_config();
  const auto head = detect_head();
  lcnn::WeightStore seeded = lcnn::random_init(cfg, head, 5);
  lcnn::WeightStore store;
  for (const auto& a : seeded.arrays()) {
    if (a.name.find(".conf.") != std::string::npos) {
      store.add(a.name, a.dims, std::vector<float>(a.data.size(), 0.0f));
    } else {
      store.add(a.name, a.dims, a.data);
    }
  }
  oracle::TestRng rng(43);
  const auto input = oracle::random_tensor(rng, 3, 16, 16);
  CHECK(lcnn::detect(cfg, store, head, input).empty());
}

TEST_CASE("handcrafted conf bias forces one prior's detection at its prior box") {
  const auto cfg = detect_config();
  const auto head = detect_head();
  lcnn::WeightStore seeded = lcnn::random_init(cfg, head, 6);
  lcnn::WeightStore store;
  const int target_class = 15;
  for (const auto& a : seeded.arrays()) {
    std::vector<float> data(a.data.size(), 0.0f);
    if (a.name == "head0.conf.bias") {
      // prior 0 at every cell of tap 0 scores high for the target class,
      // but only cell (0,0) matters once NMS collapses...
      data[0 * cfg.num_classes + target_class] = 10.0f;
    }
    store.add(a.name, a.dims, data);
  }
  // all-zero backbone -> taps are zero -> head outputs equal their biases,
  // identical at every cell; loc == 0 so each detection equals its prior.
  oracle::TestRng rng(44);
  const auto input = oracle::random_tensor(rng, 3, 16, 16);
  const auto dets = lcnn::detect(cfg, store, head, input);
  REQUIRE(!dets.empty());

  const auto shapes = lcnn::validate_config(cfg);
  const auto priors = lcnn::generate_priors(
      {{shapes[1].out.height, shapes[1].out.width},
       {shapes[2].out.height, shapes[2].out.width}},
      head);
  // every emitted box must be exactly some prior-0 box of tap 0
  const int ppl = head.priors_per_location();
  for (const auto& d : dets) {
    CHECK(d.class_id == target_class);
    bool found = false;
    const std::size_t tap0 =
        static_cast<std::size_t>(shapes[1].out.height) * shapes[1].out.width * ppl;
    for (std::size_t i = 0; i < tap0; i += ppl) {
      const auto& p = priors[i];
      const Box want = lcnn::clip_box(
          {p.cx - p.w / 2, p.cy - p.h / 2, p.cx + p.w / 2, p.cy + p.h / 2});
      if (want.xmin == d.box.xmin && want.ymin == d.box.ymin &&
          want.xmax == d.box.xmax && want.ymax == d.box.ymax) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("detect is deterministic and bounded by top_k") {
  const auto cfg = detect_config();
  auto head = detect_head();
  head.confidence_threshold = 0.05f;
  head.top_k = 10;
  const auto store = lcnn::random_init(cfg, head, 7);
  oracle::TestRng rng(45);
  const auto input = oracle::random_tensor(rng, 3, 16, 16);
  const auto a = lcnn::detect(cfg, store, head, input);
  const auto b = lcnn::detect(cfg, store, head, input);
  CHECK(same_detections(a, b));
  CHECK(a.size() <= 10);
  for (const auto& d : a) {
    CHECK(d.box.xmin >= 0.0f);
    CHECK(d.box.xmax <= 1.0f);
    CHECK(d.box.xmin < d.box.xmax);
    CHECK(d.box.ymin < d.box.ymax);
    CHECK(d.class_id >= 1);
    CHECK(d.score >= head.confidence_threshold);
  }
}

TEST_CASE("detection JSONL record format") {
  const Detection d{15, 0.75f, {0.1f, 0.2f, 0.3f, 0.4f}};
  CHECK(lcnn::detection_jsonl("frame_001", d) ==
        "{\"frame\":\"frame_001\",\"class\":15,\"score\":0.750000,"
        "\"xmin\":0.100000,\"ymin\":0.200000,\"xmax\":0.300000,"
        "\"ymax\":0.400000}");
}
