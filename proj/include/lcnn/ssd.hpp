#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lcnn/error.hpp"
#include "lcnn/graph.hpp"
#include "lcnn/nn.hpp"
#include "lcnn/tensor.hpp"

namespace lcnn {

// Center-form default box, normalized to [0,1].
struct PriorBox {
  float cx = 0, cy = 0, w = 0, h = 0;
};

// Corner-form box, normalized.
struct Box {
  float xmin = 0, ymin = 0, xmax = 0, ymax = 0;
};

struct Detection {
  int class_id = 0;  // >= 1, 0 is background and never emitted
  float score = 0;
  Box box;
};

// Per-prior regression offsets.
struct LocOffsets {
  float tx = 0, ty = 0, tw = 0, th = 0;
};

struct HeadSpec {
  std::vector<float> scales = {0.2f, 0.4333333f, 0.6666667f, 0.9f};
  std::vector<float> aspect_ratios = {1.0f, 2.0f, 0.5f, 3.0f, 1.0f / 3.0f};
  float variances[4] = {0.1f, 0.1f, 0.2f, 0.2f};
  float confidence_threshold = 0.5f;
  float nms_iou_threshold = 0.45f;
  int top_k = 100;
  // Emit only this class id; -1 emits all non-background classes.
  // 15 is the VOC person index under the 21-class layout.
  int emit_class = 15;

  int priors_per_location() const {
    return static_cast<int>(aspect_ratios.size()) + 1;
  }
};

// Scales interpolate linearly from 0.2 to 0.9 across the taps.
inline HeadSpec make_default_head(int tap_count) {
  HeadSpec head;
  head.scales.clear();
  for (int k = 0; k < tap_count; ++k) {
    const float t = tap_count > 1 ? static_cast<float>(k) / (tap_count - 1) : 0.0f;
    head.scales.push_back(0.2f + 0.7f * t);
  }
  return head;
}

struct TapShape {
  int height = 0;
  int width = 0;
};

// Row-major cells; per cell the declared ratios in order, then the extra
// scale-1 box at s' = sqrt(s_k * s_{k+1}) (last tap: sqrt(s_k * 1.0)).
inline std::vector<PriorBox> generate_priors(const std::vector<TapShape>& taps,
                                             const HeadSpec& head) {
  if (taps.size() != head.scales.size()) {
    throw ConfigError("tap count " + std::to_string(taps.size()) +
                      " != scale count " + std::to_string(head.scales.size()));
  }
  std::vector<PriorBox> priors;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const float s = head.scales[k];
    const float s_next = k + 1 < head.scales.size() ? head.scales[k + 1] : 1.0f;
    const float s_extra = std::sqrt(s * s_next);
    for (int i = 0; i < taps[k].height; ++i) {
      for (int j = 0; j < taps[k].width; ++j) {
        const float cx = (j + 0.5f) / taps[k].width;
        const float cy = (i + 0.5f) / taps[k].height;
        for (float a : head.aspect_ratios) {
          const float ra = std::sqrt(a);
          priors.push_back({cx, cy, std::min(1.0f, s * ra),
                            std::min(1.0f, s / ra)});
        }
        priors.push_back({cx, cy, std::min(1.0f, s_extra),
                          std::min(1.0f, s_extra)});
      }
    }
  }
  return priors;
}

inline Box clip_box(Box b) {
  b.xmin = std::clamp(b.xmin, 0.0f, 1.0f);
  b.ymin = std::clamp(b.ymin, 0.0f, 1.0f);
  b.xmax = std::clamp(b.xmax, 0.0f, 1.0f);
  b.ymax = std::clamp(b.ymax, 0.0f, 1.0f);
  return b;
}

inline Box decode_box(const LocOffsets& loc, const PriorBox& p,
                      const float variances[4]) {
  const float cx = p.cx + loc.tx * variances[0] * p.w;
  const float cy = p.cy + loc.ty * variances[1] * p.h;
  const float w = p.w * std::exp(loc.tw * variances[2]);
  const float h = p.h * std::exp(loc.th * variances[3]);
  return clip_box({cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2});
}

inline std::vector<Box> decode_boxes(const std::vector<LocOffsets>& locs,
                                     const std::vector<PriorBox>& priors,
                                     const float variances[4]) {
  if (locs.size() != priors.size()) {
    throw UsageError("offset count " + std::to_string(locs.size()) +
                     " != prior count " + std::to_string(priors.size()));
  }
  std::vector<Box> out;
  out.reserve(locs.size());
  for (std::size_t i = 0; i < locs.size(); ++i) {
    out.push_back(decode_box(locs[i], priors[i], variances));
  }
  return out;
}

inline float iou(const Box& a, const Box& b) {
  const float ix = std::max(0.0f, std::min(a.xmax, b.xmax) -
                                      std::max(a.xmin, b.xmin));
  const float iy = std::max(0.0f, std::min(a.ymax, b.ymax) -
                                      std::max(a.ymin, b.ymin));
  const float inter = ix * iy;
  const float area_a = (a.xmax - a.xmin) * (a.ymax - a.ymin);
  const float area_b = (b.xmax - b.xmin) * (b.ymax - b.ymin);
  const float uni = area_a + area_b - inter;
  return uni > 0.0f ? inter / uni : 0.0f;
}

// Greedy per-class suppression: score descending (stable, so earlier input
// wins ties), keep a box iff IoU with every kept same-class box < threshold.
inline std::vector<Detection> nms(std::vector<Detection> candidates,
                                  float iou_threshold, int top_k) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
  std::vector<Detection> kept;
  for (const Detection& d : candidates) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (k.class_id == d.class_id && iou(k.box, d.box) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) {
      kept.push_back(d);
      if (static_cast<int>(kept.size()) >= top_k) break;
    }
  }
  return kept;
}

inline std::string head_loc_weight_name(int tap) {
  return "head" + std::to_string(tap) + ".loc.weight";
}
inline std::string head_loc_bias_name(int tap) {
  return "head" + std::to_string(tap) + ".loc.bias";
}
inline std::string head_conf_weight_name(int tap) {
  return "head" + std::to_string(tap) + ".conf.weight";
}
inline std::string head_conf_bias_name(int tap) {
  return "head" + std::to_string(tap) + ".conf.bias";
}

namespace detail {

inline ConvWeights head_conv(const WeightStore& store, const std::string& wname,
                             const std::string& bname, int out_ch, int in_ch) {
  if (!store.contains(wname) || !store.contains(bname)) {
    throw LoadError("missing head weight array '" + wname + "'");
  }
  const auto& w = store.get(wname);
  const auto& b = store.get(bname);
  if (w.data.size() != static_cast<std::size_t>(out_ch) * in_ch ||
      b.data.size() != static_cast<std::size_t>(out_ch)) {
    throw LoadError("head array '" + wname + "' has wrong shape");
  }
  return ConvWeights::pointwise(out_ch, in_ch, w.data, b.data);
}

}  // namespace detail

// Full pipeline: backbone forward, convolutional heads over each tap,
// per-prior softmax, threshold, decode, per-class NMS; result sorted by
// descending score.
inline std::vector<Detection> detect(const NetworkConfig& cfg,
                                     const WeightStore& store,
                                     const HeadSpec& head,
                                     const Tensor& input) {
  if (head.priors_per_location() != cfg.priors_per_location) {
    throw ConfigError("head priors/location " +
                      std::to_string(head.priors_per_location()) +
                      " != config value " +
                      std::to_string(cfg.priors_per_location));
  }
  const ForwardResult fwd = forward(cfg, store, input);
  if (fwd.taps.size() != head.scales.size()) {
    throw ConfigError("config taps " + std::to_string(fwd.taps.size()) +
                      " != head scale count");
  }

  std::vector<TapShape> tap_shapes;
  for (const auto& [idx, t] : fwd.taps) {
    tap_shapes.push_back({t.height(), t.width()});
  }
  const std::vector<PriorBox> priors = generate_priors(tap_shapes, head);

  const int ppl = head.priors_per_location();
  std::vector<Detection> candidates;
  std::size_t prior_base = 0;
  for (std::size_t k = 0; k < fwd.taps.size(); ++k) {
    const Tensor& tap = fwd.taps[k].second;
    const int tap_idx = static_cast<int>(k);
    const Tensor loc = pointwise_conv2d(
        tap, detail::head_conv(store, head_loc_weight_name(tap_idx),
                               head_loc_bias_name(tap_idx), ppl * 4,
                               tap.channels()));
    const Tensor conf = pointwise_conv2d(
        tap, detail::head_conv(store, head_conf_weight_name(tap_idx),
                               head_conf_bias_name(tap_idx),
                               ppl * cfg.num_classes, tap.channels()));
    for (int i = 0; i < tap.height(); ++i) {
      for (int j = 0; j < tap.width(); ++j) {
        for (int p = 0; p < ppl; ++p) {
          const std::size_t prior_idx =
              prior_base + (static_cast<std::size_t>(i) * tap.width() + j) * ppl + p;
          std::vector<float> logits(cfg.num_classes);
          for (int c = 0; c < cfg.num_classes; ++c) {
            logits[c] = conf.at(p * cfg.num_classes + c, i, j);
          }
          const std::vector<float> probs = softmax(logits);
          for (int c = 1; c < cfg.num_classes; ++c) {
            if (probs[c] < head.confidence_threshold) continue;
            if (head.emit_class >= 0 && c != head.emit_class) continue;
            LocOffsets off{loc.at(p * 4 + 0, i, j), loc.at(p * 4 + 1, i, j),
                           loc.at(p * 4 + 2, i, j), loc.at(p * 4 + 3, i, j)};
            const Box b = decode_box(off, priors[prior_idx], head.variances);
            if (b.xmax <= b.xmin || b.ymax <= b.ymin) continue;
            candidates.push_back({c, probs[c], b});
          }
        }
      }
    }
    prior_base += static_cast<std::size_t>(tap.height()) * tap.width() * ppl;
  }

  std::vector<Detection> kept =
      nms(std::move(candidates), head.nms_iou_threshold, head.top_k);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
  return kept;
}

// `{frame, class, score, xmin, ymin, xmax, ymax}` with 6 decimal places.
inline std::string detection_jsonl(const std::string& frame,
                                   const Detection& d) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"frame\":\"%s\",\"class\":%d,\"score\":%.6f,"
                "\"xmin\":%.6f,\"ymin\":%.6f,\"xmax\":%.6f,\"ymax\":%.6f}",
                frame.c_str(), d.class_id, d.score, d.box.xmin, d.box.ymin,
                d.box.xmax, d.box.ymax);
  return buf;
}

}  // namespace lcnn
