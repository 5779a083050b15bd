#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lcnn/graph.hpp"
#include "lcnn/ssd.hpp"
#include "lcnn/weights.hpp"

namespace lcnn {

namespace detail {

inline void add_normal_array(WeightStore& store, SplitMix64& rng,
                             const std::string& name,
                             std::vector<std::uint32_t> dims, int fan_in) {
  std::size_t count = 1;
  for (auto d : dims) count *= d;
  const double scale = std::sqrt(2.0 / fan_in);
  std::vector<float> data(count);
  for (auto& v : data) v = static_cast<float>(rng.normal() * scale);
  store.add(name, std::move(dims), std::move(data));
}

inline void add_zero_array(WeightStore& store, const std::string& name,
                           std::uint32_t len) {
  store.add(name, {len}, std::vector<float>(len, 0.0f));
}

}  // namespace detail

// Deterministic He-scaled normal weights (SplitMix64 + Box-Muller), zero
// biases, one array per layer and per detection head; same seed, same store.
inline WeightStore random_init(const NetworkConfig& cfg, const HeadSpec& head,
                               std::uint64_t seed) {
  const auto shapes = validate_config(cfg);
  SplitMix64 rng(seed);
  WeightStore store;
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const LayerSpec& l = cfg.layers[i];
    const int in_ch = shapes[i].in.channels;
    const auto dk = static_cast<std::uint32_t>(l.kernel);
    switch (l.kind) {
      case LayerKind::kConventional:
        detail::add_normal_array(store, rng, layer_weight_name(l.index),
                                 {static_cast<std::uint32_t>(l.out_channels),
                                  static_cast<std::uint32_t>(in_ch), dk, dk},
                                 in_ch * l.kernel * l.kernel);
        detail::add_zero_array(store, layer_bias_name(l.index), l.out_channels);
        break;
      case LayerKind::kDepthwise:
        detail::add_normal_array(store, rng, layer_weight_name(l.index),
                                 {static_cast<std::uint32_t>(in_ch), dk, dk},
                                 l.kernel * l.kernel);
        detail::add_zero_array(store, layer_bias_name(l.index), in_ch);
        break;
      case LayerKind::kPointwise:
        detail::add_normal_array(store, rng, layer_weight_name(l.index),
                                 {static_cast<std::uint32_t>(l.out_channels),
                                  static_cast<std::uint32_t>(in_ch)},
                                 in_ch);
        detail::add_zero_array(store, layer_bias_name(l.index), l.out_channels);
        break;
      case LayerKind::kGlobalPool:
        break;
    }
  }
  // Head predictors are pointwise convs over each tap tensor.
  const int ppl = head.priors_per_location();
  for (std::size_t k = 0; k < cfg.tap_indices.size(); ++k) {
    const int tap_layer = cfg.tap_indices[k];
    const int tap_ch = shapes[tap_layer - 1].out.channels;
    const int tap = static_cast<int>(k);
    const auto loc_out = static_cast<std::uint32_t>(ppl * 4);
    const auto conf_out = static_cast<std::uint32_t>(ppl * cfg.num_classes);
    detail::add_normal_array(store, rng, head_loc_weight_name(tap),
                             {loc_out, static_cast<std::uint32_t>(tap_ch)},
                             tap_ch);
    detail::add_zero_array(store, head_loc_bias_name(tap), loc_out);
    detail::add_normal_array(store, rng, head_conf_weight_name(tap),
                             {conf_out, static_cast<std::uint32_t>(tap_ch)},
                             tap_ch);
    detail::add_zero_array(store, head_conf_bias_name(tap), conf_out);
  }
  return store;
}

}  // namespace lcnn
