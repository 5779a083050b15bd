#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lcnn/complexity.hpp"
#include "lcnn/error.hpp"
#include "lcnn/nn.hpp"
#include "lcnn/tensor.hpp"
#include "lcnn/weights.hpp"

namespace lcnn {

enum class LayerKind { kConventional, kDepthwise, kPointwise, kGlobalPool };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kConventional: return "conventional";
    case LayerKind::kDepthwise: return "depthwise";
    case LayerKind::kPointwise: return "pointwise";
    case LayerKind::kGlobalPool: return "global_pool";
  }
  return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "conventional") return LayerKind::kConventional;
  if (s == "depthwise") return LayerKind::kDepthwise;
  if (s == "pointwise") return LayerKind::kPointwise;
  if (s == "global_pool") return LayerKind::kGlobalPool;
  throw ConfigError("unknown layer kind '" + s + "'");
}

struct LayerSpec {
  int index = 0;  // 1-based
  LayerKind kind = LayerKind::kConventional;
  int out_channels = 0;  // ignored for depthwise / pool
  int kernel = 1;        // Dk; 1 for pointwise, unused for pool
  int stride = 1;
  bool relu = true;
};

struct NetworkConfig {
  int input_size = 224;
  int input_channels = 3;
  std::vector<LayerSpec> layers;
  std::vector<int> tap_indices = {11, 13, 15, 17};
  int num_classes = 21;  // index 0 = background
  int priors_per_location = 6;
};

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  bool operator==(const Shape3&) const = default;
};

struct LayerShape {
  int index = 0;
  Shape3 in;
  Shape3 out;
};

// "Same" zero padding of (Dk-1)/2 for spatial convolutions.
inline int same_pad(int kernel) { return (kernel - 1) / 2; }

// The canonical 26-layer schedule: one conventional conv, twelve
// depthwise/pointwise block pairs, one final global average pool.
inline NetworkConfig build_lcnn_default() {
  NetworkConfig cfg;
  cfg.layers.push_back({1, LayerKind::kConventional, 32, 3, 2, true});
  // (out_channels, stride) per block; stride applies to the depthwise layer
  const std::pair<int, int> blocks[] = {
      {64, 1},  {128, 2}, {128, 1}, {256, 2},  {256, 1},  {512, 2},
      {512, 1}, {512, 1}, {512, 1}, {1024, 2}, {1024, 1}, {1024, 1}};
  int idx = 2;
  for (const auto& [out_ch, stride] : blocks) {
    cfg.layers.push_back({idx++, LayerKind::kDepthwise, 0, 3, stride, true});
    cfg.layers.push_back({idx++, LayerKind::kPointwise, out_ch, 1, 1, true});
  }
  cfg.layers.push_back({idx, LayerKind::kGlobalPool, 0, 1, 1, false});
  return cfg;
}

// Propagates shapes layer by layer; throws ConfigError / GeometryError
// naming the offending layer.
inline std::vector<LayerShape> validate_config(const NetworkConfig& cfg) {
  if (cfg.input_size < 1 || cfg.input_channels < 1) {
    throw ConfigError("input geometry must be positive");
  }
  if (cfg.layers.empty()) throw ConfigError("config has no layers");
  std::vector<LayerShape> table;
  Shape3 cur{cfg.input_channels, cfg.input_size, cfg.input_size};
  const int last_index = cfg.layers.back().index;
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const LayerSpec& l = cfg.layers[i];
    const std::string where = "layer " + std::to_string(l.index);
    if (l.index != static_cast<int>(i) + 1) {
      throw ConfigError(where + ": indices must be consecutive from 1");
    }
    Shape3 next;
    switch (l.kind) {
      case LayerKind::kConventional:
      case LayerKind::kDepthwise: {
        if (l.kernel < 1 || l.kernel % 2 == 0) {
          throw ConfigError(where + ": kernel must be positive odd");
        }
        if (l.stride < 1) throw ConfigError(where + ": stride must be >= 1");
        const int pad = same_pad(l.kernel);
        const int oh = conv_out_dim(cur.height, l.kernel, l.stride, pad);
        const int ow = conv_out_dim(cur.width, l.kernel, l.stride, pad);
        if (oh < 1 || ow < 1) {
          throw GeometryError(where + ": spatial dims vanish (" +
                              std::to_string(cur.height) + "x" +
                              std::to_string(cur.width) + " in)");
        }
        const int out_ch = l.kind == LayerKind::kDepthwise ? cur.channels
                                                           : l.out_channels;
        if (out_ch < 1) throw ConfigError(where + ": out_channels must be >= 1");
        next = {out_ch, oh, ow};
        break;
      }
      case LayerKind::kPointwise: {
        if (l.kernel != 1) throw ConfigError(where + ": pointwise requires Dk == 1");
        if (l.out_channels < 1) {
          throw ConfigError(where + ": out_channels must be >= 1");
        }
        next = {l.out_channels, cur.height, cur.width};
        break;
      }
      case LayerKind::kGlobalPool: {
        if (l.index != last_index) {
          throw ConfigError(where + ": pooling is allowed only as the final layer");
        }
        next = {cur.channels, 1, 1};
        break;
      }
    }
    table.push_back({l.index, cur, next});
    cur = next;
  }
  for (int t : cfg.tap_indices) {
    if (t < 1 || t > last_index ||
        cfg.layers[t - 1].kind == LayerKind::kGlobalPool) {
      throw ConfigError("tap index " + std::to_string(t) +
                        " does not name a conv layer");
    }
  }
  return table;
}

inline std::string layer_weight_name(int index) {
  return "layer" + std::to_string(index) + ".weight";
}
inline std::string layer_bias_name(int index) {
  return "layer" + std::to_string(index) + ".bias";
}

namespace detail {

inline std::vector<float> fetch_array(const WeightStore& store,
                                      const std::string& name,
                                      std::size_t expected, int layer_index) {
  if (!store.contains(name)) {
    throw LoadError("layer " + std::to_string(layer_index) +
                    ": missing weight array '" + name + "'");
  }
  const auto& a = store.get(name);
  if (a.data.size() != expected) {
    throw LoadError("layer " + std::to_string(layer_index) + ": array '" +
                    name + "' has " + std::to_string(a.data.size()) +
                    " values, expected " + std::to_string(expected));
  }
  return a.data;
}

inline ConvWeights layer_conv_weights(const NetworkConfig&, const LayerSpec& l,
                                      int in_channels, const WeightStore& store) {
  const std::string wname = layer_weight_name(l.index);
  const std::string bname = layer_bias_name(l.index);
  const std::size_t dk2 = static_cast<std::size_t>(l.kernel) * l.kernel;
  switch (l.kind) {
    case LayerKind::kConventional: {
      auto vals = fetch_array(store, wname,
                              static_cast<std::size_t>(l.out_channels) *
                                  in_channels * dk2,
                              l.index);
      auto bias = fetch_array(store, bname, l.out_channels, l.index);
      return ConvWeights::conventional(l.out_channels, in_channels, l.kernel,
                                       std::move(vals), std::move(bias));
    }
    case LayerKind::kDepthwise: {
      auto vals = fetch_array(store, wname, in_channels * dk2, l.index);
      auto bias = fetch_array(store, bname, in_channels, l.index);
      return ConvWeights::depthwise(in_channels, l.kernel, std::move(vals),
                                    std::move(bias));
    }
    case LayerKind::kPointwise: {
      auto vals = fetch_array(
          store, wname, static_cast<std::size_t>(l.out_channels) * in_channels,
          l.index);
      auto bias = fetch_array(store, bname, l.out_channels, l.index);
      return ConvWeights::pointwise(l.out_channels, in_channels,
                                    std::move(vals), std::move(bias));
    }
    default:
      throw UsageError("pool layer has no weights");
  }
}

}  // namespace detail

struct ForwardResult {
  std::vector<std::pair<int, Tensor>> taps;  // ascending layer order
  Tensor final;
};

inline ForwardResult forward(const NetworkConfig& cfg, const WeightStore& store,
                             const Tensor& input) {
  validate_config(cfg);
  if (input.channels() != cfg.input_channels ||
      input.height() != cfg.input_size || input.width() != cfg.input_size) {
    throw UsageError("input shape does not match config");
  }
  const std::set<int> taps(cfg.tap_indices.begin(), cfg.tap_indices.end());
  ForwardResult result;
  Tensor cur = input;
  for (const LayerSpec& l : cfg.layers) {
    switch (l.kind) {
      case LayerKind::kConventional: {
        auto w = detail::layer_conv_weights(cfg, l, cur.channels(), store);
        cur = conv2d_direct(cur, w, l.stride, same_pad(l.kernel));
        break;
      }
      case LayerKind::kDepthwise: {
        auto w = detail::layer_conv_weights(cfg, l, cur.channels(), store);
        cur = depthwise_conv2d(cur, w, l.stride, same_pad(l.kernel));
        break;
      }
      case LayerKind::kPointwise: {
        auto w = detail::layer_conv_weights(cfg, l, cur.channels(), store);
        cur = pointwise_conv2d(cur, w);
        break;
      }
      case LayerKind::kGlobalPool:
        cur = global_avg_pool(cur);
        break;
    }
    if (l.relu) cur = relu(cur);
    if (taps.count(l.index)) result.taps.emplace_back(l.index, cur);
  }
  result.final = std::move(cur);
  return result;
}

// One LayerCost per conv layer; D_f is the propagated output spatial size.
inline NetworkProfile profile_network(const NetworkConfig& cfg) {
  const auto shapes = validate_config(cfg);
  NetworkProfile p;
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const LayerSpec& l = cfg.layers[i];
    const LayerShape& s = shapes[i];
    const std::string label = "layer" + std::to_string(l.index);
    switch (l.kind) {
      case LayerKind::kConventional:
        p.layers.push_back(cost_conventional(l.kernel, s.in.channels,
                                             s.out.channels, s.out.height,
                                             label));
        break;
      case LayerKind::kDepthwise:
        p.layers.push_back(
            cost_depthwise(l.kernel, s.in.channels, s.out.height, label));
        break;
      case LayerKind::kPointwise:
        p.layers.push_back(cost_pointwise(s.in.channels, s.out.channels,
                                          s.out.height, label));
        break;
      case LayerKind::kGlobalPool:
        break;  // no MACs, no parameters
    }
  }
  p.finalize();
  return p;
}

// -- JSON config document ---------------------------------------------------

inline nlohmann::json config_to_json(const NetworkConfig& cfg) {
  nlohmann::json j;
  j["input_size"] = cfg.input_size;
  j["input_channels"] = cfg.input_channels;
  j["num_classes"] = cfg.num_classes;
  j["priors_per_location"] = cfg.priors_per_location;
  j["tap_indices"] = cfg.tap_indices;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : cfg.layers) {
    j["layers"].push_back({{"index", l.index},
                           {"kind", to_string(l.kind)},
                           {"out_channels", l.out_channels},
                           {"kernel", l.kernel},
                           {"stride", l.stride},
                           {"activation", l.relu ? "relu" : "none"}});
  }
  return j;
}

inline NetworkConfig config_from_json(const nlohmann::json& j) {
  try {
    NetworkConfig cfg;
    cfg.input_size = j.value("input_size", 224);
    cfg.input_channels = j.value("input_channels", 3);
    cfg.num_classes = j.value("num_classes", 21);
    cfg.priors_per_location = j.value("priors_per_location", 6);
    if (j.contains("tap_indices")) {
      cfg.tap_indices = j.at("tap_indices").get<std::vector<int>>();
    }
    for (const auto& jl : j.at("layers")) {
      LayerSpec l;
      l.index = jl.at("index").get<int>();
      l.kind = layer_kind_from_string(jl.at("kind").get<std::string>());
      l.out_channels = jl.value("out_channels", 0);
      l.kernel = jl.value("kernel", 1);
      l.stride = jl.value("stride", 1);
      l.relu = jl.value("activation", "relu") == std::string("relu");
      cfg.layers.push_back(l);
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config document: ") + e.what());
  }
}

}  // namespace lcnn
