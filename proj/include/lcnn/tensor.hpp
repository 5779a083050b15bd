#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lcnn/error.hpp"

namespace lcnn {

// Dense 3-D feature map, channel-major / row-major:
// index = c*H*W + y*W + x.
class Tensor {
 public:
  Tensor() = default;

  Tensor(int channels, int height, int width)
      : channels_(channels), height_(height), width_(width) {
    if (channels <= 0 || height <= 0 || width <= 0) {
      throw UsageError("Tensor dims must be positive, got " +
                       std::to_string(channels) + "x" + std::to_string(height) +
                       "x" + std::to_string(width));
    }
    data_.assign(static_cast<size_t>(channels) * height * width, 0.0f);
  }

  Tensor(int channels, int height, int width, std::vector<float> data)
      : Tensor(channels, height, width) {
    if (data.size() != data_.size()) {
      throw UsageError("Tensor data length " + std::to_string(data.size()) +
                       " does not match shape (" + std::to_string(data_.size()) +
                       " expected)");
    }
    data_ = std::move(data);
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  size_t size() const { return data_.size(); }

  float at(int c, int y, int x) const {
    return data_[index(c, y, x)];
  }
  float& at(int c, int y, int x) {
    return data_[index(c, y, x)];
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool same_shape(const Tensor& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }

 private:
  size_t index(int c, int y, int x) const {
    return (static_cast<size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

enum class ConvKind { kConventional, kDepthwise, kPointwise };

inline const char* to_string(ConvKind k) {
  switch (k) {
    case ConvKind::kConventional: return "conventional";
    case ConvKind::kDepthwise: return "depthwise";
    case ConvKind::kPointwise: return "pointwise";
  }
  return "?";
}

// Filter bank for one convolution layer.
//   conventional: values N*M*Dk*Dk, bias N
//   depthwise:    values M*Dk*Dk (output channels == M), bias M
//   pointwise:    values N*M (Dk == 1), bias N
struct ConvWeights {
  ConvKind kind = ConvKind::kConventional;
  int out_channels = 0;  // N
  int in_channels = 0;   // M
  int kernel = 1;        // Dk, odd
  std::vector<float> values;
  std::vector<float> bias;

  static ConvWeights conventional(int out_ch, int in_ch, int kernel,
                                  std::vector<float> values,
                                  std::vector<float> bias = {}) {
    ConvWeights w{ConvKind::kConventional, out_ch, in_ch, kernel,
                  std::move(values), std::move(bias)};
    w.validate();
    return w;
  }

  static ConvWeights depthwise(int channels, int kernel,
                               std::vector<float> values,
                               std::vector<float> bias = {}) {
    ConvWeights w{ConvKind::kDepthwise, channels, channels, kernel,
                  std::move(values), std::move(bias)};
    w.validate();
    return w;
  }

  static ConvWeights pointwise(int out_ch, int in_ch,
                               std::vector<float> values,
                               std::vector<float> bias = {}) {
    ConvWeights w{ConvKind::kPointwise, out_ch, in_ch, 1, std::move(values),
                  std::move(bias)};
    w.validate();
    return w;
  }

  size_t expected_values() const {
    size_t dk2 = static_cast<size_t>(kernel) * kernel;
    switch (kind) {
      case ConvKind::kConventional:
        return static_cast<size_t>(out_channels) * in_channels * dk2;
      case ConvKind::kDepthwise:
        return static_cast<size_t>(in_channels) * dk2;
      case ConvKind::kPointwise:
        return static_cast<size_t>(out_channels) * in_channels;
    }
    return 0;
  }

  int bias_count() const {
    return kind == ConvKind::kDepthwise ? in_channels : out_channels;
  }

  void validate() {
    if (out_channels <= 0 || in_channels <= 0 || kernel <= 0 || kernel % 2 == 0) {
      throw ConfigError(std::string("bad ") + to_string(kind) +
                        " weights: N=" + std::to_string(out_channels) +
                        " M=" + std::to_string(in_channels) +
                        " Dk=" + std::to_string(kernel));
    }
    if (kind == ConvKind::kDepthwise && out_channels != in_channels) {
      throw ConfigError("depthwise weights must have N == M");
    }
    if (kind == ConvKind::kPointwise && kernel != 1) {
      throw ConfigError("pointwise weights must have Dk == 1");
    }
    if (values.size() != expected_values()) {
      throw ConfigError(std::string(to_string(kind)) + " weights expect " +
                        std::to_string(expected_values()) + " values, got " +
                        std::to_string(values.size()));
    }
    if (bias.empty()) {
      bias.assign(bias_count(), 0.0f);
    } else if (bias.size() != static_cast<size_t>(bias_count())) {
      throw ConfigError("bias length " + std::to_string(bias.size()) +
                        " != " + std::to_string(bias_count()));
    }
  }
};

}  // namespace lcnn
