#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lcnn/error.hpp"
#include "lcnn/tensor.hpp"

namespace lcnn {

// out = floor((in + 2*pad - Dk)/stride) + 1
inline int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

namespace detail {

inline void check_conv_geometry(const Tensor& input, const ConvWeights& w,
                                int stride, int pad) {
  if (w.in_channels != input.channels()) {
    throw ConfigError(std::string(to_string(w.kind)) + " conv expects " +
                      std::to_string(w.in_channels) + " input channels, got " +
                      std::to_string(input.channels()));
  }
  if (stride < 1) {
    throw UsageError("stride must be >= 1");
  }
  if (pad < 0) {
    throw UsageError("zero_pad must be >= 0");
  }
  if (conv_out_dim(input.height(), w.kernel, stride, pad) <= 0 ||
      conv_out_dim(input.width(), w.kernel, stride, pad) <= 0) {
    throw GeometryError("conv output dims vanish: input " +
                        std::to_string(input.height()) + "x" +
                        std::to_string(input.width()) + ", Dk=" +
                        std::to_string(w.kernel) + ", stride=" +
                        std::to_string(stride) + ", pad=" + std::to_string(pad));
  }
}

// D_k x D_k windowed dot product over one input channel. Accumulates in
// double; zero outside bounds.
inline double window_dot(const Tensor& input, int channel, int oy, int ox,
                         int kernel, int stride, int pad, const float* kern) {
  double acc = 0.0;
  const int y0 = oy * stride - pad;
  const int x0 = ox * stride - pad;
  for (int ky = 0; ky < kernel; ++ky) {
    const int y = y0 + ky;
    if (y < 0 || y >= input.height()) continue;
    for (int kx = 0; kx < kernel; ++kx) {
      const int x = x0 + kx;
      if (x < 0 || x >= input.width()) continue;
      acc += static_cast<double>(input.at(channel, y, x)) *
             static_cast<double>(kern[ky * kernel + kx]);
    }
  }
  return acc;
}

}  // namespace detail

inline Tensor conv2d_direct(const Tensor& input, const ConvWeights& w,
                            int stride, int zero_pad) {
  if (w.kind != ConvKind::kConventional) {
    throw UsageError("conv2d_direct requires conventional weights");
  }
  detail::check_conv_geometry(input, w, stride, zero_pad);
  const int dk = w.kernel;
  const int oh = conv_out_dim(input.height(), dk, stride, zero_pad);
  const int ow = conv_out_dim(input.width(), dk, stride, zero_pad);
  Tensor out(w.out_channels, oh, ow);
  const size_t kstride = static_cast<size_t>(dk) * dk;
  for (int n = 0; n < w.out_channels; ++n) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = w.bias[n];
        for (int m = 0; m < w.in_channels; ++m) {
          const float* kern =
              w.values.data() + (static_cast<size_t>(n) * w.in_channels + m) * kstride;
          acc += detail::window_dot(input, m, oy, ox, dk, stride, zero_pad, kern);
        }
        out.at(n, oy, ox) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

inline Tensor depthwise_conv2d(const Tensor& input, const ConvWeights& w,
                               int stride, int zero_pad) {
  if (w.kind != ConvKind::kDepthwise) {
    throw UsageError("depthwise_conv2d requires depthwise weights");
  }
  detail::check_conv_geometry(input, w, stride, zero_pad);
  const int dk = w.kernel;
  const int oh = conv_out_dim(input.height(), dk, stride, zero_pad);
  const int ow = conv_out_dim(input.width(), dk, stride, zero_pad);
  Tensor out(input.channels(), oh, ow);
  const size_t kstride = static_cast<size_t>(dk) * dk;
  for (int m = 0; m < input.channels(); ++m) {
    const float* kern = w.values.data() + m * kstride;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = w.bias[m];
        acc += detail::window_dot(input, m, oy, ox, dk, stride, zero_pad, kern);
        out.at(m, oy, ox) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

inline Tensor pointwise_conv2d(const Tensor& input, const ConvWeights& w) {
  if (w.kind != ConvKind::kPointwise) {
    throw UsageError("pointwise_conv2d requires pointwise weights");
  }
  detail::check_conv_geometry(input, w, 1, 0);
  Tensor out(w.out_channels, input.height(), input.width());
  for (int n = 0; n < w.out_channels; ++n) {
    const float* row = w.values.data() + static_cast<size_t>(n) * w.in_channels;
    for (int y = 0; y < input.height(); ++y) {
      for (int x = 0; x < input.width(); ++x) {
        double acc = w.bias[n];
        for (int m = 0; m < w.in_channels; ++m) {
          acc += static_cast<double>(input.at(m, y, x)) *
                 static_cast<double>(row[m]);
        }
        out.at(n, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

inline Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.data()) v = std::max(0.0f, v);
  return out;
}

// channels x 1 x 1; each channel is the mean of its H x W plane.
inline Tensor global_avg_pool(const Tensor& input) {
  Tensor out(input.channels(), 1, 1);
  const double inv = 1.0 / (static_cast<double>(input.height()) * input.width());
  for (int c = 0; c < input.channels(); ++c) {
    double acc = 0.0;
    for (int y = 0; y < input.height(); ++y) {
      for (int x = 0; x < input.width(); ++x) {
        acc += input.at(c, y, x);
      }
    }
    out.at(c, 0, 0) = static_cast<float>(acc * inv);
  }
  return out;
}

// Max-subtracted for stability.
inline std::vector<float> softmax(const std::vector<float>& logits) {
  if (logits.empty()) {
    throw UsageError("softmax requires a non-empty input");
  }
  const float mx = *std::max_element(logits.begin(), logits.end());
  std::vector<float> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    const double e = std::exp(static_cast<double>(logits[i]) - mx);
    out[i] = static_cast<float>(e);
    sum += e;
  }
  const double inv = 1.0 / sum;
  for (float& v : out) v = static_cast<float>(v * inv);
  return out;
}

}  // namespace lcnn
