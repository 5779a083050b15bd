#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lcnn/error.hpp"

namespace lcnn {

// Exact reduced fraction on 64-bit integers.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw UsageError("Rational with zero denominator");
    if (den < 0) { num = -num; den = -den; }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  double value() const { return static_cast<double>(num) / den; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
};

struct LayerCost {
  std::string label;
  std::string kind;
  std::int64_t dk = 0;
  std::int64_t in_channels = 0;   // M
  std::int64_t out_channels = 0;  // N
  std::int64_t df = 0;            // output spatial extent
  std::int64_t macs = 0;
  std::int64_t params = 0;        // weight values, bias reported separately
  std::int64_t bias_params = 0;
};

namespace detail {
inline void check_cost_args(std::int64_t dk, std::int64_t m, std::int64_t n,
                            std::int64_t df) {
  if (dk < 1 || m < 1 || n < 1 || df < 1) {
    throw UsageError("cost arguments must all be >= 1");
  }
}
}  // namespace detail

// CC = Dk * Dk * M * N * Df * Df
inline LayerCost cost_conventional(std::int64_t dk, std::int64_t m,
                                   std::int64_t n, std::int64_t df,
                                   std::string label = "conventional") {
  detail::check_cost_args(dk, m, n, df);
  LayerCost c;
  c.label = std::move(label);
  c.kind = "conventional";
  c.dk = dk; c.in_channels = m; c.out_channels = n; c.df = df;
  c.macs = dk * dk * m * n * df * df;
  c.params = n * m * dk * dk;
  c.bias_params = n;
  return c;
}

// CC = Dk * Dk * M * Df * Df  +  N * M * Df * Df
inline LayerCost cost_separable(std::int64_t dk, std::int64_t m,
                                std::int64_t n, std::int64_t df,
                                std::string label = "separable") {
  detail::check_cost_args(dk, m, n, df);
  LayerCost c;
  c.label = std::move(label);
  c.kind = "separable";
  c.dk = dk; c.in_channels = m; c.out_channels = n; c.df = df;
  c.macs = dk * dk * m * df * df + n * m * df * df;
  c.params = m * dk * dk + n * m;
  c.bias_params = m + n;
  return c;
}

inline LayerCost cost_depthwise(std::int64_t dk, std::int64_t m, std::int64_t df,
                                std::string label = "depthwise") {
  detail::check_cost_args(dk, m, m, df);
  LayerCost c;
  c.label = std::move(label);
  c.kind = "depthwise";
  c.dk = dk; c.in_channels = m; c.out_channels = m; c.df = df;
  c.macs = dk * dk * m * df * df;
  c.params = m * dk * dk;
  c.bias_params = m;
  return c;
}

inline LayerCost cost_pointwise(std::int64_t m, std::int64_t n, std::int64_t df,
                                std::string label = "pointwise") {
  detail::check_cost_args(1, m, n, df);
  LayerCost c;
  c.label = std::move(label);
  c.kind = "pointwise";
  c.dk = 1; c.in_channels = m; c.out_channels = n; c.df = df;
  c.macs = n * m * df * df;
  c.params = n * m;
  c.bias_params = n;
  return c;
}

// ratio = 1/N + 1/Dk^2 == (Dk^2 + N) / (N * Dk^2), exact.
inline Rational reduction_ratio(std::int64_t dk, std::int64_t n) {
  if (dk < 1 || n < 1) throw UsageError("reduction_ratio requires Dk, N >= 1");
  return Rational(dk * dk + n, n * dk * dk);
}

struct NetworkProfile {
  std::vector<LayerCost> layers;
  std::int64_t total_macs = 0;
  std::int64_t total_params = 0;       // weight values
  std::int64_t total_bias_params = 0;
  std::int64_t param_bytes = 0;        // 4 bytes per value, weights + bias

  void finalize() {
    total_macs = total_params = total_bias_params = 0;
    for (const auto& c : layers) {
      total_macs += c.macs;
      total_params += c.params;
      total_bias_params += c.bias_params;
    }
    param_bytes = 4 * (total_params + total_bias_params);
  }
};

// `layer,kind,Dk,M,N,Df,macs,params`
inline std::string profile_csv(const NetworkProfile& p) {
  std::ostringstream os;
  os << "layer,kind,Dk,M,N,Df,macs,params\n";
  for (const auto& c : p.layers) {
    os << c.label << ',' << c.kind << ',' << c.dk << ',' << c.in_channels << ','
       << c.out_channels << ',' << c.df << ',' << c.macs << ',' << c.params
       << '\n';
  }
  return os.str();
}

}  // namespace lcnn
