#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "lcnn/error.hpp"
#include "lcnn/tensor.hpp"

namespace lcnn {

// Interleaved 8-bit RGB, row-major.
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

namespace detail {

inline int next_pnm_int(std::istream& in, const std::string& what) {
  // skip whitespace and '#' comment lines
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) {
    throw FormatError("malformed PNM header: expected " + what);
  }
  int v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    c = in.get();
  }
  return v;
}

}  // namespace detail

// Binary PPM (P6) or PGM (P5), maxval 255 only; PGM replicates gray to RGB.
inline ImageRGB load_image(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open image '" + path + "'");
  char m0 = 0, m1 = 0;
  f.get(m0);
  f.get(m1);
  const bool gray = m0 == 'P' && m1 == '5';
  const bool rgb = m0 == 'P' && m1 == '6';
  if (!gray && !rgb) {
    throw FormatError("'" + path + "': not a binary PPM/PGM (P5/P6) file");
  }
  const int w = detail::next_pnm_int(f, "width");
  const int h = detail::next_pnm_int(f, "height");
  const int maxval = detail::next_pnm_int(f, "maxval");
  if (w < 1 || h < 1) throw FormatError("'" + path + "': bad dimensions");
  if (maxval != 255) {
    throw FormatError("'" + path + "': unsupported maxval " +
                      std::to_string(maxval) + " (only 255)");
  }
  const std::size_t count = static_cast<std::size_t>(w) * h * (rgb ? 3 : 1);
  std::vector<std::uint8_t> raw(count);
  f.read(reinterpret_cast<char*>(raw.data()),
         static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(f.gcount()) != count) {
    throw FormatError("'" + path + "': short pixel payload (" +
                      std::to_string(f.gcount()) + " of " +
                      std::to_string(count) + " bytes)");
  }
  ImageRGB img{w, h, {}};
  if (rgb) {
    img.pixels = std::move(raw);
  } else {
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      img.pixels[i * 3 + 0] = raw[i];
      img.pixels[i * 3 + 1] = raw[i];
      img.pixels[i * 3 + 2] = raw[i];
    }
  }
  return img;
}

// Bilinear with half-pixel centers: src = (dst + 0.5) * in/out - 0.5,
// edge-clamped, rounded to nearest.
inline ImageRGB resize_bilinear(const ImageRGB& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw UsageError("resize dims must be >= 1");
  ImageRGB out{out_w, out_h,
               std::vector<std::uint8_t>(static_cast<std::size_t>(out_w) *
                                         out_h * 3)};
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int oy = 0; oy < out_h; ++oy) {
    double fy = (oy + 0.5) * sy - 0.5;
    fy = std::min(std::max(fy, 0.0), static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      double fx = (ox + 0.5) * sx - 0.5;
      fx = std::min(std::max(fx, 0.0), static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
        const double bot = (1.0 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
        const double v = (1.0 - wy) * top + wy * bot;
        out.pixels[(static_cast<std::size_t>(oy) * out_w + ox) * 3 + c] =
            static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

// 3 x H x W channel-major tensor in [-1, 1]: value = pixel/127.5 - 1.
inline Tensor normalize_to_tensor(const ImageRGB& img) {
  Tensor t(3, img.height, img.width);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        t.at(c, y, x) = static_cast<float>(img.at(y, x, c) / 127.5 - 1.0);
      }
    }
  }
  return t;
}

inline void save_ppm(const ImageRGB& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open '" + path + "' for writing");
  f << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
}

}  // namespace lcnn
