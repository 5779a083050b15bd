#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcnn/error.hpp"

namespace lcnn {

// Named f32 parameter arrays; iteration order == insertion order.
class WeightStore {
 public:
  struct Array {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
  };

  void add(std::string name, std::vector<std::uint32_t> dims,
           std::vector<float> data) {
    std::size_t count = 1;
    for (auto d : dims) count *= d;
    if (data.size() != count) {
      throw UsageError("array '" + name + "' data length " +
                       std::to_string(data.size()) + " != dim product " +
                       std::to_string(count));
    }
    if (index_.count(name)) {
      throw UsageError("duplicate array name '" + name + "'");
    }
    index_[name] = arrays_.size();
    arrays_.push_back({std::move(name), std::move(dims), std::move(data)});
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  const Array& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw LoadError("weight store has no array '" + name + "'");
    }
    return arrays_[it->second];
  }

  const std::vector<Array>& arrays() const { return arrays_; }
  std::size_t size() const { return arrays_.size(); }

 private:
  std::vector<Array> arrays_;
  std::unordered_map<std::string, std::size_t> index_;
};

// LCNW binary format, all integers little-endian:
//   magic "LCNW", u32 version=1, u32 array_count,
//   per array: u16 name_len, name, u8 dtype(0=f32), u8 rank,
//              u32 dims[rank], raw f32 payload.
namespace lcnw {

constexpr char kMagic[4] = {'L', 'C', 'N', 'W'};
constexpr std::uint32_t kVersion = 1;

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
  const unsigned char* p;
  std::size_t len;
  std::size_t pos = 0;

  void need(std::size_t n, const std::string& what) {
    if (pos + n > len) {
      throw FormatError("truncated weight file at byte " + std::to_string(pos) +
                        ": need " + std::to_string(n) + " bytes for " + what +
                        ", have " + std::to_string(len - pos));
    }
  }
  std::uint8_t u8(const std::string& what) {
    need(1, what);
    return p[pos++];
  }
  std::uint16_t u16(const std::string& what) {
    need(2, what);
    std::uint16_t v = p[pos] | (std::uint16_t(p[pos + 1]) << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
};

}  // namespace detail

inline std::string serialize(const WeightStore& store) {
  std::string out;
  out.append(kMagic, 4);
  detail::put_u32(out, kVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& a : store.arrays()) {
    if (a.name.size() > 0xffff) throw UsageError("array name too long");
    detail::put_u16(out, static_cast<std::uint16_t>(a.name.size()));
    out.append(a.name);
    out.push_back(0);  // dtype f32
    out.push_back(static_cast<char>(a.dims.size()));
    for (auto d : a.dims) detail::put_u32(out, d);
    // f32 payload, little-endian; host is assumed little-endian here
    const char* raw = reinterpret_cast<const char*>(a.data.data());
    out.append(raw, a.data.size() * sizeof(float));
  }
  return out;
}

inline WeightStore deserialize(const unsigned char* bytes, std::size_t len) {
  detail::Reader r{bytes, len};
  r.need(4, "magic");
  if (std::memcmp(bytes, kMagic, 4) != 0) {
    throw FormatError("bad magic at byte 0: expected 'LCNW'");
  }
  r.pos = 4;
  const std::uint32_t version = r.u32("version");
  if (version != kVersion) {
    throw FormatError("unsupported version " + std::to_string(version) +
                      " at byte 4 (expected " + std::to_string(kVersion) + ")");
  }
  const std::uint32_t count = r.u32("array count");
  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16("name length");
    r.need(name_len, "array name");
    std::string name(reinterpret_cast<const char*>(bytes + r.pos), name_len);
    r.pos += name_len;
    const std::uint8_t dtype = r.u8("dtype");
    if (dtype != 0) {
      throw FormatError("array '" + name + "': unknown dtype " +
                        std::to_string(dtype) + " at byte " +
                        std::to_string(r.pos - 1));
    }
    const std::uint8_t rank = r.u8("rank");
    std::vector<std::uint32_t> dims(rank);
    std::uint64_t elems = 1;
    for (int d = 0; d < rank; ++d) {
      dims[d] = r.u32("dim");
      elems *= dims[d];
    }
    const std::uint64_t payload = elems * sizeof(float);
    if (r.pos + payload > r.len) {
      throw FormatError("array '" + name + "' truncated at byte " +
                        std::to_string(r.pos) + ": expected " +
                        std::to_string(payload) + " payload bytes, have " +
                        std::to_string(r.len - r.pos));
    }
    std::vector<float> data(elems);
    std::memcpy(data.data(), bytes + r.pos, payload);
    r.pos += payload;
    store.add(std::move(name), std::move(dims), std::move(data));
  }
  return store;
}

}  // namespace lcnw

inline void save_weights(const WeightStore& store, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open '" + path + "' for writing");
  const std::string bytes = lcnw::serialize(store);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("write failed for '" + path + "'");
}

inline WeightStore load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return lcnw::deserialize(reinterpret_cast<const unsigned char*>(bytes.data()),
                           bytes.size());
}

// SplitMix64; fixed algorithm so fixtures are identical across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller, one value per call
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lcnn
