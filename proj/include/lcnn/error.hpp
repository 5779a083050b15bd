#pragma once

#include <stdexcept>
#include <string>

namespace lcnn {

// Invalid network/layer configuration (channel mismatch, bad schedule, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Convolution geometry produces non-positive output dimensions.
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file on disk (weights, images, ground truth).
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller passed arguments that violate an operation's contract.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Weight store is missing or has a mis-shaped array for a layer.
struct LoadError : std::runtime_error {
  explicit LoadError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lcnn
