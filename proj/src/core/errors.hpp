#pragma once

#include <stdexcept>
#include <string>

namespace homove {

// Bad user input: malformed config, missing file referenced by config,
// mode-specific fields absent. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Optimization parameters outside the admissible box.
class BoundsError : public ConfigError {
 public:
  explicit BoundsError(const std::string& what) : ConfigError(what) {}
};

// Filesystem/serialization failure at runtime. Maps to CLI exit code 1.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace homove
