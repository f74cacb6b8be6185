#pragma once

#include <stdexcept>
#include <string>

namespace rrl {

// Invalid configuration values or inconsistent geometry.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A caller broke an operation's precondition (e.g. stepping a finished episode).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Nonpositive gap reached the car-following model; collision handling upstream failed.
class CollisionHandlingError : public std::logic_error {
 public:
  explicit CollisionHandlingError(const std::string& what) : std::logic_error(what) {}
};

// Corrupt, truncated or mismatched weight / record file.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Loss or gradient became non-finite during an update.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rrl
