#pragma once

#include <stdexcept>
#include <string>

namespace swapsim {

// Malformed or inconsistent configuration input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Resolution or memory guard tripped (CLI exit code 4).
// Physics-domain violations use std::domain_error (CLI exit code 3).
class GuardError : public std::runtime_error {
 public:
  explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swapsim
